use sdefw_core::error::Error;
use sdefw_core::numerics::loglog_slope;
use sdefw_core::ode_flows::{
    estimate_order, gaussian_flow_weak_error, shipped_names, substep_flow, ButcherTableau, FnField,
    RkWorkspace,
};
use sdefw_core::quadrature::GaussHermite;

fn linear() -> FnField<impl Fn(&[f64], &mut [f64])> {
    FnField::new(1, |x: &[f64], o: &mut [f64]| o[0] = x[0])
}

fn cosine() -> FnField<impl Fn(&[f64], &mut [f64])> {
    FnField::new(1, |x: &[f64], o: &mut [f64]| o[0] = x[0].cos())
}

/// Solution of `x' = cos x`: `atan(sinh(t + asinh(tan x0)))`.
fn cos_exact(x0: f64, t: f64) -> f64 {
    (t + x0.tan().asinh()).sinh().atan()
}

fn order_on(name: &str, field: &str) -> f64 {
    let tab = ButcherTableau::<f64>::shipped(name).unwrap();
    match field {
        // short horizon for low orders keeps the fit in the asymptotic range;
        // high orders need a long one to stay above round-off
        "lin" => {
            let t = if tab.declared_order() <= 2 { 1.0 } else { 4.0 };
            estimate_order(&tab, &linear(), &[1.0], t, &[f64::exp(t)]).unwrap()
        }
        _ => estimate_order(&tab, &cosine(), &[-1.0], 4.0, &[cos_exact(-1.0, 4.0)]).unwrap(),
    }
}

#[test]
fn every_shipped_tableau_reaches_its_order() {
    for name in shipped_names() {
        let p = f64::from(
            ButcherTableau::<f64>::shipped(name)
                .unwrap()
                .declared_order(),
        );
        for field in ["lin", "cos"] {
            let s = order_on(name, field);
            assert!(
                (s - p).abs() <= 0.4,
                "{name} on {field}: slope {s}, declared {p}"
            );
        }
    }
}

#[test]
fn documented_slope_windows() {
    assert!((3.8..=4.2).contains(&order_on("rk4", "lin")));
    assert!((0.9..=1.1).contains(&order_on("euler", "lin")));
    assert!((6.6..=7.4).contains(&order_on("extrapolated_euler7", "cos")));
}

#[test]
fn order_estimate_needs_errors_above_round_off() {
    let tab = ButcherTableau::<f64>::shipped("rk4").unwrap();
    let zero = FnField::new(1, |_: &[f64], o: &mut [f64]| o[0] = 0.0);
    assert!(matches!(
        estimate_order(&tab, &zero, &[1.0], 1.0, &[1.0]),
        Err(Error::Inconclusive { usable: 0 })
    ));
}

fn weak_slope(name: &str) -> f64 {
    let tab = ButcherTableau::<f64>::shipped(name).unwrap();
    let ts: Vec<f64> = (1..=6).map(|j| 2f64.powi(-j)).collect();
    let errs: Vec<f64> = ts
        .iter()
        .map(|&t| {
            gaussian_flow_weak_error(
                &tab,
                &linear(),
                &[1.0],
                t,
                &|x| x[0] * x[0],
                &|x, z| vec![x[0] * z.exp()],
                40,
            )
            .unwrap()
        })
        .collect();
    loglog_slope(&ts, &errs).unwrap()
}

#[test]
fn weak_error_of_gaussian_time_flows() {
    // order 2m tableau: slope at least m + 1
    assert!(weak_slope("rk4") >= 3.0 - 0.3);
    assert!(weak_slope("heun") >= 2.0 - 0.3);
}

#[test]
fn zero_field_has_no_weak_error() {
    let tab = ButcherTableau::<f64>::shipped("rk4").unwrap();
    let zero = FnField::new(1, |_: &[f64], o: &mut [f64]| o[0] = 0.0);
    for t in [0.5, 0.1] {
        let e = gaussian_flow_weak_error(&tab, &zero, &[2.0], t, &|x| x[0], &|x, _| x.to_vec(), 20)
            .unwrap();
        assert_eq!(e, 0.0);
    }
}

/// `|E f(x e^{Z/sqrt(n)}) - E f(R(Z/(n^k sqrt n))^{n^k} x)|` with `f = x^2`.
fn substepped_weak_error(tab: &ButcherTableau<f64>, n: u32, k: u32) -> f64 {
    let rule = GaussHermite::new(40).unwrap();
    let field = linear();
    let scale = 1.0 / f64::from(n).sqrt();
    let approx = rule.expect(|z| {
        let mut ws = RkWorkspace::new(tab.stages(), 1);
        let mut x = [1.0];
        substep_flow(tab, &field, &mut x, z * scale, k, n as usize, &mut ws).unwrap();
        x[0] * x[0]
    });
    let exact = (2.0 / f64::from(n)).exp();
    (approx - exact).abs()
}

#[test]
fn substepping_raises_weak_order() {
    // order-m tableau, n^k substeps of a Gaussian time 1/sqrt(n): the
    // z^{m+1} local error only meets f through an odd moment at leading
    // order, leaving n^-(km + m/2 + 1) on this problem
    let ns = [4.0, 8.0, 16.0, 32.0];
    for name in ["heun", "rk4"] {
        let tab = ButcherTableau::<f64>::shipped(name).unwrap();
        let m = f64::from(tab.declared_order());
        for k in [0u32, 1] {
            let errs: Vec<f64> = ns
                .iter()
                .map(|&n| substepped_weak_error(&tab, n as u32, k))
                .collect();
            let s = -loglog_slope(&ns, &errs).unwrap();
            let rate = f64::from(k) * m + m / 2.0 + 1.0;
            assert!(s >= rate - 0.3, "{name} k={k}: slope {s}, expected {rate}");
        }
    }
}
