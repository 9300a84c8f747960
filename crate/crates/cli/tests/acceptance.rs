//! Acceptance suite: one `PASS|FAIL` line per criterion. Runs without the
//! libtest harness so the lines always print; exits nonzero on any FAIL.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use num_rational::BigRational;
use sdefw::config::{apply_overrides, parse_pairs};
use sdefw::study::without_elapsed;
use sdefw::{run_study, verify_algebra, StudyConfig};
use sdefw_core::extrapolation::{closed_form_m3, solve_weights};
use sdefw_core::free_algebra::{
    bch_antisymmetry_check, critical_check, fujiwara_expansion_check, AlgebraDims,
};
use sdefw_core::models::{build_model, GbmModel, HestonModel, HestonParams, ParamMap, SinhModel};
use sdefw_core::numerics::loglog_slope;
use sdefw_core::ode_flows::{
    estimate_order, gaussian_flow_weak_error, shipped_names, ButcherTableau, FnField,
};
use sdefw_core::randomness::{Coupling, PointSource};
use sdefw_core::scheme_engine::{
    cost_estimate, estimate, quadrature_expectation, EstimateOptions, QuadratureOptions,
};
use sdefw_core::SdeModel;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn c1_order_conditions() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for m in 1..=3 {
        for d in 1..=2 {
            let r = verify_algebra(m, d, 2 * m).expect("suite runs");
            let oc = r
                .outcomes
                .iter()
                .find(|o| o.to_string().starts_with("CHECK order_condition"))
                .expect("order condition checked");
            ok &= oc.pass;
            lines.push(oc.to_string());
        }
    }
    (ok, lines.join("; "))
}

fn c2_critical() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for (thetas, l, degree) in [
        (vec![1, 2, 3], 2, 7),
        (vec![1, 2, 3, 4], 2, 9),
        (vec![1, 2, 3, 4], 3, 10),
    ] {
        let scheme = solve_weights::<BigRational>(&thetas).unwrap();
        let o = critical_check(&scheme, l, AlgebraDims::new(1, degree).unwrap()).unwrap();
        ok &= o.pass;
        lines.push(o.to_string());
    }
    (ok, lines.join("; "))
}

fn c3_expansion_and_antisymmetry() -> Outcome {
    let mut ok = true;
    let mut failed = Vec::new();
    for d in 0..=2 {
        for degree in 1..=5 {
            let o = fujiwara_expansion_check::<BigRational>(AlgebraDims::new(d, degree).unwrap())
                .unwrap();
            if !o.pass {
                ok = false;
                failed.push(o.to_string());
            }
        }
    }
    let o = bch_antisymmetry_check::<BigRational>(AlgebraDims::new(1, 5).unwrap()).unwrap();
    ok &= o.pass;
    (ok, format!("expansion d<=2 D<=5 failures {failed:?}; {o}"))
}

fn c4_weights() -> Outcome {
    let nv12 = solve_weights::<BigRational>(&[1, 2]).unwrap();
    let exact = nv12.weights() == [rational(-1, 3), rational(4, 3)];
    let mut triples = 0;
    let mut closed_ok = true;
    for a in 1..=6u32 {
        for b in a + 1..=6 {
            for c in b + 1..=6 {
                let s = solve_weights::<BigRational>(&[a, b, c]).unwrap();
                closed_ok &=
                    closed_form_m3::<BigRational>(a, b, c).unwrap().as_slice() == s.weights();
                triples += 1;
            }
        }
    }
    // every increasing level set drawn from 1..=6
    let mut specs = 0;
    let mut moments_ok = true;
    for mask in 1u32..64 {
        let thetas: Vec<u32> = (1..=6).filter(|t| mask & (1 << (t - 1)) != 0).collect();
        let s = solve_weights::<BigRational>(&thetas).unwrap();
        moments_ok &= s.satisfies_moment_conditions();
        specs += 1;
    }
    (
        exact && closed_ok && moments_ok,
        format!(
            "GF(1,2) weights {:?} exact={exact}; closed form agrees on {triples} triples={closed_ok}; moment conditions on {specs} schemes={moments_ok}",
            nv12.weights().iter().map(ToString::to_string).collect::<Vec<_>>()
        ),
    )
}

fn c5_rk_orders() -> Outcome {
    let lin = FnField::new(1, |x: &[f64], o: &mut [f64]| o[0] = x[0]);
    let cos = FnField::new(1, |x: &[f64], o: &mut [f64]| o[0] = x[0].cos());
    let cos_exact = (4.0 + (-1f64).tan().asinh()).sinh().atan();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in shipped_names() {
        let tab = ButcherTableau::<f64>::shipped(name).unwrap();
        let p = f64::from(tab.declared_order());
        let t = if tab.declared_order() <= 2 { 1.0 } else { 4.0 };
        let s_lin = estimate_order(&tab, &lin, &[1.0], t, &[f64::exp(t)]).unwrap();
        let s_cos = estimate_order(&tab, &cos, &[-1.0], 4.0, &[cos_exact]).unwrap();
        ok &= (s_lin - p).abs() <= 0.4 && (s_cos - p).abs() <= 0.4;
        parts.push(format!("{name} p={p} lin={s_lin:.2} cos={s_cos:.2}"));
    }
    for (name, m) in [("heun", 1.0), ("rk4", 2.0)] {
        let tab = ButcherTableau::<f64>::shipped(name).unwrap();
        let ts: Vec<f64> = (1..=6).map(|j| 2f64.powi(-j)).collect();
        let errs: Vec<f64> = ts
            .iter()
            .map(|&t| {
                gaussian_flow_weak_error(
                    &tab,
                    &lin,
                    &[1.0],
                    t,
                    &|x| x[0] * x[0],
                    &|x, z| vec![x[0] * z.exp()],
                    40,
                )
                .unwrap()
            })
            .collect();
        let s = loglog_slope(&ts, &errs).unwrap();
        ok &= s >= m + 1.0 - 0.3;
        parts.push(format!("{name} weak slope {s:.2} (>= {})", m + 1.0 - 0.3));
    }
    (ok, parts.join("; "))
}

fn exponents(
    model: &dyn SdeModel<f64>,
    thetas: &[u32],
    ns: &[usize],
    nodes: usize,
) -> (Vec<f64>, Vec<f64>) {
    let scheme = solve_weights::<f64>(thetas).unwrap();
    let exact = model.exact_expectation().unwrap();
    let opts = QuadratureOptions {
        nodes,
        ..QuadratureOptions::default()
    };
    let errs: Vec<f64> = ns
        .iter()
        .map(|&n| {
            (quadrature_expectation(model, &scheme, n, &opts)
                .unwrap()
                .estimate
                - exact)
                .abs()
        })
        .collect();
    let exps = errs
        .windows(2)
        .zip(ns.windows(2))
        .map(|(e, n)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect();
    (errs, exps)
}

fn sci(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.3e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn fixed(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.2}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn c6_weak_slopes() -> Outcome {
    // GBM fields commute, so the splitting is exact and the error is round-off
    let gbm = GbmModel::<f64>::new(0.05, 0.2, 1.0, 1.0, 2).unwrap();
    let (g_nv, _) = exponents(&gbm, &[1], &[2, 4], 8);
    let (g_gf, _) = exponents(&gbm, &[1, 2], &[2, 4], 8);
    let gbm_exact = g_nv.iter().chain(&g_gf).all(|&e| e <= 1e-12);
    // non-commuting substitute with the same payoff
    let sinh = SinhModel::<f64>::new(1.0, 0.5, 0.5, 1.0, 2).unwrap();
    let (nv_err, nv_exp) = exponents(&sinh, &[1], &[2, 4, 8], 6);
    let (gf_err, gf_exp) = exponents(&sinh, &[1, 2], &[2, 4], 8);
    let ok = gbm_exact
        && nv_exp.iter().all(|e| (e - 2.0).abs() <= 0.5)
        && gf_exp.iter().all(|e| (e - 4.0).abs() <= 0.8);
    (
        ok,
        format!(
            "gbm x^2 errors NV [{}] GF(1,2) [{}] (commuting fields: exact, exponents undefined); \
             sinh x^2 NV n=2,4,8 errors [{}] exponents [{}]; GF(1,2) n=2,4 errors [{}] exponents [{}] \
             (GF at n=8 exceeds the 8-dimension quadrature budget)",
            sci(&g_nv), sci(&g_gf), sci(&nv_err), fixed(&nv_exp), sci(&gf_err), fixed(&gf_exp)
        ),
    )
}

fn heston_config() -> StudyConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/heston_qmc.cfg");
    let mut pairs = parse_pairs(&std::fs::read_to_string(path).unwrap()).unwrap();
    let set = ["n=3", "schemes=1,2,3", "M=1000000"].map(String::from);
    apply_overrides(&mut pairs, &set).unwrap();
    StudyConfig::from_pairs(&pairs).unwrap()
}

fn c7_c8_heston() -> (Outcome, Outcome) {
    let cfg = heston_config();
    let a = run_study(&cfg, Some(1)).unwrap();
    let reference = a.reference.unwrap();
    let r = &a.reports[0];
    let gf_err = (r.estimate - reference).abs();
    // under reuse coupling the level-1 mean is exactly the NV estimate on
    // the same points
    let nv_err = (r.level_means[0] - reference).abs();
    let ok7 = gf_err < 5e-4 && gf_err < nv_err && (9.55e-4 / 5.0..=5.0 * 9.55e-4).contains(&nv_err);
    let c7 = (
        ok7,
        format!(
            "n=3 M={} sobol: GF(1,2,3) {:.10} err {gf_err:.3e} (stderr {:.1e}); NV {:.10} err {nv_err:.3e}; aborted {}; {:.1}s",
            r.paths, r.estimate, r.stderr, r.level_means[0], r.aborted, r.elapsed_s
        ),
    );
    let b = run_study(&cfg, Some(3)).unwrap();
    let (x, y) = (without_elapsed(&a.to_csv()), without_elapsed(&b.to_csv()));
    let same = x == y && r.estimate.to_bits() == b.reports[0].estimate.to_bits();
    let c8 = (
        same,
        format!(
            "workers 1 vs 3: csv (minus elapsed_s) byte-identical={same}, estimate {:e}",
            b.reports[0].estimate
        ),
    );
    (c7, c8)
}

fn c9_cost() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let heston = HestonModel::<f64>::new(HestonParams::default()).unwrap();
    let gbm = build_model::<f64>("gbm", &ParamMap::new()).unwrap();
    let cases: [(&dyn SdeModel<f64>, Vec<u32>, usize); 3] = [
        (gbm.as_ref(), vec![1], 2),
        (&heston, vec![1, 2], 2),
        (&heston, vec![1, 2, 3], 3),
    ];
    for (model, thetas, n) in cases {
        let paths = 10u64;
        let d = model.noise_dim() as u64;
        let scheme = solve_weights::<f64>(&thetas).unwrap();
        let opts = EstimateOptions {
            coupling: Coupling::Independent,
            workers: None,
        };
        let rep = estimate(
            model,
            &scheme,
            n,
            paths,
            &PointSource::Pseudo { seed: 9 },
            &opts,
        )
        .unwrap();
        let (m, nn, sum) = (thetas.len() as u64, n as u64, scheme.theta_sum());
        let classes = [
            (rep.ops.flow_solves, paths * nn * (d + 1) * sum),
            (rep.ops.normal_vectors, paths * nn * sum),
            (rep.ops.bernoulli, paths * nn),
            (rep.ops.unit_ops, paths * (5 * m + nn * sum + 1) + 2 * m),
        ];
        let class_ok = classes.iter().all(|(a, b)| a == b);
        let totals_ok = [(1, 1, 1), (7, 2, 3), (40, 1, 11)]
            .iter()
            .all(|&(a, b, z)| {
                rep.ops.weighted(a, b, z) == cost_estimate(&thetas, nn, paths, d, a, b, z)
            });
        ok &= class_ok && totals_ok;
        parts.push(format!(
            "m={m} n={n} M={paths} d={d}: measured {:?} formula {:?} total {}",
            classes.map(|c| c.0),
            classes.map(|c| c.1),
            rep.ops.total_unit_weights()
        ));
    }
    (ok, parts.join("; "))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        (false, format!("panicked: {msg}"))
    })
}

fn report(id: usize, name: &str, start: Instant, (pass, detail): Outcome) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!(
        "{verdict} criterion {id} {name} [{:.1}s]: {detail}",
        start.elapsed().as_secs_f64()
    );
    pass
}

fn main() {
    // `cargo test -- --list` and friends: nothing to enumerate
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut all = true;
    let simple: [Criterion; 6] = [
        ("algebraic order conditions", c1_order_conditions),
        ("critical terms vanish", c2_critical),
        (
            "expansion identity and BCH antisymmetry",
            c3_expansion_and_antisymmetry,
        ),
        ("extrapolation weights", c4_weights),
        ("Runge-Kutta orders", c5_rk_orders),
        ("noise-free weak-order slopes", c6_weak_slopes),
    ];
    for (i, (name, f)) in simple.into_iter().enumerate() {
        let t = Instant::now();
        all &= report(i + 1, name, t, guarded(f));
    }
    let t = Instant::now();
    let (c7, c8) = catch_unwind(c7_c8_heston).unwrap_or_else(|_| {
        let o = (false, "panicked".to_string());
        (o.clone(), o)
    });
    all &= report(7, "Heston benchmark", t, c7);
    all &= report(8, "determinism across worker counts", t, c8);
    let t = Instant::now();
    all &= report(9, "operation counts", t, guarded(c9_cost));
    if !all {
        std::process::exit(1);
    }
}
