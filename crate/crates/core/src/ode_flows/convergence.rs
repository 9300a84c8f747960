//! Empirical convergence measurements for Runge-Kutta flows.

use super::{integrate, ButcherTableau, RkWorkspace, VectorField};
use crate::error::{Error, Result};
use crate::numerics::least_squares_slope;
use crate::quadrature::GaussHermite;
use crate::scalar::Real;

/// Errors below this are treated as round-off and left out of the fit.
pub const ERROR_FLOOR: f64 = 1e-13;

/// Slope of `log(error)` against `log(h)` for `h = t_end / 2^j`, `j = 3..=8`.
///
/// `exact` is the true state at `t_end`. The error is the largest component
/// error relative to `max(1, |exact_i|)`.
pub fn estimate_order<R: Real>(
    tableau: &ButcherTableau<R>,
    field: &dyn VectorField<R>,
    x0: &[R],
    t_end: R,
    exact: &[R],
) -> Result<f64> {
    let mut ws = RkWorkspace::new(tableau.stages(), x0.len());
    let mut log_h = Vec::new();
    let mut log_e = Vec::new();
    for j in 3..=8u32 {
        let steps = 1usize << j;
        let mut x = x0.to_vec();
        integrate(tableau, field, &mut x, t_end, steps, &mut ws)?;
        let err = x
            .iter()
            .zip(exact)
            .map(|(a, e)| {
                let e = e.to_f64_lossy();
                (a.to_f64_lossy() - e).abs() / e.abs().max(1.0)
            })
            .fold(0.0, f64::max);
        if err >= ERROR_FLOOR {
            log_h.push((t_end.to_f64_lossy() / steps as f64).ln());
            log_e.push(err.ln());
        }
    }
    if log_h.len() < 3 {
        return Err(Error::Inconclusive {
            usable: log_h.len(),
        });
    }
    Ok(least_squares_slope(&log_h, &log_e))
}

/// `|E f(exact(sqrt(t) Z)) - E f(RK step of size sqrt(t) Z)|` for `Z ~ N(0,1)`,
/// by `nodes`-point Gauss-Hermite quadrature.
///
/// The same quantity is also computed with `2 * nodes` points; if the two
/// disagree by more than `1e-6` relative (plus `1e-15` absolute), the
/// quadrature is declared unconverged.
pub fn gaussian_flow_weak_error<R: Real>(
    tableau: &ButcherTableau<R>,
    field: &dyn VectorField<R>,
    x0: &[R],
    t: f64,
    f: &dyn Fn(&[R]) -> f64,
    exact: &dyn Fn(&[R], R) -> Vec<R>,
    nodes: usize,
) -> Result<f64> {
    let mut ws = RkWorkspace::new(tableau.stages(), x0.len());
    let mut run = |rule: &GaussHermite| -> Result<f64> {
        let mut acc = 0.0;
        for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
            let time = R::lit(t.sqrt() * z);
            let mut x = x0.to_vec();
            integrate(tableau, field, &mut x, time, 1, &mut ws)?;
            acc += w * (f(&exact(x0, time)) - f(&x));
        }
        Ok(acc)
    };
    let coarse = run(&GaussHermite::new(nodes)?)?;
    let fine = run(&GaussHermite::new(2 * nodes)?)?;
    if (coarse - fine).abs() > 1e-6 * fine.abs() + 1e-15 {
        return Err(Error::Quadrature(format!(
            "{nodes} and {} node rules disagree: {coarse:e} vs {fine:e}",
            2 * nodes
        )));
    }
    Ok(fine.abs())
}
