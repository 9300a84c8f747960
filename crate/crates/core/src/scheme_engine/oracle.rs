//! Noise-free expectation of the scheme by tensor-product Gauss-Hermite
//! quadrature over every Gaussian draw and exact averaging over both
//! orderings of every step.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extrapolation::SchemeSpec;
use crate::models::SdeModel;
use crate::ode_flows::RkWorkspace;
use crate::quadrature::GaussHermite;
use crate::scalar::{Coefficient, Real};

/// Largest number of Gaussian dimensions (`theta * n`) per level.
pub const MAX_GAUSSIAN_DIMS: usize = 8;
/// Largest number of steps (the ordering enumeration has `2^n` terms).
pub const MAX_STEPS: usize = 8;

#[derive(Clone, Debug)]
pub struct QuadratureOptions {
    /// Gauss-Hermite nodes per Gaussian dimension.
    pub nodes: usize,
    /// Upper bound on leaves (`(2 nodes^theta)^n`) over all levels.
    pub max_leaves: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            nodes: 8,
            max_leaves: 2e9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureReport {
    /// `E[Q^{[theta_k]}]` per level.
    pub level_values: Vec<f64>,
    /// Weighted combination of the level values.
    pub estimate: f64,
    pub leaves: f64,
}

struct Walk<'a, R: Real> {
    model: &'a dyn SdeModel<R>,
    rule: &'a GaussHermite,
    n: usize,
    theta: usize,
    dt: R,
    sqrt_dt: R,
}

impl<R: Real> Walk<'_, R> {
    /// Expectation from the start of repetition `r` of step `j`.
    fn rep(
        &self,
        x: &[R],
        j: usize,
        r: usize,
        forward: bool,
        ws: &mut RkWorkspace<R>,
    ) -> Result<f64> {
        if r == self.theta {
            return self.step(x, j + 1, ws);
        }
        let mut acc = 0.0;
        let mut y = x.to_vec();
        for (&z, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            y.copy_from_slice(x);
            let t1 = self.sqrt_dt * R::lit(z);
            if forward {
                self.model.flow(0, self.dt, &mut y, ws)?;
                self.model.flow(1, t1, &mut y, ws)?;
            } else {
                self.model.flow(1, t1, &mut y, ws)?;
                self.model.flow(0, self.dt, &mut y, ws)?;
            }
            acc += w * self.rep(&y, j, r + 1, forward, ws)?;
        }
        Ok(acc)
    }

    /// Expectation from the start of step `j`.
    fn step(&self, x: &[R], j: usize, ws: &mut RkWorkspace<R>) -> Result<f64> {
        if j == self.n {
            return Ok(self.model.payoff().eval(x));
        }
        Ok(0.5 * self.rep(x, j, 0, true, ws)? + 0.5 * self.rep(x, j, 0, false, ws)?)
    }

    /// Top level split over the first ordering bit and first node, summed
    /// in a fixed order.
    fn run(&self) -> Result<f64> {
        let x0 = self.model.initial_state();
        let branches: Vec<(bool, usize)> = [true, false]
            .into_iter()
            .flat_map(|f| (0..self.rule.len()).map(move |k| (f, k)))
            .collect();
        let parts: Vec<f64> = branches
            .par_iter()
            .map(|&(forward, k)| {
                let mut ws = RkWorkspace::new(0, x0.len());
                let mut y = x0.clone();
                let t1 = self.sqrt_dt * R::lit(self.rule.nodes[k]);
                if forward {
                    self.model.flow(0, self.dt, &mut y, &mut ws)?;
                    self.model.flow(1, t1, &mut y, &mut ws)?;
                } else {
                    self.model.flow(1, t1, &mut y, &mut ws)?;
                    self.model.flow(0, self.dt, &mut y, &mut ws)?;
                }
                Ok(0.5 * self.rule.weights[k] * self.rep(&y, 0, 1, forward, &mut ws)?)
            })
            .collect::<Result<_>>()?;
        Ok(parts.iter().sum())
    }
}

/// `E[g(X)]` under each level of the scheme for a model with one Brownian
/// driver, plus the extrapolated combination.
pub fn quadrature_expectation<R: Real, C: Coefficient>(
    model: &dyn SdeModel<R>,
    scheme: &SchemeSpec<C>,
    n: usize,
    options: &QuadratureOptions,
) -> Result<QuadratureReport> {
    if model.noise_dim() != 1 {
        return Err(Error::Parameter(format!(
            "quadrature oracle needs one Brownian driver, model {} has {}",
            model.name(),
            model.noise_dim()
        )));
    }
    if n == 0 || n > MAX_STEPS {
        return Err(Error::Budget(format!(
            "oracle supports 1..={MAX_STEPS} steps, got {n}"
        )));
    }
    let dims = scheme.theta_max() as usize * n;
    if dims > MAX_GAUSSIAN_DIMS {
        return Err(Error::Budget(format!(
            "theta_max * n = {dims} Gaussian dimensions exceeds {MAX_GAUSSIAN_DIMS}"
        )));
    }
    let rule = GaussHermite::new(options.nodes)?;
    let leaves: f64 = scheme
        .thetas()
        .iter()
        .map(|&t| (2.0 * (options.nodes as f64).powi(t as i32)).powi(n as i32))
        .sum();
    if leaves > options.max_leaves {
        return Err(Error::Budget(format!(
            "{leaves:.3e} quadrature leaves exceed the budget {:.3e}",
            options.max_leaves
        )));
    }
    let horizon = model.horizon();
    let level_values = scheme
        .thetas()
        .iter()
        .map(|&theta| {
            let steps = R::from_usize(n * theta as usize).expect("step count");
            let dt = horizon / steps;
            Walk {
                model,
                rule: &rule,
                n,
                theta: theta as usize,
                dt,
                sqrt_dt: dt.sqrt(),
            }
            .run()
        })
        .collect::<Result<Vec<f64>>>()?;
    let estimate = level_values
        .iter()
        .zip(scheme.weights())
        .map(|(q, f)| q * f.to_f64())
        .sum();
    Ok(QuadratureReport {
        level_values,
        estimate,
        leaves,
    })
}
