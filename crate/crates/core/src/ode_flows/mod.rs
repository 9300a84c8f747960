//! Explicit Runge-Kutta flows `exp(tV)` of autonomous vector fields.

mod convergence;
mod tableau;

pub use convergence::{estimate_order, gaussian_flow_weak_error};
pub use tableau::{shipped_names, shipped_source, ButcherTableau};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// An autonomous vector field on `R^N`.
pub trait VectorField<R: Real> {
    fn dim(&self) -> usize;

    /// Writes `V(x)` into `out`.
    fn eval(&self, x: &[R], out: &mut [R]) -> Result<()>;
}

/// Adapts a closure `|x, out|` into a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<R: Real, F: Fn(&[R], &mut [R])> VectorField<R> for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[R], out: &mut [R]) -> Result<()> {
        (self.f)(x, out);
        Ok(())
    }
}

/// Scratch space for [`rk_step`]; reuse it across steps to avoid allocation.
#[derive(Clone, Debug)]
pub struct RkWorkspace<R> {
    dim: usize,
    slopes: Vec<R>,
    stage: Vec<R>,
}

impl<R: Real> RkWorkspace<R> {
    pub fn new(stages: usize, dim: usize) -> Self {
        Self {
            dim,
            slopes: vec![R::zero(); stages * dim],
            stage: vec![R::zero(); dim],
        }
    }

    fn fit(&mut self, stages: usize, dim: usize) {
        if self.dim != dim || self.slopes.len() < stages * dim {
            *self = Self::new(stages, dim);
        }
    }
}

/// One explicit Runge-Kutta step of size `h`, updating `x` in place.
pub fn rk_step<R: Real>(
    tableau: &ButcherTableau<R>,
    field: &dyn VectorField<R>,
    x: &mut [R],
    h: R,
    ws: &mut RkWorkspace<R>,
) -> Result<()> {
    let n = x.len();
    let s = tableau.stages();
    ws.fit(s, n);
    for i in 0..s {
        ws.stage.copy_from_slice(x);
        for (j, &aij) in tableau.a()[i].iter().enumerate() {
            if aij == R::zero() {
                continue;
            }
            let kj = &ws.slopes[j * n..(j + 1) * n];
            for (st, &k) in ws.stage.iter_mut().zip(kj) {
                *st = *st + h * aij * k;
            }
        }
        let (stage, slopes) = (&ws.stage, &mut ws.slopes[i * n..(i + 1) * n]);
        field.eval(stage, slopes)?;
        if slopes.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure { stage: i });
        }
    }
    // Increment form: since sum b = 1, x + h(k_1 + sum b_j (k_j - k_1))
    // keeps the large, sign-alternating weights of extrapolation-type
    // tableaux from amplifying round-off.
    for c in 0..n {
        let k1 = ws.slopes[c];
        let mut acc = R::zero();
        for (j, &bj) in tableau.b().iter().enumerate().skip(1) {
            if bj != R::zero() {
                acc = acc + bj * (ws.slopes[j * n + c] - k1);
            }
        }
        x[c] = x[c] + h * (k1 + acc);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericFailure { stage: s });
    }
    Ok(())
}

/// `steps` equal Runge-Kutta steps covering time `t`.
pub fn integrate<R: Real>(
    tableau: &ButcherTableau<R>,
    field: &dyn VectorField<R>,
    x: &mut [R],
    t: R,
    steps: usize,
    ws: &mut RkWorkspace<R>,
) -> Result<()> {
    let h = t / R::from_usize(steps.max(1)).expect("step count");
    for _ in 0..steps.max(1) {
        rk_step(tableau, field, x, h, ws)?;
    }
    Ok(())
}

/// `n^k` composed steps of size `t / n^k`.
pub fn substep_flow<R: Real>(
    tableau: &ButcherTableau<R>,
    field: &dyn VectorField<R>,
    x: &mut [R],
    t: R,
    k: u32,
    n: usize,
    ws: &mut RkWorkspace<R>,
) -> Result<()> {
    let steps = n
        .checked_pow(k)
        .ok_or_else(|| Error::Parameter(format!("{n}^{k} substeps overflow")))?;
    integrate(tableau, field, x, t, steps, ws)
}

/// How the flow of one vector field is realized.
#[derive(Clone, Debug)]
pub enum FlowMap<R> {
    /// The model's closed-form flow.
    Exact,
    /// `substeps` Runge-Kutta steps per flow evaluation.
    Numeric {
        tableau: Arc<ButcherTableau<R>>,
        substeps: usize,
    },
}

impl<R: Real> FlowMap<R> {
    pub fn numeric(tableau: ButcherTableau<R>, substeps: usize) -> Self {
        FlowMap::Numeric {
            tableau: Arc::new(tableau),
            substeps: substeps.max(1),
        }
    }

    pub fn stages(&self) -> usize {
        match self {
            FlowMap::Exact => 0,
            FlowMap::Numeric { tableau, .. } => tableau.stages(),
        }
    }
}
