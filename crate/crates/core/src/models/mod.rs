//! Stratonovich SDE models `dX = V_0(X) dt + sum_i V_i(X) o dB^i`.

mod gbm;
mod heston;
mod payoff;
mod sinh;

pub use gbm::GbmModel;
pub use heston::{HestonModel, HestonParams};
pub use payoff::{asian_call_payoff, Payoff};
pub use sinh::SinhModel;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ode_flows::{integrate, FlowMap, RkWorkspace, VectorField};
use crate::scalar::Real;

/// Flat numeric parameters keyed by name.
pub type ParamMap = BTreeMap<String, f64>;

/// Names accepted by [`build_model`].
pub const MODEL_NAMES: [&str; 3] = ["heston", "gbm", "sinh"];

pub trait SdeModel<R: Real>: Send + Sync {
    fn name(&self) -> &'static str;

    /// State dimension `N`.
    fn dim(&self) -> usize;

    /// Number of Brownian drivers `d`; the fields are `V_0..=V_d`.
    fn noise_dim(&self) -> usize;

    fn initial_state(&self) -> Vec<R>;

    fn horizon(&self) -> R;

    /// Writes `V_i(x)` into `out`.
    fn field(&self, i: usize, x: &[R], out: &mut [R]) -> Result<()>;

    /// Closed-form `exp(t V_i)(x)` in place, if the model has one.
    fn exact_flow(&self, i: usize, t: R, x: &mut [R]) -> Result<()> {
        let _ = (t, x);
        Err(Error::Parameter(format!(
            "{} has no closed-form flow for field {i}",
            self.name()
        )))
    }

    fn admissible(&self, x: &[R]) -> bool;

    fn payoff(&self) -> &Payoff;

    /// How each field's flow is computed.
    fn flow_maps(&self) -> &[FlowMap<R>];

    fn set_flow_map(&mut self, i: usize, flow: FlowMap<R>) -> Result<()>;

    /// Closed-form `E[payoff(X_T)]`, when known.
    fn exact_expectation(&self) -> Option<f64> {
        None
    }

    /// Realizes `exp(t V_i)(x)` with the configured flow map.
    fn flow(&self, i: usize, t: R, x: &mut [R], ws: &mut RkWorkspace<R>) -> Result<()> {
        match &self.flow_maps()[i] {
            FlowMap::Exact => self.exact_flow(i, t, x),
            FlowMap::Numeric { tableau, substeps } => {
                let field = FieldRef { model: self, i };
                integrate(tableau, &field, x, t, *substeps, ws)
            }
        }
    }
}

/// Field `V_i` of a model as a [`VectorField`].
pub struct FieldRef<'a, M: ?Sized> {
    pub model: &'a M,
    pub i: usize,
}

impl<R: Real, M: SdeModel<R> + ?Sized> VectorField<R> for FieldRef<'_, M> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn eval(&self, x: &[R], out: &mut [R]) -> Result<()> {
        self.model.field(self.i, x, out)
    }
}

pub(crate) fn param(params: &ParamMap, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

pub(crate) fn check_keys(model: &str, params: &ParamMap, allowed: &[&str]) -> Result<()> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::Parameter(format!(
            "unknown parameter '{k}' for model {model} (expected one of {})",
            allowed.join(", ")
        ))),
        None => Ok(()),
    }
}

/// Parameter keys understood by a model.
pub fn model_keys(name: &str) -> Result<&'static [&'static str]> {
    match name {
        "heston" => Ok(heston::KEYS),
        "gbm" => Ok(gbm::KEYS),
        "sinh" => Ok(sinh::KEYS),
        _ => Err(Error::Parameter(format!(
            "unknown model '{name}' (expected one of {})",
            MODEL_NAMES.join(", ")
        ))),
    }
}

/// Builds a model from the registry; missing keys take their defaults.
pub fn build_model<R: Real>(name: &str, params: &ParamMap) -> Result<Box<dyn SdeModel<R>>> {
    check_keys(name, params, model_keys(name)?)?;
    Ok(match name {
        "heston" => Box::new(HestonModel::new(HestonParams::from_map(params))?),
        "gbm" => Box::new(GbmModel::from_map(params)?),
        _ => Box::new(SinhModel::from_map(params)?),
    })
}
