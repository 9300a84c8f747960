use super::{check_keys, param, ParamMap, Payoff, SdeModel};
use crate::error::{Error, Result};
use crate::ode_flows::FlowMap;
use crate::scalar::Real;

pub(super) const KEYS: &[&str] = &["mu", "sigma", "x0", "T", "power"];

/// Geometric Brownian motion `dX = mu X dt + sigma X dW` (Ito), written with
/// the Stratonovich drift `V_0 = (mu - sigma^2/2) x`, `V_1 = sigma x`.
#[derive(Clone, Debug)]
pub struct GbmModel<R> {
    mu: f64,
    sigma: f64,
    x0: f64,
    horizon: f64,
    drift: R,
    vol: R,
    payoff: Payoff,
    flows: Vec<FlowMap<R>>,
}

impl<R: Real> GbmModel<R> {
    /// Payoff `x^power`, `power` in {1, 2}.
    pub fn new(mu: f64, sigma: f64, x0: f64, horizon: f64, power: i32) -> Result<Self> {
        if sigma < 0.0 || !(1..=2).contains(&power) || horizon <= 0.0 {
            return Err(Error::Parameter(format!(
                "gbm needs sigma >= 0, T > 0, power 1 or 2 (sigma={sigma}, T={horizon}, power={power})"
            )));
        }
        Ok(Self {
            mu,
            sigma,
            x0,
            horizon,
            drift: R::lit(mu - 0.5 * sigma * sigma),
            vol: R::lit(sigma),
            payoff: Payoff::Power(power),
            flows: vec![FlowMap::Exact, FlowMap::Exact],
        })
    }

    pub fn from_map(p: &ParamMap) -> Result<Self> {
        check_keys("gbm", p, KEYS)?;
        Self::new(
            param(p, "mu", 0.05),
            param(p, "sigma", 0.2),
            param(p, "x0", 1.0),
            param(p, "T", 1.0),
            param(p, "power", 2.0) as i32,
        )
    }

    pub fn with_payoff(mut self, payoff: Payoff) -> Self {
        self.payoff = payoff;
        self
    }

    /// `E[X_T^p] = x0^p exp((p mu + p(p-1) sigma^2 / 2) T)`.
    pub fn moment(&self, p: i32) -> f64 {
        let pf = f64::from(p);
        self.x0.powi(p)
            * ((pf * self.mu + 0.5 * pf * (pf - 1.0) * self.sigma * self.sigma) * self.horizon)
                .exp()
    }
}

impl<R: Real> SdeModel<R> for GbmModel<R> {
    fn name(&self) -> &'static str {
        "gbm"
    }

    fn dim(&self) -> usize {
        1
    }

    fn noise_dim(&self) -> usize {
        1
    }

    fn initial_state(&self) -> Vec<R> {
        vec![R::lit(self.x0)]
    }

    fn horizon(&self) -> R {
        R::lit(self.horizon)
    }

    fn field(&self, i: usize, x: &[R], out: &mut [R]) -> Result<()> {
        out[0] = if i == 0 { self.drift } else { self.vol } * x[0];
        Ok(())
    }

    fn exact_flow(&self, i: usize, t: R, x: &mut [R]) -> Result<()> {
        let rate = if i == 0 { self.drift } else { self.vol };
        x[0] = x[0] * (rate * t).exp();
        Ok(())
    }

    fn admissible(&self, x: &[R]) -> bool {
        x[0].is_finite()
    }

    fn payoff(&self) -> &Payoff {
        &self.payoff
    }

    fn flow_maps(&self) -> &[FlowMap<R>] {
        &self.flows
    }

    fn set_flow_map(&mut self, i: usize, flow: FlowMap<R>) -> Result<()> {
        *self
            .flows
            .get_mut(i)
            .ok_or_else(|| Error::Parameter(format!("gbm has no field {i}")))? = flow;
        Ok(())
    }

    fn exact_expectation(&self) -> Option<f64> {
        match self.payoff {
            Payoff::Power(p) => Some(self.moment(p)),
            _ => None,
        }
    }
}
