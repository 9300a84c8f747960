use super::{check_keys, param, ParamMap, Payoff, SdeModel};
use crate::error::{Error, Result};
use crate::ode_flows::FlowMap;
use crate::scalar::Real;

pub(super) const KEYS: &[&str] = &["kappa", "sigma", "x0", "T", "power"];

/// `V_0 = -kappa x`, `V_1 = sigma sqrt(1 + x^2)`.
///
/// The two fields do not commute, so splitting has a genuine discretization
/// error, yet both flows and the first two moments are explicit:
/// `exp(t V_1)(x) = sinh(asinh x + sigma t)`, the Ito drift is
/// `(sigma^2/2 - kappa) x`, and `m_2' = (2 sigma^2 - 2 kappa) m_2 + sigma^2`.
#[derive(Clone, Debug)]
pub struct SinhModel<R> {
    kappa: f64,
    sigma: f64,
    x0: f64,
    horizon: f64,
    payoff: Payoff,
    flows: Vec<FlowMap<R>>,
}

impl<R: Real> SinhModel<R> {
    pub fn new(kappa: f64, sigma: f64, x0: f64, horizon: f64, power: i32) -> Result<Self> {
        if sigma < 0.0 || !(1..=2).contains(&power) || horizon <= 0.0 {
            return Err(Error::Parameter(format!(
                "sinh model needs sigma >= 0, T > 0, power 1 or 2 (sigma={sigma}, T={horizon}, power={power})"
            )));
        }
        Ok(Self {
            kappa,
            sigma,
            x0,
            horizon,
            payoff: Payoff::Power(power),
            flows: vec![FlowMap::Exact, FlowMap::Exact],
        })
    }

    pub fn from_map(p: &ParamMap) -> Result<Self> {
        check_keys("sinh", p, KEYS)?;
        Self::new(
            param(p, "kappa", 1.0),
            param(p, "sigma", 0.5),
            param(p, "x0", 0.5),
            param(p, "T", 1.0),
            param(p, "power", 2.0) as i32,
        )
    }

    pub fn with_payoff(mut self, payoff: Payoff) -> Self {
        self.payoff = payoff;
        self
    }

    /// `E[X_T^p]` for `p` in {1, 2}.
    pub fn moment(&self, p: i32) -> f64 {
        let (k, s, t, x) = (self.kappa, self.sigma, self.horizon, self.x0);
        match p {
            1 => x * ((0.5 * s * s - k) * t).exp(),
            2 => {
                let c = 2.0 * s * s - 2.0 * k;
                if c.abs() < 1e-300 {
                    x * x + s * s * t
                } else {
                    (x * x + s * s / c) * (c * t).exp() - s * s / c
                }
            }
            _ => f64::NAN,
        }
    }
}

impl<R: Real> SdeModel<R> for SinhModel<R> {
    fn name(&self) -> &'static str {
        "sinh"
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
        out[0] = if i == 0 {
            -R::lit(self.kappa) * x[0]
        } else {
            R::lit(self.sigma) * (R::one() + x[0] * x[0]).sqrt()
        };
        Ok(())
    }

    fn exact_flow(&self, i: usize, t: R, x: &mut [R]) -> Result<()> {
        x[0] = if i == 0 {
            x[0] * (-R::lit(self.kappa) * t).exp()
        } else {
            (x[0].asinh() + R::lit(self.sigma) * t).sinh()
        };
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
            .ok_or_else(|| Error::Parameter(format!("sinh model has no field {i}")))? = flow;
        Ok(())
    }

    fn exact_expectation(&self) -> Option<f64> {
        match self.payoff {
            Payoff::Power(p) => Some(self.moment(p)),
            _ => None,
        }
    }
}
