use super::{param, ParamMap, Payoff, SdeModel};
use crate::error::{Error, Result};
use crate::ode_flows::{ButcherTableau, FlowMap};
use crate::scalar::Real;

pub(super) const KEYS: &[&str] = &[
    "mu",
    "alpha",
    "beta",
    "theta_vol",
    "rho",
    "x1",
    "x2",
    "T",
    "K",
];

/// Heston dynamics with the running integral of the price as third state:
/// `dS = mu S dt + S sqrt(v) dW_1`,
/// `dv = alpha (theta - v) dt + beta sqrt(v) (rho dW_1 + sqrt(1 - rho^2) dW_2)`,
/// `dI = S dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct HestonParams {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta_vol: f64,
    pub rho: f64,
    pub x1: f64,
    pub x2: f64,
    pub horizon: f64,
    pub strike: f64,
}

impl Default for HestonParams {
    /// The benchmark: T=1, K=1.05, mu=0.05, alpha=2, beta=0.1, theta=0.09,
    /// rho=0, x=(1, 0.09).
    fn default() -> Self {
        Self {
            mu: 0.05,
            alpha: 2.0,
            beta: 0.1,
            theta_vol: 0.09,
            rho: 0.0,
            x1: 1.0,
            x2: 0.09,
            horizon: 1.0,
            strike: 1.05,
        }
    }
}

impl HestonParams {
    pub fn from_map(p: &ParamMap) -> Self {
        let d = Self::default();
        Self {
            mu: param(p, "mu", d.mu),
            alpha: param(p, "alpha", d.alpha),
            beta: param(p, "beta", d.beta),
            theta_vol: param(p, "theta_vol", d.theta_vol),
            rho: param(p, "rho", d.rho),
            x1: param(p, "x1", d.x1),
            x2: param(p, "x2", d.x2),
            horizon: param(p, "T", d.horizon),
            strike: param(p, "K", d.strike),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let feller = 2.0 * self.alpha * self.theta_vol - self.beta * self.beta;
        if feller <= 0.0 {
            return Err(Error::Parameter(format!(
                "Feller condition 2 alpha theta - beta^2 > 0 fails ({feller})"
            )));
        }
        if self.rho.abs() > 1.0 {
            return Err(Error::Parameter(format!(
                "|rho| = {} exceeds 1",
                self.rho.abs()
            )));
        }
        if self.x1 <= 0.0 || self.x2 <= 0.0 || self.horizon <= 0.0 {
            return Err(Error::Parameter(
                "x1, x2 and T must be positive".to_string(),
            ));
        }
        Ok(())
    }
}

/// Order-7 steps per drift flow. The variance relaxes at rate `alpha`; a
/// single step with `alpha h = 1` leaves `|v - theta| (alpha h)^8 / 8!`,
/// about 3e-8 at the benchmark start. Six steps keep flows up to `T/2`
/// within 1e-10 for variances up to 0.3.
pub const DRIFT_SUBSTEPS: usize = 6;

#[derive(Clone, Debug)]
pub struct HestonModel<R> {
    params: HestonParams,
    payoff: Payoff,
    flows: Vec<FlowMap<R>>,
}

impl<R: Real> HestonModel<R> {
    /// Drift flow by the shipped order-7 tableau; the diffusion flows are
    /// exact when `rho = 0` and numeric otherwise.
    pub fn new(params: HestonParams) -> Result<Self> {
        params.validate()?;
        let rk7 = FlowMap::numeric(
            ButcherTableau::shipped("extrapolated_euler7")?,
            DRIFT_SUBSTEPS,
        );
        let diffusion = if params.rho == 0.0 {
            FlowMap::Exact
        } else {
            rk7.clone()
        };
        Ok(Self {
            payoff: Payoff::AsianCall {
                horizon: params.horizon,
                strike: params.strike,
            },
            params,
            flows: vec![rk7, diffusion.clone(), diffusion],
        })
    }

    pub fn params(&self) -> &HestonParams {
        &self.params
    }

    fn variance_root(x2: R) -> Result<R> {
        if x2 > R::zero() {
            Ok(x2.sqrt())
        } else {
            Err(Error::Inadmissible(format!(
                "variance {x2} is not positive"
            )))
        }
    }
}

impl<R: Real> SdeModel<R> for HestonModel<R> {
    fn name(&self) -> &'static str {
        "heston"
    }

    fn dim(&self) -> usize {
        3
    }

    fn noise_dim(&self) -> usize {
        2
    }

    fn initial_state(&self) -> Vec<R> {
        vec![R::lit(self.params.x1), R::lit(self.params.x2), R::zero()]
    }

    fn horizon(&self) -> R {
        R::lit(self.params.horizon)
    }

    fn field(&self, i: usize, y: &[R], out: &mut [R]) -> Result<()> {
        let p = &self.params;
        let l = R::lit;
        let root = Self::variance_root(y[1])?;
        match i {
            0 => {
                out[0] = y[0] * (l(p.mu) - y[1] / l(2.0) - l(p.rho * p.beta / 4.0));
                out[1] = l(p.alpha) * (l(p.theta_vol) - y[1]) - l(p.beta * p.beta / 4.0);
                out[2] = y[0];
            }
            1 => {
                out[0] = y[0] * root;
                out[1] = l(p.rho * p.beta) * root;
                out[2] = R::zero();
            }
            2 => {
                out[0] = R::zero();
                out[1] = l(p.beta * (1.0 - p.rho * p.rho).sqrt()) * root;
                out[2] = R::zero();
            }
            _ => return Err(Error::Parameter(format!("heston has no field {i}"))),
        }
        Ok(())
    }

    /// `exp(t V_1)`: `x1 -> x1 e^{t sqrt(x2)}`; `exp(t V_2)`:
    /// `x2 -> (beta t / 2 + sqrt(x2))^2`. Only for `rho = 0`. When
    /// `beta t / 2 + sqrt(x2) < 0` the variance is clamped to 0 and the path
    /// is flagged.
    fn exact_flow(&self, i: usize, t: R, x: &mut [R]) -> Result<()> {
        if self.params.rho != 0.0 || i == 0 || i > 2 {
            return Err(Error::Parameter(format!(
                "heston has no closed-form flow for field {i} at rho={}",
                self.params.rho
            )));
        }
        if x[1] < R::zero() {
            return Err(Error::Inadmissible(format!(
                "variance {} is negative",
                x[1]
            )));
        }
        let root = x[1].sqrt();
        if i == 1 {
            x[0] = x[0] * (t * root).exp();
        } else {
            let s = R::lit(self.params.beta / 2.0) * t + root;
            if s < R::zero() {
                x[1] = R::zero();
                return Err(Error::Inadmissible(format!(
                    "variance flow crossed zero (beta t/2 + sqrt(v) = {s})"
                )));
            }
            x[1] = s * s;
        }
        Ok(())
    }

    fn admissible(&self, x: &[R]) -> bool {
        x[1] > R::zero() && x.iter().all(|v| v.is_finite())
    }

    fn payoff(&self) -> &Payoff {
        &self.payoff
    }

    fn flow_maps(&self) -> &[FlowMap<R>] {
        &self.flows
    }

    fn set_flow_map(&mut self, i: usize, flow: FlowMap<R>) -> Result<()> {
        if matches!(flow, FlowMap::Exact) && (i == 0 || self.params.rho != 0.0) {
            return Err(Error::Parameter(format!(
                "heston field {i} has no closed-form flow here"
            )));
        }
        *self
            .flows
            .get_mut(i)
            .ok_or_else(|| Error::Parameter(format!("heston has no field {i}")))? = flow;
        Ok(())
    }
}
