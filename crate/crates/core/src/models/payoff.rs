use crate::scalar::Real;

/// Functionals `g(X_T)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Payoff {
    /// `max(x_3 / T - K, 0)` on the running-integral component.
    AsianCall { horizon: f64, strike: f64 },
    /// `x_0^p`.
    Power(i32),
    /// `sum c_k g_k`.
    Combination(Vec<(f64, Payoff)>),
}

/// `max(x3 / T - K, 0)`.
pub fn asian_call_payoff(x3: f64, horizon: f64, strike: f64) -> f64 {
    (x3 / horizon - strike).max(0.0)
}

impl Payoff {
    pub fn eval<R: Real>(&self, x: &[R]) -> f64 {
        match self {
            Payoff::AsianCall { horizon, strike } => {
                asian_call_payoff(x[2].to_f64_lossy(), *horizon, *strike)
            }
            Payoff::Power(p) => x[0].to_f64_lossy().powi(*p),
            Payoff::Combination(terms) => terms.iter().map(|(c, g)| c * g.eval(x)).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asian_call_values() {
        assert_eq!(asian_call_payoff(1.05, 1.0, 1.05), 0.0);
        assert!((asian_call_payoff(2.1, 1.0, 1.05) - 1.05).abs() < 1e-15);
        assert_eq!(asian_call_payoff(0.3, 1.0, 1.05), 0.0);
        // convex and piecewise linear in x3
        let g = |x: f64| asian_call_payoff(x, 2.0, 1.0);
        for (a, b) in [(0.0, 4.0), (1.0, 3.0), (2.5, 6.0)] {
            assert!(g(0.5 * (a + b)) <= 0.5 * (g(a) + g(b)) + 1e-15);
        }
        assert_eq!(g(3.0) - g(2.5), g(3.5) - g(3.0));
    }

    #[test]
    fn combination_is_linear() {
        let p = Payoff::Combination(vec![(2.0, Payoff::Power(1)), (-0.5, Payoff::Power(2))]);
        assert_eq!(p.eval(&[3.0f64]), 2.0 * 3.0 - 0.5 * 9.0);
    }
}
