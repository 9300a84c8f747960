//! Extrapolated Ninomiya-Victoir splitting schemes for the weak
//! approximation of Stratonovich SDEs, with the exact free-algebra checks
//! behind their order conditions.

pub mod error;
pub mod extrapolation;
pub mod free_algebra;
pub mod models;
pub mod numerics;
pub mod ode_flows;
pub mod quadrature;
pub mod randomness;
pub mod scalar;
pub mod scheme_engine;

use num_rational::BigRational;

pub use error::{Error, Result};
pub use extrapolation::SchemeSpec;
pub use models::SdeModel;
pub use scalar::{Coefficient, Real};

/// Exact truncated series over the rationals.
pub type ExactSeries = free_algebra::TruncatedSeries<BigRational>;
/// Scheme with exact rational weights.
pub type ExactScheme = SchemeSpec<BigRational>;
pub type Scheme64 = SchemeSpec<f64>;
pub type Tableau64 = ode_flows::ButcherTableau<f64>;
pub type Heston64 = models::HestonModel<f64>;
pub type Gbm64 = models::GbmModel<f64>;
pub type Sinh64 = models::SinhModel<f64>;
