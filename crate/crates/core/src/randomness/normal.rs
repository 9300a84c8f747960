use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Standard normal quantile `Phi^{-1}(u)`.
pub fn gaussian_inverse_cdf(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile needs 0 < u < 1, got {u}"
        )));
    }
    let std = Normal::standard();
    // 1 - u is exact for u >= 1/2, so the upper tail keeps full accuracy
    Ok(if u > 0.5 {
        -std.inverse_cdf(1.0 - u)
    } else {
        std.inverse_cdf(u)
    })
}

/// Standard normal distribution function.
pub fn gaussian_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}
