//! Exact free-algebra checks for the schemes with levels `1..=m`.

use num_rational::BigRational;
use sdefw_core::extrapolation::solve_weights;
use sdefw_core::free_algebra::{
    bch_antisymmetry_check, critical_check, fujiwara_expansion_check, order_condition_check,
    parity_check, AlgebraDims, CheckOutcome,
};

use crate::error::{CliError, Result};

/// Largest level count the suite accepts.
pub const MAX_M: usize = 6;

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub outcomes: Vec<CheckOutcome>,
    /// Checks left out because the truncation degree is too low.
    pub skipped: Vec<String>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }

    /// One `CHECK ...` line per outcome.
    pub fn lines(&self) -> String {
        self.outcomes.iter().map(|o| format!("{o}\n")).collect()
    }
}

pub fn verify_algebra(m: usize, d: usize, degree: usize) -> Result<VerifyReport> {
    if !(1..=MAX_M).contains(&m) {
        return Err(CliError::usage("m", format!("must lie in 1..={MAX_M}")));
    }
    if d == 0 || degree == 0 {
        return Err(CliError::usage("d", "d and degree must be positive"));
    }
    let thetas: Vec<u32> = (1..=m as u32).collect();
    let scheme = solve_weights::<BigRational>(&thetas)?;
    let dims = AlgebraDims::new(d, degree)?;
    let mut report = VerifyReport::default();
    if degree >= 2 * m {
        report.outcomes.push(order_condition_check(&scheme, dims)?);
    } else {
        report
            .skipped
            .push(format!("order_condition (needs D >= {})", 2 * m));
    }
    for l in 2..m {
        if degree >= 2 * m + l - 1 {
            report.outcomes.push(critical_check(&scheme, l, dims)?);
        } else {
            report
                .skipped
                .push(format!("critical_l{l} (needs D >= {})", 2 * m + l - 1));
        }
    }
    report.outcomes.push(parity_check(&scheme, dims)?);
    report
        .outcomes
        .push(fujiwara_expansion_check::<BigRational>(dims)?);
    report
        .outcomes
        .push(bch_antisymmetry_check::<BigRational>(dims)?);
    Ok(report)
}
