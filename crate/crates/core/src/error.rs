use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("word budget exceeded: {required} words needed, budget is {budget}")]
    WordBudget { required: u128, budget: u128 },

    #[error("non-finite value in Runge-Kutta stage {stage}")]
    NumericFailure { stage: usize },

    #[error("inadmissible state: {0}")]
    Inadmissible(String),

    #[error("order estimate inconclusive: {usable} usable points, need at least 3")]
    Inconclusive { usable: usize },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("point source needs {required} dimensions, supports {supported}")]
    DimensionOverflow { required: usize, supported: usize },

    #[error("sobol sequence exhausted at index {0}")]
    SobolExhausted(u64),

    #[error("path aborted at theta={theta}, step {step}, field {field}: {cause}")]
    PathAbort {
        theta: u32,
        step: usize,
        field: usize,
        cause: String,
    },

    #[error("{aborted} of {total} paths aborted, above the 0.1% limit")]
    TooManyAborts { aborted: u64, total: u64 },

    #[error("evaluation budget exceeded: {0}")]
    Budget(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
