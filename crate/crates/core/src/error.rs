use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("kernel `{0}` must be nonzero")]
    ZeroKernel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid with {steps} steps cannot resolve dyadic level requiring {required} steps")]
    GridTooCoarse { required: usize, steps: usize },

    #[error("non-finite functional value at sample {sample} (seed {seed}, stream {stream})")]
    NonFinite { sample: usize, seed: u64, stream: u64 },

    #[error("overflow evaluating exponential term {0}")]
    Overflow(usize),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("malformed literal: {0}")]
    Literal(String),
}
