use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Arguments violate an operation's preconditions.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("graph generation failed after {restarts} restarts (n={n}, d={d})")]
    Generation { n: usize, d: usize, restarts: usize },
    #[error("model configuration error: {0}")]
    Config(String),
    #[error("exact max-cut refused: n={n} exceeds the cap of {cap}")]
    OracleTooLarge { n: usize, cap: usize },
    #[error("rounded cut {cut} violates the GW bound against relaxation value {relax}")]
    GuaranteeViolation { cut: u64, relax: f64 },
    #[error("non-finite loss at step {step}: {detail}")]
    NonFinite { step: usize, detail: String },
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
