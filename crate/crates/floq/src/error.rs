use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Error, Debug)]
pub enum FloqError {
    /// Bad input data: malformed distributions, out-of-range indices,
    /// inconsistent lengths and the like.
    #[error("validation: {0}")]
    Validation(String),

    /// The requested precision cannot represent the dynamic range of the
    /// computation. Carries the number of bits the caller should retry with.
    #[error("precision exhausted: {needed} bits required, {given} given ({context})")]
    PrecisionExhausted {
        needed: u32,
        given: u32,
        context: String,
    },

    /// A spectral object could not be certified at the working precision
    /// (for example a band edge whose bracket never produced consistent
    /// eigenvalue counts).
    #[error("certification failed: {0}")]
    Certification(String),

    /// A Green-function denominator fell below the configured floor.
    #[error("near-singular restriction: |denominator| ~ 2^{log2_magnitude}")]
    NearSingular { log2_magnitude: i64 },

    /// Inverse iteration did not reach the requested residual.
    #[error("eigenvector iteration did not converge: residual {residual:e}")]
    NotConverged { residual: f64 },

    /// A continued-fraction expansion terminated, i.e. the input was
    /// rational at the working tolerance.
    #[error("rational input: continued fraction terminates after {terms} terms")]
    RationalAlpha { terms: usize },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, FloqError>;

impl FloqError {
    /// Process exit code class used by the CLI: 2 for configuration and
    /// validation problems, 3 for certification/precision failures,
    /// 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            FloqError::Validation(_) | FloqError::Config(_) | FloqError::RationalAlpha { .. } => 2,
            FloqError::PrecisionExhausted { .. }
            | FloqError::Certification(_)
            | FloqError::NearSingular { .. }
            | FloqError::NotConverged { .. } => 3,
            FloqError::Io(_) => 4,
        }
    }

    /// Machine-readable class name for error JSON emitted by the CLI.
    pub fn class(&self) -> &'static str {
        match self {
            FloqError::Validation(_) => "validation",
            FloqError::PrecisionExhausted { .. } => "precision-exhausted",
            FloqError::Certification(_) => "certification",
            FloqError::NearSingular { .. } => "near-singular",
            FloqError::NotConverged { .. } => "not-converged",
            FloqError::RationalAlpha { .. } => "rational-alpha",
            FloqError::Io(_) => "io",
            FloqError::Config(_) => "config",
        }
    }
}
