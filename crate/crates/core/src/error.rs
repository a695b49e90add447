use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value object was constructed with parameters that break its invariants.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The dual program has more equality constraints than variables.
    #[error("negative degree of difficulty ({degree}); the dual program is overdetermined")]
    NegativeDegreeOfDifficulty { degree: i64 },

    /// The primal-dual relations could not pin down every variable.
    #[error("degenerate primal recovery: rank {rank} < {vars} variables (residual {residual:.3e})")]
    DegenerateRecovery { rank: usize, vars: usize, residual: f64 },

    #[error("dual program is infeasible: {0}")]
    DualInfeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{context}: {message}")]
    Parse { context: String, message: String },
}
