use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid digit ({m}, {eps:+}) for algorithm {algo}")]
    InvalidDigit { algo: char, m: String, eps: i8 },

    #[error("pole: denominator vanishes at x = {0}")]
    Pole(String),

    #[error("no table entry for digit ({m}, {eps:+})")]
    MissingTableEntry { m: String, eps: i8 },

    #[error("transfer operator diverges at (s, w) = ({sigma}, {nu}): {reason}")]
    Divergence { sigma: f64, nu: f64, reason: String },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("discretization too coarse: {0}")]
    Discretization(String),

    #[error("numerical inconsistency: {0}")]
    Inconsistency(String),

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("degenerate smoothing window for N = {n}, gamma = {gamma}")]
    DegenerateWindow { n: u64, gamma: f64 },

    #[error("degenerate variance: the cost does not fluctuate")]
    DegenerateVariance,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
