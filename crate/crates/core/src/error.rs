use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Modes with |n| <= 2 are excluded by the m-fold symmetry class.
    #[error("mode {0} is outside the admissible range |n| >= 3")]
    ExcludedMode(i64),

    #[error("kernel S(alpha) is singular at alpha = {0} (multiple of 2*pi)")]
    KernelSingularity(f64),

    #[error("invalid symmetry order m = {0}: need m >= 3")]
    InvalidSymmetryOrder(usize),

    #[error("truncation n_max = {n_max} must be a positive multiple of m = {m}")]
    InvalidTruncation { m: usize, n_max: usize },

    #[error("mode {n} is not an admissible mode for m = {m}, n_max = {n_max}")]
    ModeOutOfLattice { n: i64, m: usize, n_max: usize },

    #[error("grid of {grid} points cannot resolve n_max = {n_max} (need at least {need})")]
    GridTooSmall {
        grid: usize,
        n_max: usize,
        need: usize,
    },

    #[error("samples are not {m}-fold symmetric (residual {residual:e})")]
    SymmetryViolation { m: usize, residual: f64 },

    #[error("samples have nonzero mean {0:e}")]
    NonzeroMean(f64),

    #[error("mismatched truncations: (m = {0}, n_max = {1}) vs (m = {2}, n_max = {3})")]
    MismatchedTruncation(usize, usize, usize, usize),

    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("unsupported arity {0}")]
    UnsupportedArity(usize),

    #[error("projection onto totally degenerate tuples needs even arity, got {0}")]
    OddArity(usize),

    #[error("resonant denominator on tuple {0:?} where the multiplier is nonzero")]
    Resonance(Vec<i64>),

    #[error("no admissible tuples of arity {p} within radius {bound}")]
    EmptyDomain { p: usize, bound: i64 },

    #[error("numerical instability at t = {t}: {reason}")]
    Instability { t: f64, reason: String },

    #[error("Newton iteration failed to converge at xi = {xi} (residual {residual:e})")]
    NewtonFailure { xi: f64, residual: f64 },

    #[error("only {0} Fourier coefficients above the noise floor; need at least 4")]
    InsufficientModes(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
