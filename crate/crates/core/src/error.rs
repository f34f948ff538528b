use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature did not converge after {halvings} halvings (last gap {gap:e})")]
    NonConvergence { halvings: u32, gap: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("precision exhausted at {bits} bits without stabilizing to {digits} digits")]
    PrecisionExhausted { bits: u32, digits: u32 },

    #[error("moment recurrence violated at k = {k} (relative residual {residual:e})")]
    RecurrenceViolation { k: i64, residual: f64 },

    #[error("moment matrix is not positive definite at pivot {0}")]
    NotPositiveDefinite(usize),

    #[error("degree {n} exceeds table bound {n_max}")]
    IndexError { n: usize, n_max: usize },

    #[error("denominator vanished at degree {0}")]
    DegenerateDenominator(usize),

    #[error("eigenvalue bisection failed: {0}")]
    EigenFailure(String),

    #[error("t-grid refinement gap {gap:e} exceeds tolerance {tolerance:e}")]
    GridTooCoarse { gap: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
