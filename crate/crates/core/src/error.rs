use thiserror::Error;

/// Errors raised by the harmonic balance toolkit.
#[derive(Debug, Error)]
pub enum HbError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("collocation count M = {m} is below 2N+1 = {required}; E would be rank deficient")]
    RankDeficient { m: usize, required: usize },

    #[error("polynomial degree {found} exceeds the declared degree of nonlinearity {declared}")]
    DegreeExceeded { found: u32, declared: u32 },

    #[error(
        "system `{0}` is not polynomial; use a recast system or an explicit collocation count"
    )]
    NonPolynomial(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("step size underflow at t = {t} (h = {h:e}); the problem looks stiff")]
    StepUnderflow { t: f64, h: f64 },

    #[error("no root bracketed: {0}")]
    NoBracket(String),

    #[error("singular configuration: {0}")]
    Singularity(String),
}

pub type Result<T> = std::result::Result<T, HbError>;
