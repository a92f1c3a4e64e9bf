use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum EnvlocError {
    #[error("invalid lattice domain: {0}")]
    Domain(String),

    #[error("invalid model specification: {0}")]
    Model(String),

    #[error("disorder field is missing site {site:?} required by the potential restriction")]
    MissingDisorderSite { site: Vec<i64> },

    #[error("envelope witness violated at x = {point:?}: gamma(x)|x|^2 = {lhs:.6e} < F(|x|) = {rhs:.6e}")]
    WitnessViolated { point: Vec<f64>, lhs: f64, rhs: f64 },

    #[error("invalid witness function: {0}")]
    Witness(String),

    #[error("spectral computation failed: {0}")]
    Spectral(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("decay fit refused: {0}")]
    FitRefused(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("resource budget exceeded: {0}")]
    Budget(String),

    #[error("run directory error: {0}")]
    RunDir(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, EnvlocError>;
