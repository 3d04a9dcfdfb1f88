use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid misreport scale for user {user}: {scale}")]
    Scale { user: usize, scale: f64 },
    #[error("misreporter count {k_m} exceeds user count {k}")]
    Count { k_m: usize, k: usize },
    #[error("range error: {0}")]
    Range(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("singular channel block: {0}")]
    SingularMatrix(String),
    #[error("quadrature did not converge: estimated relative error {estimate:e}")]
    Quadrature { estimate: f64 },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no result rows to emit")]
    EmptyRows,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::SingularMatrix(_) | Error::Quadrature { .. })
    }

    /// Errors caused by an invalid configuration or argument.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_)
                | Error::Domain(_)
                | Error::Scale { .. }
                | Error::Count { .. }
                | Error::Range(_)
                | Error::Regime(_)
                | Error::UnknownPreset(_)
                | Error::Config(_)
        )
    }
}
