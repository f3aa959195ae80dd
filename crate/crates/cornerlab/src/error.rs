use std::fmt;

/// Named spectral-gap assumptions.
///
/// `Sgc1` is the two-face condition of a codimension-two corner (both
/// half-plane compressions invertible, which includes the bulk). `Sgc2` is the
/// codimension-k version: every face compression `H_i` invertible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    Sgc1,
    Sgc2,
    /// Spectrum of H meets both half-lines; required for the AI/AII recipe.
    BothSigns,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assumption::Sgc1 => write!(f, "sgc1"),
            Assumption::Sgc2 => write!(f, "sgc2"),
            Assumption::BothSigns => write!(f, "spectrum-both-signs"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("malformed model: {0}")]
    Model(String),
    #[error("symmetry relation violated: {0}")]
    Symmetry(String),
    #[error("classification error: {0}")]
    Classification(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("slope ordering: {0}")]
    Ordering(String),
    #[error("window too small: {0}")]
    Window(String),
    #[error("assumption {assumption} violated: {detail}")]
    Assumption { assumption: Assumption, detail: String },
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("inconsistent result: {0}")]
    Inconsistent(String),
    #[error("linear algebra failure: {0}")]
    Numerical(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn assumption(assumption: Assumption, detail: impl Into<String>) -> Self {
        Error::Assumption { assumption, detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
