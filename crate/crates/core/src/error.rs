use thiserror::Error;

/// Which of the two densities an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Rho,
    Eta,
}

impl std::fmt::Display for Species {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Species::Rho => f.write_str("rho"),
            Species::Eta => f.write_str("eta"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `b/sqrt(eps)` hit a multiple of pi, where the cotangent terms blow up.
    #[error("pole: {0}")]
    Pole(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("step rejected: {species} cell {cell} became {value:e}")]
    StepRejected {
        species: Species,
        cell: usize,
        value: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
