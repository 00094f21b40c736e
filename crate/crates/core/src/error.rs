use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a numeric function.
    #[error("{field}: {message}")]
    Domain { field: &'static str, message: String },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("unbalanced design: {0}")]
    Unbalanced(String),

    #[error("missing cell: {0}")]
    MissingCell(String),

    /// Zero within-cell variance leaves every F statistic undefined.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("incomplete family: {0}")]
    IncompleteFamily(String),

    #[error("continued fraction failed to converge for x={x}, a={a}, b={b}")]
    NonConvergence { x: f64, a: f64, b: f64 },

    #[error("invalid p-value vector: {0}")]
    InvalidPValues(String),

    #[error("method `{0}` does not define adjusted p-values")]
    UnsupportedMethod(String),

    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::DegenerateData(_) | Error::NonConvergence { .. })
    }

    /// Short stable identifier, used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::InvalidDesign(_) => "invalid_design",
            Error::InvalidFamily(_) => "invalid_family",
            Error::Unbalanced(_) => "unbalanced_design",
            Error::MissingCell(_) => "missing_cell",
            Error::DegenerateData(_) => "degenerate_data",
            Error::IncompleteFamily(_) => "incomplete_family",
            Error::NonConvergence { .. } => "non_convergence",
            Error::InvalidPValues(_) => "invalid_p_values",
            Error::UnsupportedMethod(_) => "unsupported_method",
            Error::InvalidSimConfig(_) => "invalid_sim_config",
        }
    }
}

pub(crate) fn domain(field: &'static str, message: impl Into<String>) -> Error {
    Error::Domain {
        field,
        message: message.into(),
    }
}
