use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid kernel parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluation error at u = {at}: {message}")]
    Evaluation { at: f64, message: String },

    #[error("degenerate measure: total mass {0}")]
    DegenerateMeasure(f64),

    #[error("incompatible measures: {0}")]
    IncompatibleMeasures(String),

    #[error("zero likelihood for observation x = {x} (denominator {denominator:e}{})",
        .iteration.map(|i| format!(", iteration {i}")).unwrap_or_default())]
    ZeroLikelihood {
        x: f64,
        denominator: f64,
        iteration: Option<usize>,
    },

    #[error("no observations left after dropping {dropped} outside the model support")]
    EmptyData { dropped: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("input is not non-increasing: derivative {derivative:e} at x = {at}")]
    NonMonotone { at: f64, derivative: f64 },

    #[error("degenerate truth: {0}")]
    DegenerateTruth(String),

    #[error("input error{}: {message}", .line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Input {
        line: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn input(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Input {
            line,
            message: msg.into(),
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => 2,
            Error::Input { .. } | Error::Io(_) | Error::Json(_) | Error::EmptyData { .. } => 3,
            _ => 1,
        }
    }
}
