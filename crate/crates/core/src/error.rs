use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("rho family is unbounded and has no kernel counterpart")]
    NonKernelConvertible,

    #[error("median absolute deviation is zero; scale is degenerate")]
    DegenerateScale,

    #[error("projected scale is zero along principal axes {axes:?}")]
    DegenerateAxisScale { axes: Vec<usize> },

    #[error("need at least {needed} observations, got {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}{}", line_suffix(*.line))]
    DimensionMismatch {
        expected: usize,
        found: usize,
        line: Option<usize>,
    },

    #[error("dimension {0} exceeds the supported maximum of {max}", max = crate::pca::MAX_DIMENSION)]
    DimensionTooLarge(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn line_suffix(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" at line {l}"),
        None => String::new(),
    }
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateScale
            | Error::DegenerateAxisScale { .. }
            | Error::NotSymmetric { .. }
            | Error::InsufficientData { .. } => 3,
            Error::Io(_) => 4,
            _ => 2,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
