use thiserror::Error;

use crate::curve_geometry::GeometryError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("degenerate curve: {0}")]
    Degenerate(String),
    #[error("bracket error: gap({lo}) = {gap_lo:.6e}, gap({hi}) = {gap_hi:.6e} have the same sign")]
    Bracket { lo: f64, hi: f64, gap_lo: f64, gap_hi: f64 },
    #[error("block q = {q} is not resolvable on N = {n}")]
    OutOfBand { q: i32, n: usize },
    #[error("ambiguous nearest boundary point: {0}")]
    Ambiguous(String),
    #[error("step rejected at t = {t:.6e}: {reason}")]
    StepRejected { t: f64, reason: String },
    #[error("fit error: {0}")]
    Fit(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("data format error: {0}")]
    Format(String),
}

impl From<GeometryError> for Error {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::Degenerate(s) => Error::Degenerate(s),
            GeometryError::InvalidSpec(s) => Error::InvalidSpec(s),
            GeometryError::Io(e) => Error::Io(e),
            GeometryError::Format(s) => Error::Format(s),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
