use alpha_patch::Error;

pub const OK: i32 = 0;
pub const NUMERICAL: i32 = 2;
pub const USAGE: i32 = 64;
pub const DATA: i32 = 65;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => USAGE,
            CliError::Data(_) => DATA,
            CliError::Numerical(_) => NUMERICAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let m = e.to_string();
        match e {
            Error::UnsupportedRegime(_) | Error::InvalidSpec(_) | Error::OutOfBand { .. } => CliError::Usage(m),
            Error::InvalidData(_) | Error::Format(_) | Error::Io(_) => CliError::Data(m),
            Error::Degenerate(_)
            | Error::Bracket { .. }
            | Error::Ambiguous(_)
            | Error::StepRejected { .. }
            | Error::Fit(_) => CliError::Numerical(m),
        }
    }
}

impl From<alpha_patch::curve_geometry::GeometryError> for CliError {
    fn from(e: alpha_patch::curve_geometry::GeometryError) -> Self {
        Error::from(e).into()
    }
}
