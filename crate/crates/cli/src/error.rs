use annulus_core::Error;

/// Exit codes: 0 success, 1 other failure, 2 input, 3 singular operator,
/// 4 class membership, 5 ambiguous tolerance decision.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Io(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e {
                Error::Singular { .. } => 3,
                Error::NotMember { .. }
                | Error::NotDoublyCommuting { .. }
                | Error::SpectrumOutsideBand { .. }
                | Error::NeedsSnapping { .. }
                | Error::RestrictionFailed { .. } => 4,
                Error::ClusterAmbiguity { .. } => 5,
                Error::BadLength { .. }
                | Error::NotSquare { .. }
                | Error::NonFinite { .. }
                | Error::DimensionMismatch { .. }
                | Error::InvalidRadius(_)
                | Error::InvalidTolerance(_)
                | Error::InvalidParameter(_)
                | Error::EmptyTuple
                | Error::InvalidNodeCount(_)
                | Error::PowerTooLarge(_)
                | Error::WordTooLong(_) => 2,
                _ => 1,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "input",
            3 => "singular",
            4 => "membership",
            5 => "ambiguity",
            _ => "failure",
        }
    }
}

impl core::fmt::Display for CliError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
