use std::fmt;

use vaxstock_core::Error;

/// Process exit codes.
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_NONCONVERGENCE: u8 = 4;
const EXIT_INTERNAL: u8 = 1;

#[derive(Debug)]
pub struct CliError {
    pub exit_code: u8,
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            exit_code: EXIT_USAGE,
            code: "invalid_input",
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            exit_code: EXIT_DATA,
            code: "data_error",
            message: message.into(),
        }
    }

    pub fn internal(err: impl fmt::Display) -> Self {
        Self {
            exit_code: EXIT_INTERNAL,
            code: "internal",
            message: err.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let (exit_code, code) = match &err {
            Error::InvalidInput(_) => (EXIT_USAGE, "invalid_input"),
            Error::Io { .. } => (EXIT_DATA, "io"),
            Error::Csv(_) | Error::MissingColumn(_) | Error::Parse { .. } => {
                (EXIT_DATA, "malformed_data")
            }
            Error::UnknownLocation { .. } => (EXIT_DATA, "unknown_location"),
            Error::DegenerateSeries(_) => (EXIT_DATA, "degenerate_series"),
            Error::Infeasible(_) => (EXIT_DATA, "infeasible"),
            Error::NonConvergence { .. } => (EXIT_NONCONVERGENCE, "non_convergence"),
        };
        Self {
            exit_code,
            code,
            message: err.to_string(),
        }
    }
}
