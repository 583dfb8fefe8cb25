use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{file}:{line}: `{field}`: {message}")]
    Config {
        file: String,
        line: usize,
        field: String,
        message: String,
    },

    #[error("cannot read {}: {message}", path.display())]
    Input { path: PathBuf, message: String },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Solver(phaseshift::Error),

    #[error("cannot write {}: {message}", path.display())]
    Output { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Input { .. } | CliError::Invalid(_) => 2,
            CliError::Solver(_) | CliError::Output { .. } => 3,
        }
    }
}

impl From<phaseshift::Error> for CliError {
    /// Malformed inputs are validation errors; everything else failed while
    /// computing.
    fn from(e: phaseshift::Error) -> Self {
        use phaseshift::Error::*;
        match e {
            InvalidPotential(_) | InvalidWavenumber(_) | DegenerateTarget { .. } | InvalidParameter(_) => {
                CliError::Invalid(e.to_string())
            }
            _ => CliError::Solver(e),
        }
    }
}
