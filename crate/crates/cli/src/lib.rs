//! Batch front end for `qdlab`: configuration handling, commands and report rendering.

pub mod commands;
pub mod config;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad configuration file or an invalid model.
    #[error("configuration error: {0}")]
    Config(String),
    /// A numerical check that should hold did not.
    #[error("check failed: {0}")]
    Physics(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Physics(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<qdlab::Error> for CliError {
    fn from(err: qdlab::Error) -> Self {
        match err {
            qdlab::Error::Consistency(_) | qdlab::Error::OutsideGroundSector => {
                CliError::Physics(err.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}
