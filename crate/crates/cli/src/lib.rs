// SPDX-License-Identifier: Apache-2.0

//! The `kakeya` command line driver.

pub mod commands;
pub mod format;
pub mod suite;

pub use commands::{execute, Cli};

/// Exit status 2 for usage and config problems, 1 for failed assertions.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<kakeya_sim::SimError> for CliError {
    fn from(e: kakeya_sim::SimError) -> Self {
        if e.is_config() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Failure(e.to_string())
        }
    }
}
