//! Scenario files, output formatting and subcommand implementations for the
//! `lifi-link` binary.

pub mod commands;
pub mod config;
pub mod output;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] lifi_core::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub const EXIT_CONFIG: u8 = 2;
    pub const EXIT_VALIDATION: u8 = 1;
}
