use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sfq_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("format: {0}")]
    Format(String),
}

impl CliError {
    /// Process exit code: 1 for I/O trouble, 2 for everything the user can
    /// fix by changing inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Csv(_) => 1,
            _ => 2,
        }
    }
}
