use thiserror::Error;

/// Failures of a command, split by exit code: usage and configuration
/// problems exit with 2, numerical failures during a run with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("run failed: {0}")]
    Run(#[from] neumann_core::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub(crate) fn config(e: neumann_core::Error) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(_) => 1,
            _ => 2,
        }
    }
}
