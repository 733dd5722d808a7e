use thiserror::Error;

/// CLI failure, mapped one-to-one onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("feasibility error: {0}")]
    Feasibility(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Feasibility(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl From<jdai::Error> for CliError {
    fn from(e: jdai::Error) -> Self {
        use jdai::Error as E;
        match e {
            E::Feasibility { .. } => CliError::Feasibility(e.to_string()),
            E::Convergence { .. } => CliError::Runtime(e.to_string()),
            E::Parameter(_) | E::Input(_) | E::Configuration(_) | E::Mapping(_) | E::Graph(_) => {
                CliError::Config(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
