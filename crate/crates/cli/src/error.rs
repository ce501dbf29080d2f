use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] tasep_core::Error),
    #[error("output error: {0}")]
    Output(String),
    #[error("verification failed")]
    VerifyFailed,
}

impl CliError {
    /// 1 verification failure, 2 bad input, 3 quadrature did not converge.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFailed => 1,
            CliError::Core(tasep_core::Error::NotConverged { .. }) => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
