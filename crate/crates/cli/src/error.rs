use maxlab_core::MaxlabError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Core(#[from] MaxlabError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            // core input errors come from the configuration as well
            CliError::Core(MaxlabError::InvalidInput(_) | MaxlabError::Inadmissible(_) | MaxlabError::Cfl { .. }) => 2,
            CliError::Invariant(_) => 3,
            _ => 1,
        }
    }
}
