use thiserror::Error;

use crate::config::ConfigError;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: adiabat::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use adiabat::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Verification(_) => EXIT_VERIFICATION,
            CliError::Core { source, .. } => match source {
                E::InvalidParameter { .. } | E::UnsupportedCutoff(_) | E::SingularGap { .. } => EXIT_CONFIG,
                E::NoConvergence { .. }
                | E::OutsideContinuation { .. }
                | E::StepTooLarge { .. }
                | E::UnitarityLost { .. } => EXIT_NO_CONVERGENCE,
                _ => EXIT_FAILURE,
            },
            _ => EXIT_FAILURE,
        }
    }
}

pub trait Context<T> {
    fn context(self, what: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for adiabat::Result<T> {
    fn context(self, what: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            context: what.to_string(),
            source,
        })
    }
}
