use std::path::Path;

use lowfault_core::classifier::ClassifierError;
use lowfault_core::config::ConfigError;
use lowfault_core::evaluation::EvaluationError;
use lowfault_core::mining::MiningError;
use lowfault_core::pipeline;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation: flags, config values.
    #[error("{0}")]
    Usage(String),
    /// Input that cannot be used: unreadable, malformed, or rejected by a stage.
    #[error("{0}")]
    Data(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn write(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Internal(format!("cannot write {}: {err}", path.display()))
    }

    pub fn read(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Data(format!("cannot read {}: {err}", path.display()))
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<pipeline::Error> for CliError {
    fn from(e: pipeline::Error) -> Self {
        use pipeline::Error as E;
        let internal = matches!(
            e,
            E::Classifier(ClassifierError::DuplicateRule(_))
                | E::Mining(MiningError::ZeroMatch(_))
                | E::Evaluation(
                    EvaluationError::Leakage(_) | EvaluationError::CountMismatch { .. } | EvaluationError::IdMismatch { .. }
                )
        );
        match e {
            E::Config(c) => c.into(),
            e if internal => CliError::Internal(e.to_string()),
            e => CliError::Data(e.to_string()),
        }
    }
}
