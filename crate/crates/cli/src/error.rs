use std::fmt::Display;
use std::process::ExitCode;

use catalyst_core::catalytic::CircuitError;
use catalyst_core::census::CensusError;
use catalyst_core::compile::CompileError;
use catalyst_core::dqc1::DqcError;
use catalyst_core::regprog::RegProgError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed files, flags or arguments.
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) | CliError::Io(_) => ExitCode::from(2),
            CliError::Budget(_) => ExitCode::from(3),
        }
    }

    /// Prefixes the message with the file it came from.
    pub fn in_file(self, path: impl Display) -> Self {
        match self {
            CliError::Input(m) => CliError::Input(format!("{path}: {m}")),
            CliError::Budget(m) => CliError::Budget(format!("{path}: {m}")),
            CliError::Io(m) => CliError::Io(m),
        }
    }
}

fn classify(budget: bool, e: impl Display) -> CliError {
    if budget {
        CliError::Budget(e.to_string())
    } else {
        CliError::Input(e.to_string())
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::Io(m) => CliError::Io(m),
            e => classify(e.is_budget(), e),
        }
    }
}

impl From<RegProgError> for CliError {
    fn from(e: RegProgError) -> Self {
        classify(e.is_budget(), e)
    }
}

impl From<CompileError> for CliError {
    fn from(e: CompileError) -> Self {
        classify(e.is_budget(), e)
    }
}

impl From<DqcError> for CliError {
    fn from(e: DqcError) -> Self {
        classify(e.is_budget(), e)
    }
}

impl From<CensusError> for CliError {
    fn from(e: CensusError) -> Self {
        classify(matches!(e, CensusError::BudgetExceeded { .. }), e)
    }
}
