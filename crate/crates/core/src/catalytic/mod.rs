//! Quantum catalytic circuits and catalyticity verification.

mod circuit;
mod gate;
mod sim;
mod text;
mod verify;

use thiserror::Error;

use crate::qstate::QStateError;

pub use circuit::{CatalyticCircuit, CircuitMode, Step};
pub use gate::{Gate, Permutation};
pub use sim::{apply_classical, decision_probability, decision_probability_pure, evolve_sparse, run, run_pure, JointState, RunOutput};
pub use text::{circuit_to_text, parse_circuit, read_circuit, write_circuit};
pub use verify::{
    effective_channels, verify, verify_epr, verify_pauliprod, verify_random_density, verify_random_pure, CatalyticSet,
    CatalyticityReport, CertificateKind, EffectiveChannels, VerifyOptions, DEFAULT_TOLERANCE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error(transparent)]
    State(#[from] QStateError),
    #[error("output qubit {output} is outside the {work_width}-qubit work register")]
    OutputNotInWork { output: usize, work_width: usize },
    #[error("{0} qubits exceed the 64-qubit index width")]
    TooWide(usize),
    #[error("circuit exceeds the cap of {limit} steps")]
    TooManySteps { limit: usize },
    #[error("step {step}: {reason}")]
    BadStep { step: usize, reason: String },
    #[error("step {step} is not a unitary gate")]
    NonUnitaryStep { step: usize },
    #[error("step {step} is not a classical gate")]
    NotClassical { step: usize },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Io(String),
    #[error("step {step} has no text form")]
    NotSerializable { step: usize },
    #[error("catalytic state has {found} qubits, expected {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("budget exceeded: {what} (requested {requested}, limit {limit}); {hint}")]
    BudgetExceeded { what: String, requested: u64, limit: u64, hint: &'static str },
    #[error("circuit is not catalytic (reset deviation {reset:e}, output deviation {output:e})")]
    NonCatalytic { reset: f64, output: f64 },
    #[error("{0}")]
    InvalidArgument(String),
}

impl CircuitError {
    /// True for failures caused by size caps rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            CircuitError::BudgetExceeded { .. } | CircuitError::TooManySteps { .. } | CircuitError::State(QStateError::TooManyQubits { .. })
        )
    }
}
