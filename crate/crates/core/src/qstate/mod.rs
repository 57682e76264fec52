//! Exact dense linear algebra for small quantum systems.
//!
//! Qubit 0 is the most significant bit of a basis-state index, and in a
//! tensor product the left factor occupies the low-index qubits. Trace
//! distance is the normalized `1/2 Tr|rho - sigma|`.

mod channel;
pub mod linalg;
mod pauli;
pub mod random;
mod sparse;
mod state;

use thiserror::Error;

pub use channel::{certify_choi, pauli_strings, CptpCertificate, QuantumChannel};
pub use linalg::C64;
pub use pauli::{
    pauli_decompose, pauli_eigenstate, pauli_reconstruct, PauliEigenstate, PauliEigenstateLabel,
    PauliProdDecomposition,
};
pub use sparse::SparseState;
pub use state::{
    apply_unitary, helstrom_success, tensor, trace_distance, DensityMatrix, MatrixRows, PureState, QuantumState,
};

pub(crate) use state::matrix_trace_distance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QStateError {
    #[error("dimension {found} is not a power of two")]
    NotPowerOfTwo { found: usize },
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("target qubit {0} listed twice")]
    DuplicateTarget(usize),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("state is not normalized (norm squared {0})")]
    NotNormalized(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("channel is not CPTP: {0}")]
    NotCptp(String),
    #[error("{requested} qubits exceeds the {kind} limit of {limit}")]
    TooManyQubits { requested: usize, limit: usize, kind: &'static str },
    #[error("cannot combine a pure state with a density matrix")]
    KindMismatch,
    #[error("partial trace needs at least one kept qubit")]
    EmptyKeep,
}
