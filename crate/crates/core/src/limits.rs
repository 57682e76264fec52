use std::env;

use crate::qstate::QStateError;

/// Size caps for the dense simulators and exhaustive enumerations.
///
/// Every field can be overridden from the environment, e.g.
/// `QLAB_MAX_PURE_QUBITS=14`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Limits {
    /// Dense state-vector width.
    pub max_pure_qubits: usize,
    /// Dense density-matrix / superoperator width.
    pub max_density_qubits: usize,
    /// Largest catalytic register enumerated over all `6^c` PauliProd states.
    pub max_pauliprod_catalytic: usize,
    /// Step cap for a catalytic circuit.
    pub max_circuit_steps: usize,
    /// Evaluation budget for exhaustive clean-computation checks.
    pub clean_budget: u64,
    /// Mixed-register width for exact one-clean-qubit enumeration.
    pub max_mixed_qubits: usize,
    /// Catalytic width for the runtime census.
    pub max_census_catalytic: usize,
    /// Work-register ancillas available to the Toffoli lowering.
    pub max_ancillas: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_pure_qubits: 12,
            max_density_qubits: 7,
            max_pauliprod_catalytic: 5,
            max_circuit_steps: 1 << 20,
            clean_budget: 10_000_000,
            max_mixed_qubits: 14,
            max_census_catalytic: 22,
            max_ancillas: 48,
        }
    }
}

impl Limits {
    pub fn from_env() -> Self {
        let mut l = Self::default();
        let read = |key: &str, slot: &mut usize| {
            if let Some(v) = env::var(key).ok().and_then(|s| s.parse().ok()) {
                *slot = v;
            }
        };
        read("QLAB_MAX_PURE_QUBITS", &mut l.max_pure_qubits);
        read("QLAB_MAX_DENSITY_QUBITS", &mut l.max_density_qubits);
        read("QLAB_MAX_PAULIPROD_CAT", &mut l.max_pauliprod_catalytic);
        read("QLAB_MAX_CIRCUIT_STEPS", &mut l.max_circuit_steps);
        read("QLAB_MAX_MIXED_QUBITS", &mut l.max_mixed_qubits);
        read("QLAB_MAX_CENSUS_CAT", &mut l.max_census_catalytic);
        read("QLAB_MAX_ANCILLAS", &mut l.max_ancillas);
        if let Some(v) = env::var("QLAB_CLEAN_BUDGET").ok().and_then(|s| s.parse().ok()) {
            l.clean_budget = v;
        }
        l
    }

    pub fn check_pure(&self, qubits: usize) -> Result<(), QStateError> {
        if qubits > self.max_pure_qubits {
            return Err(QStateError::TooManyQubits { requested: qubits, limit: self.max_pure_qubits, kind: "pure-state" });
        }
        Ok(())
    }

    pub fn check_density(&self, qubits: usize) -> Result<(), QStateError> {
        if qubits > self.max_density_qubits {
            return Err(QStateError::TooManyQubits {
                requested: qubits,
                limit: self.max_density_qubits,
                kind: "density-matrix",
            });
        }
        Ok(())
    }
}
