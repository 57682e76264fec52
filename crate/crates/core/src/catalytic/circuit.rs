use std::sync::Arc;

use serde::Serialize;

use crate::qstate::linalg::check_targets;
use crate::qstate::QuantumChannel;
use crate::Limits;

use super::gate::Gate;
use super::CircuitError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitMode {
    Unitary,
    /// Admits measurement and other channel steps.
    General,
}

#[derive(Debug, Clone)]
pub enum Step {
    Gate { gate: Gate, targets: Vec<usize> },
    /// Computational-basis measurement with the outcome discarded.
    Measure { qubit: usize },
    Channel { channel: Arc<QuantumChannel>, targets: Vec<usize> },
}

impl Step {
    pub fn targets(&self) -> &[usize] {
        match self {
            Step::Gate { targets, .. } | Step::Channel { targets, .. } => targets,
            Step::Measure { qubit } => std::slice::from_ref(qubit),
        }
    }

    pub fn is_classical(&self) -> bool {
        matches!(self, Step::Gate { gate, .. } if gate.is_classical())
    }
}

/// A work register of `s` clean qubits (indices `0..s`) followed by a
/// catalytic register of `c` qubits (indices `s..s+c`). Any reference
/// qubits used by the verifiers come after both and are never touched.
#[derive(Debug, Clone)]
pub struct CatalyticCircuit {
    work_width: usize,
    catalytic_width: usize,
    output_qubit: usize,
    mode: CircuitMode,
    steps: Vec<Step>,
    step_cap: usize,
}

impl CatalyticCircuit {
    pub fn new(work_width: usize, catalytic_width: usize, output_qubit: usize, mode: CircuitMode) -> Result<Self, CircuitError> {
        if output_qubit >= work_width {
            return Err(CircuitError::OutputNotInWork { output: output_qubit, work_width });
        }
        if work_width + catalytic_width > 64 {
            return Err(CircuitError::TooWide(work_width + catalytic_width));
        }
        Ok(Self {
            work_width,
            catalytic_width,
            output_qubit,
            mode,
            steps: Vec::new(),
            step_cap: Limits::default().max_circuit_steps,
        })
    }

    pub fn with_step_cap(mut self, cap: usize) -> Self {
        self.step_cap = cap;
        self
    }

    pub fn work_width(&self) -> usize {
        self.work_width
    }

    pub fn catalytic_width(&self) -> usize {
        self.catalytic_width
    }

    pub fn num_qubits(&self) -> usize {
        self.work_width + self.catalytic_width
    }

    pub fn output_qubit(&self) -> usize {
        self.output_qubit
    }

    pub fn mode(&self) -> CircuitMode {
        self.mode
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Number of steps; the same for every catalytic state by construction.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn work_qubits(&self) -> Vec<usize> {
        (0..self.work_width).collect()
    }

    pub fn catalytic_qubits(&self) -> Vec<usize> {
        (self.work_width..self.num_qubits()).collect()
    }

    /// True when every step is a phase-free basis permutation.
    pub fn is_classical(&self) -> bool {
        self.steps.iter().all(Step::is_classical)
    }

    pub fn push(&mut self, step: Step) -> Result<(), CircuitError> {
        if self.steps.len() >= self.step_cap {
            return Err(CircuitError::TooManySteps { limit: self.step_cap });
        }
        let line = self.steps.len();
        check_targets(self.num_qubits(), step.targets()).map_err(|e| CircuitError::BadStep { step: line, reason: e.to_string() })?;
        match &step {
            Step::Gate { gate, targets } if gate.arity() != targets.len() => {
                return Err(CircuitError::BadStep {
                    step: line,
                    reason: format!("{} acts on {} qubits, got {}", gate.name(), gate.arity(), targets.len()),
                });
            }
            Step::Channel { channel, targets } => {
                if self.mode == CircuitMode::Unitary {
                    return Err(CircuitError::NonUnitaryStep { step: line });
                }
                if channel.in_qubits() != targets.len() || channel.out_qubits() != targets.len() {
                    return Err(CircuitError::BadStep { step: line, reason: "channel width does not match its targets".into() });
                }
            }
            Step::Measure { .. } if self.mode == CircuitMode::Unitary => {
                return Err(CircuitError::NonUnitaryStep { step: line });
            }
            _ => {}
        }
        self.steps.push(step);
        Ok(())
    }

    pub fn gate(&mut self, gate: Gate, targets: &[usize]) -> Result<&mut Self, CircuitError> {
        self.push(Step::Gate { gate, targets: targets.to_vec() })?;
        Ok(self)
    }

    pub fn measure(&mut self, qubit: usize) -> Result<&mut Self, CircuitError> {
        self.push(Step::Measure { qubit })?;
        Ok(self)
    }

    pub fn channel(&mut self, channel: QuantumChannel, targets: &[usize]) -> Result<&mut Self, CircuitError> {
        self.push(Step::Channel { channel: Arc::new(channel), targets: targets.to_vec() })?;
        Ok(self)
    }

    /// Checks the step count against `limits`.
    pub fn check_limits(&self, limits: &Limits) -> Result<(), CircuitError> {
        if self.steps.len() > limits.max_circuit_steps {
            return Err(CircuitError::TooManySteps { limit: limits.max_circuit_steps });
        }
        Ok(())
    }

    /// Gate-by-gate inverse of a unitary-mode circuit.
    pub fn inverse(&self) -> Result<CatalyticCircuit, CircuitError> {
        let mut out = self.clone();
        out.steps.clear();
        for (i, step) in self.steps.iter().enumerate().rev() {
            match step {
                Step::Gate { gate, targets } => out.steps.push(Step::Gate { gate: gate.inverse(), targets: targets.clone() }),
                _ => return Err(CircuitError::NonUnitaryStep { step: i }),
            }
        }
        Ok(out)
    }

    /// Counts gates by name.
    pub fn gate_counts(&self) -> std::collections::BTreeMap<String, usize> {
        let mut counts = std::collections::BTreeMap::new();
        for step in &self.steps {
            let name = match step {
                Step::Gate { gate, .. } => gate.name(),
                Step::Measure { .. } => "MEASURE",
                Step::Channel { .. } => "CHANNEL",
            };
            *counts.entry(name.to_string()).or_insert(0) += 1;
        }
        counts
    }
}
