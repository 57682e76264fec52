//! Lowering of clean register programs to catalytic circuits.
//!
//! A program runs on a tape of `w`-bit blocks, `w = ceil(log2 p)`. Blocks
//! that do not hold a residue are complemented first and restored last. The
//! stream of fixed steps between is the same for every tape, and each step
//! becomes either one permutation gate or a Toffoli/CNOT/X network.

mod cycle;
mod layout;
mod steps;
mod toffoli;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::catalytic::{CatalyticCircuit, CircuitError, CircuitMode, Gate, Permutation};
use crate::qstate::linalg::{gather_local, scatter_local};
use crate::regprog::{program_to_text, RegProgError, RegisterProgram};
use crate::Limits;

pub use cycle::{cycle_wrap, truncate_at, CycledMachine};
pub use layout::{embed, Embedding, FlipScheme, TapeLayout};
pub use steps::{lower_to_steps, read_registers, replay, steps_to_text, ObliviousStep, QubitMap, Replay, StepAction};

use steps::Semantics;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error(transparent)]
    Program(#[from] RegProgError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("tape has {valid} valid register blocks, program needs {needed}; use more tape blocks")]
    DeficientTape { valid: usize, needed: usize },
    #[error("toffoli backend needs {needed} ancillas, budget is {limit}")]
    AncillaBudget { needed: usize, limit: usize },
    #[error("cannot truncate at {t}: stream has {len} steps")]
    TruncateTooLong { t: usize, len: usize },
    #[error("{0}")]
    BackendUnsupported(String),
    #[error("{0}")]
    InvalidArgument(String),
}

impl CompileError {
    pub fn is_budget(&self) -> bool {
        match self {
            CompileError::AncillaBudget { .. } => true,
            CompileError::Circuit(e) => e.is_budget(),
            CompileError::Program(e) => e.is_budget(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// One permutation gate per step (per block for flip passes).
    Perm,
    /// Toffoli, CNOT and X gates with work-register ancillas.
    Toffoli,
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "perm" => Ok(Backend::Perm),
            "toffoli" => Ok(Backend::Toffoli),
            other => Err(format!("unknown backend {other:?} (perm|toffoli)")),
        }
    }
}

/// A lowered stream and where its bits ended up.
#[derive(Debug, Clone)]
pub struct Lowered {
    pub circuit: CatalyticCircuit,
    pub qubits: QubitMap,
}

/// Drops adjacent step pairs that undo each other, repeatedly.
pub fn cancel_inverse_pairs(steps: &[ObliviousStep]) -> Vec<ObliviousStep> {
    let mut out: Vec<ObliviousStep> = Vec::with_capacity(steps.len());
    for s in steps {
        match out.last() {
            Some(prev) if prev.action.inverse() == s.action && s.action != StepAction::Latch => {
                out.pop();
            }
            _ => out.push(s.clone()),
        }
    }
    out
}

fn tabulate(sem: &Semantics, action: &StepAction, group: &[usize]) -> Result<Permutation, CompileError> {
    let n = sem.map.num_qubits();
    if group.len() > 24 {
        return Err(CompileError::BackendUnsupported(format!("permutation over {} qubits is too large to tabulate", group.len())));
    }
    let map = (0..1usize << group.len())
        .map(|local| {
            let s = scatter_local(0, n, group, local);
            let out = sem.apply(action, s).unwrap_or(s);
            gather_local(out, n, group)
        })
        .collect();
    Ok(Permutation::new(map)?)
}

/// Turns a stream into a unitary-mode circuit. Adjacent inverse steps are
/// cancelled first, and identity gates are skipped.
pub fn lower_to_circuit(
    steps: &[ObliviousStep],
    layout: &TapeLayout,
    x: &[bool],
    backend: Backend,
    limits: &Limits,
) -> Result<Lowered, CompileError> {
    if x.len() != layout.num_inputs {
        return Err(CompileError::InvalidArgument(format!("program takes {} inputs, got {}", layout.num_inputs, x.len())));
    }
    let steps = cancel_inverse_pairs(steps);
    let ancillas = match backend {
        Backend::Perm => 0,
        Backend::Toffoli => {
            let needed = toffoli::ancillas_needed(layout, &steps);
            if needed > limits.max_ancillas {
                return Err(CompileError::AncillaBudget { needed, limit: limits.max_ancillas });
            }
            needed
        }
    };
    let qubits = QubitMap::new(layout, ancillas);
    let mut circuit = CatalyticCircuit::new(qubits.work_width, qubits.catalytic_width, qubits.output, CircuitMode::Unitary)?
        .with_step_cap(limits.max_circuit_steps);
    let sem = Semantics { layout, map: &qubits, x };
    for step in &steps {
        match backend {
            Backend::Perm => {
                for group in sem.groups(&step.action) {
                    let perm = tabulate(&sem, &step.action, &group)?;
                    if !perm.is_identity() {
                        circuit.gate(Gate::perm(perm), &group)?;
                    }
                }
            }
            Backend::Toffoli => {
                for (gate, targets) in toffoli::lower_step(&step.action, layout, &qubits, x)?.0 {
                    circuit.gate(gate, &targets)?;
                }
            }
        }
    }
    Ok(Lowered { circuit, qubits })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompileOptions {
    pub backend: Backend,
    pub scheme: FlipScheme,
    /// Cycle-wrap with this many cycles.
    pub cycles: Option<usize>,
    /// Keep only this many steps of the cycled stream.
    pub truncate: Option<usize>,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self { backend: Backend::Perm, scheme: FlipScheme::PerBlock, cycles: None, truncate: None }
    }
}

/// Everything produced by one compilation.
#[derive(Debug, Clone, Serialize)]
pub struct CompiledArtifact {
    /// SHA-256 of the program text.
    pub program_hash: String,
    pub backend: Backend,
    pub input: Vec<bool>,
    pub layout: TapeLayout,
    pub qubits: QubitMap,
    pub steps: Vec<ObliviousStep>,
    /// Length of one cycle when cycle-wrapped.
    pub cycle_length: Option<usize>,
    #[serde(skip)]
    pub circuit: CatalyticCircuit,
}

pub fn program_hash(prog: &RegisterProgram) -> String {
    hex::encode(Sha256::digest(program_to_text(prog).as_bytes()))
}

/// Program and input to circuit.
pub fn compile(prog: &RegisterProgram, x: &[bool], opts: &CompileOptions, limits: &Limits) -> Result<CompiledArtifact, CompileError> {
    let (layout, steps, cycle_length) = match opts.cycles {
        Some(l) => {
            let machine = cycle_wrap(prog, l, opts.scheme)?;
            let steps = truncate_at(&machine, opts.truncate.unwrap_or(machine.len()))?;
            (machine.layout, steps, Some(machine.cycle_length))
        }
        None => {
            if opts.truncate.is_some() {
                return Err(CompileError::InvalidArgument("truncation needs a cycle count".into()));
            }
            let layout = TapeLayout::new(prog, opts.scheme)?;
            let steps = lower_to_steps(prog, &layout);
            (layout, steps, None)
        }
    };
    let lowered = lower_to_circuit(&steps, &layout, x, opts.backend, limits)?;
    Ok(CompiledArtifact {
        program_hash: program_hash(prog),
        backend: opts.backend,
        input: x.to_vec(),
        layout,
        qubits: lowered.qubits,
        steps,
        cycle_length,
        circuit: lowered.circuit,
    })
}
