//! The k-clean-qubit model: `k` qubits start in `|0>`, `n` start maximally
//! mixed, one unitary runs, and clean qubit 0 is measured.

mod pipeline;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::catalytic::{apply_classical, evolve_sparse, CatalyticCircuit, CircuitError, CircuitMode, Gate, Step};
use crate::compile::CompileError;
use crate::qstate::linalg::trace_norm_hermitian;
use crate::qstate::{SparseState, C64};
use crate::Limits;

pub use pipeline::{cl_pipeline, CensusOutcome, PipelineReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DqcError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("step {step} is not a unitary gate; the model has no intermediate measurements")]
    NonUnitary { step: usize },
    #[error("budget exceeded: {what} (requested {requested}, limit {limit})")]
    BudgetExceeded { what: String, requested: u64, limit: u64 },
    #[error("{0}")]
    InvalidArgument(String),
}

impl DqcError {
    pub fn is_budget(&self) -> bool {
        match self {
            DqcError::BudgetExceeded { .. } => true,
            DqcError::Circuit(e) => e.is_budget(),
            DqcError::Compile(e) => e.is_budget(),
            _ => false,
        }
    }
}

/// `k` clean qubits (indices `0..k`) followed by `n` mixed ones.
#[derive(Debug, Clone)]
pub struct DQCkInstance {
    circuit: CatalyticCircuit,
}

impl DQCkInstance {
    /// Wraps a gate list; clean qubits are the circuit's work register.
    pub fn new(circuit: CatalyticCircuit) -> Result<Self, DqcError> {
        if let Some(step) = circuit.steps().iter().position(|s| !matches!(s, Step::Gate { .. })) {
            return Err(DqcError::NonUnitary { step });
        }
        if circuit.work_width() == 0 {
            return Err(DqcError::InvalidArgument("need at least one clean qubit".into()));
        }
        Ok(Self { circuit })
    }

    /// Single dense unitary over all `k + n` qubits.
    pub fn from_matrix(clean: usize, mixed: usize, u: DMatrix<C64>) -> Result<Self, DqcError> {
        let mut c = CatalyticCircuit::new(clean, mixed, 0, CircuitMode::Unitary)?;
        let targets: Vec<usize> = (0..clean + mixed).collect();
        c.gate(Gate::unitary(u)?, &targets)?;
        Self::new(c)
    }

    pub fn clean_count(&self) -> usize {
        self.circuit.work_width()
    }

    pub fn mixed_count(&self) -> usize {
        self.circuit.catalytic_width()
    }

    pub fn circuit(&self) -> &CatalyticCircuit {
        &self.circuit
    }

    fn num_qubits(&self) -> usize {
        self.circuit.num_qubits()
    }

    fn check_mixed(&self, limit: usize) -> Result<(), DqcError> {
        let n = self.mixed_count();
        if n > limit {
            return Err(DqcError::BudgetExceeded { what: format!("{n} mixed qubits enumerated"), requested: n as u64, limit: limit as u64 });
        }
        if self.num_qubits() > 63 {
            return Err(CircuitError::TooWide(self.num_qubits()).into());
        }
        Ok(())
    }

    /// Final state from `|0^k>|tau>`.
    fn run_basis(&self, tau: u64) -> Result<SparseState, DqcError> {
        let n = self.num_qubits();
        if self.circuit.is_classical() {
            return Ok(SparseState::basis(n, apply_classical(&self.circuit, tau, n)?));
        }
        let mut s = SparseState::basis(n, tau);
        evolve_sparse(&self.circuit, &mut s)?;
        Ok(s)
    }

    /// Probability of reading 1 on clean qubit 0 from `|0^k>|tau>`.
    pub fn p1_from_basis(&self, tau: u64) -> Result<f64, DqcError> {
        let n = self.num_qubits();
        if self.circuit.is_classical() {
            let out = apply_classical(&self.circuit, tau, n)?;
            return Ok((out >> (n - 1)) as f64);
        }
        Ok(self.run_basis(tau)?.probability_one(0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeEstimate {
    pub p0: f64,
    pub p1: f64,
    pub method: Method,
    pub shots: Option<u64>,
    pub standard_error: Option<f64>,
}

/// Averages the pure runs over all `2^n` mixed basis states.
pub fn exact_probabilities(instance: &DQCkInstance, limits: &Limits) -> Result<OutcomeEstimate, DqcError> {
    instance.check_mixed(limits.max_mixed_qubits)?;
    let count = 1u64 << instance.mixed_count();
    let mut p1 = 0.0;
    for tau in 0..count {
        p1 += instance.p1_from_basis(tau)?;
    }
    let p1 = (p1 / count as f64).clamp(0.0, 1.0);
    Ok(OutcomeEstimate { p0: 1.0 - p1, p1, method: Method::Exact, shots: None, standard_error: None })
}

/// Monte-Carlo estimate. Shot `i` draws its mixed basis state and its
/// measurement outcome from a generator keyed by `(seed, i)`.
pub fn sample(instance: &DQCkInstance, shots: u64, seed: u64, limits: &Limits) -> Result<OutcomeEstimate, DqcError> {
    if shots == 0 {
        return Err(DqcError::InvalidArgument("need at least one shot".into()));
    }
    instance.check_mixed(limits.max_mixed_qubits)?;
    let count = 1u64 << instance.mixed_count();
    let mut cache: Vec<Option<f64>> = vec![None; count as usize];
    let mut ones = 0u64;
    for shot in 0..shots {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot);
        let tau = rng.random_range(0..count);
        let p1 = match cache[tau as usize] {
            Some(p) => p,
            None => {
                let p = instance.p1_from_basis(tau)?;
                cache[tau as usize] = Some(p);
                p
            }
        };
        if rng.random::<f64>() < p1 {
            ones += 1;
        }
    }
    let p1 = ones as f64 / shots as f64;
    let p0 = (shots - ones) as f64 / shots as f64;
    Ok(OutcomeEstimate { p0, p1, method: Method::Sampled, shots: Some(shots), standard_error: Some((p0 * p1 / shots as f64).sqrt()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionOutcome {
    pub verdict: Verdict,
    pub margin_bound: f64,
    pub p0: f64,
    pub p1: f64,
}

/// Thresholds an estimate at `1/2 + 1/q`.
pub fn decide_estimate(est: &OutcomeEstimate, q_bound: f64) -> DecisionOutcome {
    let margin = 1.0 / q_bound;
    let verdict = if est.p1 >= 0.5 + margin {
        Verdict::Yes
    } else if est.p0 >= 0.5 + margin {
        Verdict::No
    } else {
        Verdict::Inconclusive
    };
    DecisionOutcome { verdict, margin_bound: margin, p0: est.p0, p1: est.p1 }
}

/// Exact probabilities, then [`decide_estimate`].
pub fn decide(instance: &DQCkInstance, q_bound: f64, limits: &Limits) -> Result<DecisionOutcome, DqcError> {
    if !(q_bound > 0.0) {
        return Err(DqcError::InvalidArgument(format!("q bound must be positive, got {q_bound}")));
    }
    Ok(decide_estimate(&exact_probabilities(instance, limits)?, q_bound))
}

/// Work register becomes the clean qubits, catalytic register the mixed
/// ones; the output qubit is relabelled to clean qubit 0.
pub fn from_unitary_catalytic(circuit: &CatalyticCircuit) -> Result<DQCkInstance, DqcError> {
    if let Some(step) = circuit.steps().iter().position(|s| !matches!(s, Step::Gate { .. })) {
        return Err(DqcError::NonUnitary { step });
    }
    let out = circuit.output_qubit();
    let relabel = |q: usize| match q {
        0 => out,
        q if q == out => 0,
        q => q,
    };
    let mut c = CatalyticCircuit::new(circuit.work_width(), circuit.catalytic_width(), 0, CircuitMode::Unitary)?.with_step_cap(circuit.len().max(1));
    for step in circuit.steps() {
        if let Step::Gate { gate, targets } = step {
            let t: Vec<usize> = targets.iter().map(|&q| relabel(q)).collect();
            c.gate(gate.clone(), &t)?;
        }
    }
    DQCkInstance::new(c)
}

/// Trace distance between the final mixed-register marginal and `I/2^n`.
/// Measuring clean qubit 0 does not change this marginal.
pub fn mixed_marginal_deviation(instance: &DQCkInstance, limits: &Limits) -> Result<f64, DqcError> {
    let (k, n) = (instance.clean_count(), instance.mixed_count());
    let count = 1u64 << n;
    if instance.circuit.is_classical() {
        instance.check_mixed(limits.max_mixed_qubits)?;
        let total = instance.num_qubits();
        let mut hits = vec![0u64; count as usize];
        for tau in 0..count {
            let out = apply_classical(&instance.circuit, tau, total)?;
            hits[(out & (count - 1)) as usize] += 1;
        }
        return Ok(0.5 * hits.iter().map(|&h| (h as f64 - 1.0).abs()).sum::<f64>() / count as f64);
    }
    let cap = limits.max_density_qubits.max(10);
    instance.check_mixed(cap)?;
    let mixed: Vec<usize> = (k..k + n).collect();
    let dim = count as usize;
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    for tau in 0..count {
        rho += instance.run_basis(tau)?.reduced(&mixed);
    }
    rho /= C64::new(count as f64, 0.0);
    let id = DMatrix::<C64>::identity(dim, dim) / C64::new(count as f64, 0.0);
    Ok(0.5 * trace_norm_hermitian(&(rho - id)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circuit(k: usize, n: usize, gates: &[(Gate, Vec<usize>)]) -> DQCkInstance {
        let mut c = CatalyticCircuit::new(k, n, 0, CircuitMode::Unitary).unwrap();
        for (g, t) in gates {
            c.gate(g.clone(), t).unwrap();
        }
        DQCkInstance::new(c).unwrap()
    }

    #[test]
    fn textbook_cases() {
        let l = Limits::default();
        assert_eq!(exact_probabilities(&circuit(1, 2, &[]), &l).unwrap().p0, 1.0);
        assert_eq!(exact_probabilities(&circuit(1, 2, &[(Gate::X, vec![0])]), &l).unwrap().p0, 0.0);
        let cnot = circuit(1, 1, &[(Gate::Cnot, vec![1, 0])]);
        assert_eq!(exact_probabilities(&cnot, &l).unwrap().p0, 0.5);
        let h = circuit(1, 1, &[(Gate::H, vec![0])]);
        assert!((exact_probabilities(&h, &l).unwrap().p0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sampled_identity_is_certain() {
        let est = sample(&circuit(1, 3, &[]), 1000, 7, &Limits::default()).unwrap();
        assert_eq!((est.p0, est.standard_error), (1.0, Some(0.0)));
    }

    #[test]
    fn hadamard_sampling_within_five_sigma() {
        let est = sample(&circuit(1, 1, &[(Gate::H, vec![0])]), 100_000, 1, &Limits::default()).unwrap();
        let sigma = (0.25f64 / 100_000.0).sqrt();
        assert!((est.p0 - 0.5).abs() <= 5.0 * sigma);
        assert_eq!(est.p0 + est.p1, 1.0);
    }

    #[test]
    fn sampling_is_reproducible() {
        let inst = circuit(1, 2, &[(Gate::H, vec![0]), (Gate::Cnot, vec![1, 0])]);
        let a = sample(&inst, 500, 3, &Limits::default()).unwrap();
        assert_eq!(a, sample(&inst, 500, 3, &Limits::default()).unwrap());
    }

    #[test]
    fn decisions() {
        let yes = OutcomeEstimate { p0: 0.0, p1: 1.0, method: Method::Exact, shots: None, standard_error: None };
        assert_eq!(decide_estimate(&yes, 100.0).verdict, Verdict::Yes);
        let coin = OutcomeEstimate { p0: 0.5, p1: 0.5, ..yes.clone() };
        assert_eq!(decide_estimate(&coin, 100.0).verdict, Verdict::Inconclusive);
        assert_eq!(decide_estimate(&OutcomeEstimate { p0: 0.8, p1: 0.2, ..yes }, 4.0).verdict, Verdict::No);
    }

    #[test]
    fn relabels_output_and_rejects_measurement() {
        let mut c = CatalyticCircuit::new(2, 1, 1, CircuitMode::Unitary).unwrap();
        c.gate(Gate::X, &[1]).unwrap();
        let inst = from_unitary_catalytic(&c).unwrap();
        assert_eq!(exact_probabilities(&inst, &Limits::default()).unwrap().p1, 1.0);
        let mut g = CatalyticCircuit::new(1, 1, 0, CircuitMode::General).unwrap();
        g.measure(0).unwrap();
        assert!(matches!(from_unitary_catalytic(&g), Err(DqcError::NonUnitary { step: 0 })));
    }

    #[test]
    fn swap_circuit_is_valid_but_not_preserving() {
        let mut c = CatalyticCircuit::new(1, 1, 0, CircuitMode::Unitary).unwrap();
        c.gate(Gate::Swap, &[0, 1]).unwrap();
        let inst = from_unitary_catalytic(&c).unwrap();
        let l = Limits::default();
        assert_eq!(exact_probabilities(&inst, &l).unwrap().p1, 0.5);
        assert!((mixed_marginal_deviation(&inst, &l).unwrap() - 0.5).abs() < 1e-12);
        let mut h = CatalyticCircuit::new(1, 1, 0, CircuitMode::Unitary).unwrap();
        h.gate(Gate::H, &[1]).unwrap();
        assert!(mixed_marginal_deviation(&from_unitary_catalytic(&h).unwrap(), &l).unwrap() < 1e-12);
    }
}
