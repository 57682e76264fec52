//! Simulation engines: dense state vectors, density matrices (for general
//! mode), sparse vectors for wide mostly-classical circuits, and direct
//! basis-index replay for purely classical circuits.

use nalgebra::{DMatrix, DVector};

use crate::qstate::linalg::{conjugate_density, C64, ONE, ZERO};
use crate::qstate::{DensityMatrix, PureState, QuantumChannel, SparseState};
use crate::Limits;

use super::circuit::{CatalyticCircuit, CircuitMode, Step};
use super::CircuitError;

/// Applies every step to a dense amplitude vector on `num_qubits` qubits
/// (at least the circuit's width). Unitary mode only.
pub(crate) fn evolve_amplitudes(circuit: &CatalyticCircuit, amps: &mut [C64], num_qubits: usize) -> Result<(), CircuitError> {
    for (i, step) in circuit.steps().iter().enumerate() {
        match step {
            Step::Gate { gate, targets } => gate.apply_dense(amps, num_qubits, targets),
            _ => return Err(CircuitError::NonUnitaryStep { step: i }),
        }
    }
    Ok(())
}

/// Applies every step to a sparse state. Unitary mode only.
pub fn evolve_sparse(circuit: &CatalyticCircuit, state: &mut SparseState) -> Result<(), CircuitError> {
    for (i, step) in circuit.steps().iter().enumerate() {
        match step {
            Step::Gate { gate, targets } => gate.apply_sparse(state, targets),
            _ => return Err(CircuitError::NonUnitaryStep { step: i }),
        }
    }
    Ok(())
}

/// Superoperator evolution of a density matrix; measurements become the
/// dephasing channel on the measured qubit.
pub(crate) fn evolve_density_matrix(circuit: &CatalyticCircuit, rho: &mut DMatrix<C64>, num_qubits: usize) {
    let measure = QuantumChannel::measurement();
    for step in circuit.steps() {
        match step {
            Step::Gate { gate, targets } => conjugate_density(rho, num_qubits, targets, &gate.matrix()),
            Step::Measure { qubit } => *rho = kraus_sum(rho, num_qubits, &[*qubit], measure.kraus()),
            Step::Channel { channel, targets } => *rho = kraus_sum(rho, num_qubits, targets, channel.kraus()),
        }
    }
}

fn kraus_sum(rho: &DMatrix<C64>, num_qubits: usize, targets: &[usize], kraus: &[DMatrix<C64>]) -> DMatrix<C64> {
    let mut acc = DMatrix::from_element(rho.nrows(), rho.ncols(), ZERO);
    for k in kraus {
        let mut term = rho.clone();
        conjugate_density(&mut term, num_qubits, targets, k);
        acc += term;
    }
    acc
}

/// Image of a basis index under an all-classical circuit.
pub fn apply_classical(circuit: &CatalyticCircuit, index: u64, num_qubits: usize) -> Result<u64, CircuitError> {
    let mut idx = index;
    for (i, step) in circuit.steps().iter().enumerate() {
        match step {
            Step::Gate { gate, targets } if gate.is_classical() => idx = gate.apply_basis(idx, num_qubits, targets),
            _ => return Err(CircuitError::NotClassical { step: i }),
        }
    }
    Ok(idx)
}

#[derive(Debug, Clone)]
pub enum JointState {
    Pure(PureState),
    Mixed(DensityMatrix),
    Sparse(SparseState),
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub joint: JointState,
    /// Work-register marginal.
    pub work: DensityMatrix,
    /// Catalytic (plus reference) marginal.
    pub catalytic: DensityMatrix,
}

fn marginal(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix, CircuitError> {
    if keep.is_empty() {
        return Ok(DensityMatrix::from_raw(0, DMatrix::from_element(1, 1, ONE)));
    }
    Ok(rho.partial_trace(keep)?)
}

fn check_marginals(circuit: &CatalyticCircuit, reference_width: usize, limits: &Limits) -> Result<(), CircuitError> {
    limits.check_pure(circuit.work_width())?;
    limits.check_pure(circuit.catalytic_width() + reference_width)?;
    Ok(())
}

/// Runs the circuit on `|0^s><0^s| (x) catalytic_state`, where the
/// catalytic state spans the `c` catalytic qubits followed by
/// `reference_width` untouched reference qubits.
pub fn run(
    circuit: &CatalyticCircuit,
    catalytic_state: &DensityMatrix,
    reference_width: usize,
    limits: &Limits,
) -> Result<RunOutput, CircuitError> {
    let c = circuit.catalytic_width();
    let s = circuit.work_width();
    if catalytic_state.num_qubits() != c + reference_width {
        return Err(CircuitError::WidthMismatch { expected: c + reference_width, found: catalytic_state.num_qubits() });
    }
    let n = s + c + reference_width;
    limits.check_density(n)?;
    circuit.check_limits(limits)?;
    let joint = DensityMatrix::basis(s, 0).tensor(catalytic_state);
    let mut m = joint.matrix().clone();
    evolve_density_matrix(circuit, &mut m, n);
    let joint = DensityMatrix::from_raw(n, m);
    let work = marginal(&joint, &(0..s).collect::<Vec<_>>())?;
    let catalytic = marginal(&joint, &(s..n).collect::<Vec<_>>())?;
    Ok(RunOutput { joint: JointState::Mixed(joint), work, catalytic })
}

/// Pure-state run of a unitary-mode circuit. Uses a dense vector when the
/// joint register fits the pure-state cap and a sparse one otherwise.
pub fn run_pure(
    circuit: &CatalyticCircuit,
    catalytic_state: &PureState,
    reference_width: usize,
    limits: &Limits,
) -> Result<RunOutput, CircuitError> {
    let c = circuit.catalytic_width();
    let s = circuit.work_width();
    if catalytic_state.num_qubits() != c + reference_width {
        return Err(CircuitError::WidthMismatch { expected: c + reference_width, found: catalytic_state.num_qubits() });
    }
    if circuit.mode() != CircuitMode::Unitary {
        return Err(CircuitError::NonUnitaryStep { step: 0 });
    }
    circuit.check_limits(limits)?;
    check_marginals(circuit, reference_width, limits)?;
    let n = s + c + reference_width;
    let work_keep: Vec<usize> = (0..s).collect();
    let cat_keep: Vec<usize> = (s..n).collect();
    if n <= limits.max_pure_qubits {
        let mut amps = vec![ZERO; 1 << n];
        amps[..catalytic_state.amplitudes().len()].copy_from_slice(catalytic_state.amplitudes().as_slice());
        evolve_amplitudes(circuit, &mut amps, n)?;
        let state = PureState::from_raw(n, DVector::from_vec(amps));
        let work = if s == 0 { marginal(&state.to_density(), &[])? } else { state.reduced(&work_keep)? };
        let catalytic = if cat_keep.is_empty() { marginal(&state.to_density(), &[])? } else { state.reduced(&cat_keep)? };
        return Ok(RunOutput { joint: JointState::Pure(state), work, catalytic });
    }
    if n > 64 {
        return Err(CircuitError::TooWide(n));
    }
    let entries = catalytic_state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(i, &a)| (i as u64, a));
    let mut state = SparseState::from_entries(n, entries);
    evolve_sparse(circuit, &mut state)?;
    let work = DensityMatrix::from_raw(s, state.reduced(&work_keep));
    let catalytic = DensityMatrix::from_raw(c + reference_width, state.reduced(&cat_keep));
    Ok(RunOutput { joint: JointState::Sparse(state), work, catalytic })
}

/// Probability that the output qubit reads 1 after the circuit runs on
/// the given catalytic state.
pub fn decision_probability(circuit: &CatalyticCircuit, catalytic_state: &DensityMatrix, limits: &Limits) -> Result<f64, CircuitError> {
    let out = run(circuit, catalytic_state, 0, limits)?;
    Ok(out.work.probability_one(circuit.output_qubit()))
}

/// Pure-input variant of [`decision_probability`], usable at widths where
/// only the sparse engine fits.
pub fn decision_probability_pure(circuit: &CatalyticCircuit, catalytic_state: &PureState, limits: &Limits) -> Result<f64, CircuitError> {
    if circuit.mode() == CircuitMode::General {
        return decision_probability(circuit, &catalytic_state.to_density(), limits);
    }
    let n = circuit.num_qubits();
    if n <= limits.max_pure_qubits {
        let mut amps = vec![ZERO; 1 << n];
        amps[..catalytic_state.amplitudes().len()].copy_from_slice(catalytic_state.amplitudes().as_slice());
        evolve_amplitudes(circuit, &mut amps, n)?;
        return Ok(PureState::from_raw(n, DVector::from_vec(amps)).probability_one(circuit.output_qubit()));
    }
    let entries = catalytic_state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(i, &a)| (i as u64, a));
    let mut state = SparseState::from_entries(n, entries);
    evolve_sparse(circuit, &mut state)?;
    Ok(state.probability_one(circuit.output_qubit()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalytic::Gate;
    use crate::qstate::trace_distance;

    #[test]
    fn empty_circuit_leaves_catalyst_alone() {
        let c = CatalyticCircuit::new(1, 1, 0, CircuitMode::Unitary).unwrap();
        let rho = DensityMatrix::maximally_mixed(1);
        let out = run(&c, &rho, 0, &Limits::default()).unwrap();
        assert!(trace_distance(&out.catalytic, &rho).unwrap() < 1e-15);
    }

    #[test]
    fn x_on_work_sets_output() {
        let mut c = CatalyticCircuit::new(1, 1, 0, CircuitMode::Unitary).unwrap();
        c.gate(Gate::X, &[0]).unwrap();
        let out = run(&c, &DensityMatrix::basis(1, 1), 0, &Limits::default()).unwrap();
        assert!(trace_distance(&out.work, &DensityMatrix::basis(1, 1)).unwrap() < 1e-15);
        assert!(trace_distance(&out.catalytic, &DensityMatrix::basis(1, 1)).unwrap() < 1e-15);
    }

    #[test]
    fn swap_into_work_disturbs_catalyst() {
        let mut c = CatalyticCircuit::new(1, 1, 0, CircuitMode::Unitary).unwrap();
        c.gate(Gate::Swap, &[0, 1]).unwrap();
        let out = run(&c, &DensityMatrix::basis(1, 1), 0, &Limits::default()).unwrap();
        assert!((trace_distance(&out.catalytic, &DensityMatrix::basis(1, 0)).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn engines_agree_on_output_probability() {
        let mut c = CatalyticCircuit::new(2, 2, 0, CircuitMode::Unitary).unwrap();
        c.gate(Gate::Toffoli, &[2, 3, 0]).unwrap().gate(Gate::T, &[0]).unwrap();
        let psi = PureState::basis(2, 1).apply_unitary(&Gate::H.matrix(), &[0]).unwrap();
        let dense = decision_probability_pure(&c, &psi, &Limits::default()).unwrap();
        let tiny = Limits { max_pure_qubits: 2, ..Limits::default() };
        let sparse = decision_probability_pure(&c, &psi, &tiny).unwrap();
        let mixed = decision_probability(&c, &psi.to_density(), &Limits::default()).unwrap();
        assert!((dense - sparse).abs() < 1e-14 && (dense - mixed).abs() < 1e-14);
        assert!((dense - 0.5).abs() < 1e-14);
    }

    #[test]
    fn h_on_output_is_a_coin() {
        let mut c = CatalyticCircuit::new(1, 0, 0, CircuitMode::Unitary).unwrap();
        c.gate(Gate::H, &[0]).unwrap();
        let p = decision_probability(&c, &DensityMatrix::from_raw(0, DMatrix::from_element(1, 1, ONE)), &Limits::default()).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }
}
