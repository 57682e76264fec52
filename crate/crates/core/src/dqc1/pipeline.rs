use serde::Serialize;

use super::{exact_probabilities, DQCkInstance, DqcError, OutcomeEstimate};
use crate::compile::{cycle_wrap, CompileError, lower_to_circuit, replay, truncate_at, Backend, FlipScheme};
use crate::regprog::RegisterProgram;
use crate::Limits;

/// Outcome of running the truncated cycled machine on every tape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusOutcome {
    pub tapes: u64,
    pub determined: u64,
    /// Determined tapes whose output bit disagrees with `f(x)`.
    pub wrong: u64,
    /// `P(determined and right) + P(undetermined) / 2`.
    pub success: f64,
    pub p_determined: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub expected: bool,
    pub cycles: usize,
    pub truncate: usize,
    pub cycle_length: usize,
    pub stream_length: usize,
    pub census: CensusOutcome,
    /// `1/2 + P(determined)/2`, from the census.
    pub predicted_bound: f64,
    /// `1/2 + 1/(2(l+1))`.
    pub markov_bound: f64,
    /// Acceptance of the DQC instance itself (undetermined tapes read 0).
    pub dqc: OutcomeEstimate,
    #[serde(skip)]
    pub instance: DQCkInstance,
}

/// Cycle-wraps `prog`, keeps `t` steps, and accounts for the result exactly.
/// `f(x)` is taken from a run on the all-zero register vector.
pub fn cl_pipeline(prog: &RegisterProgram, x: &[bool], l: usize, t: usize, backend: Backend, limits: &Limits) -> Result<PipelineReport, DqcError> {
    let machine = cycle_wrap(prog, l, FlipScheme::PerBlock)?;
    let steps = truncate_at(&machine, t)?;
    let c = machine.layout.catalytic_width();
    if c > limits.max_census_catalytic {
        return Err(DqcError::BudgetExceeded { what: format!("census over 2^{c} tapes"), requested: c as u64, limit: limits.max_census_catalytic as u64 });
    }
    let zeros = vec![0u64; prog.num_registers()];
    let expected = prog.execute(x, &zeros).map_err(CompileError::from)?[0] == 1;
    let lowered = lower_to_circuit(&steps, &machine.layout, x, backend, limits)?;
    let map = &lowered.qubits;
    let n = map.num_qubits();
    let det = map.determined.expect("cycled layout");
    let bit = |idx: u64, q: usize| (idx >> (n - 1 - q)) & 1 == 1;

    let tapes = 1u64 << c;
    let (mut determined, mut wrong, mut right) = (0u64, 0u64, 0u64);
    for tape in 0..tapes {
        let end = replay(&steps, &machine.layout, map, x, map.initial_index(tape)).final_index;
        if bit(end, det) {
            determined += 1;
            if bit(end, map.output) == expected {
                right += 1;
            } else {
                wrong += 1;
            }
        }
    }
    let p_determined = determined as f64 / tapes as f64;
    let success = (right as f64 + 0.5 * (tapes - determined) as f64) / tapes as f64;
    let instance = DQCkInstance::new(lowered.circuit)?;
    let dqc = exact_probabilities(&instance, limits)?;
    Ok(PipelineReport {
        expected,
        cycles: l,
        truncate: t,
        cycle_length: machine.cycle_length,
        stream_length: machine.len(),
        census: CensusOutcome { tapes, determined, wrong, success, p_determined },
        predicted_bound: 0.5 + p_determined / 2.0,
        markov_bound: 0.5 + 1.0 / (2.0 * (l as f64 + 1.0)),
        dqc,
        instance,
    })
}
