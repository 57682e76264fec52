use serde::Serialize;

use super::layout::{FlipScheme, TapeLayout};
use super::steps::{lower_to_steps, number, ObliviousStep, StepAction};
use super::CompileError;
use crate::regprog::RegisterProgram;

/// The base machine run `cycles` times; each cycle computes, latches on the
/// first pass (otherwise counts), and uncomputes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycledMachine {
    #[serde(skip)]
    pub base: RegisterProgram,
    pub layout: TapeLayout,
    pub cycles: usize,
    pub cycle_length: usize,
    pub steps: Vec<ObliviousStep>,
}

impl CycledMachine {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Counter width: enough for `2l`.
pub(crate) fn counter_bits(l: usize) -> usize {
    (usize::BITS - (2 * l).leading_zeros()) as usize
}

pub fn cycle_wrap(prog: &RegisterProgram, l: usize, scheme: FlipScheme) -> Result<CycledMachine, CompileError> {
    if l == 0 {
        return Err(CompileError::InvalidArgument("cycle count must be at least 1".into()));
    }
    let mut layout = TapeLayout::new(prog, scheme)?;
    layout.cycle_counter_bits = Some(counter_bits(l));
    let base: Vec<StepAction> = lower_to_steps(prog, &layout).into_iter().map(|s| s.action).collect();
    let mut cycle = base.clone();
    cycle.push(StepAction::Latch);
    cycle.push(StepAction::Count { up: true });
    cycle.extend(base.iter().rev().map(StepAction::inverse));
    let cycle_length = cycle.len();
    let steps = number((0..l).flat_map(|_| cycle.iter().cloned()));
    Ok(CycledMachine { base: prog.clone(), layout, cycles: l, cycle_length, steps })
}

/// The first `t` steps.
pub fn truncate_at(machine: &CycledMachine, t: usize) -> Result<Vec<ObliviousStep>, CompileError> {
    if t > machine.len() {
        return Err(CompileError::TruncateTooLong { t, len: machine.len() });
    }
    Ok(machine.steps[..t].to_vec())
}
