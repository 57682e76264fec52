use serde::Serialize;

use super::layout::{FlipScheme, TapeLayout};
use super::CompileError;
use crate::qstate::linalg::{gather_local, scatter_local};
use crate::regprog::{Instruction, RegisterProgram};

/// One fixed transformation of the oblivious stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum StepAction {
    FlipIn,
    FlipOut,
    /// Controlled modular addition on the target block.
    Instruction { instruction: Instruction },
    /// On the first cycle (counter zero): copy the result bit into the output
    /// bit and set the determined bit.
    Latch,
    Count { up: bool },
}

impl StepAction {
    pub fn inverse(&self) -> StepAction {
        match self {
            StepAction::FlipIn => StepAction::FlipOut,
            StepAction::FlipOut => StepAction::FlipIn,
            StepAction::Instruction { instruction } => StepAction::Instruction { instruction: instruction.inverse() },
            StepAction::Latch => StepAction::Latch,
            StepAction::Count { up } => StepAction::Count { up: !up },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ObliviousStep {
    pub t: usize,
    pub action: StepAction,
}

/// Flip-in, one step per instruction, flip-out.
pub fn lower_to_steps(prog: &RegisterProgram, layout: &TapeLayout) -> Vec<ObliviousStep> {
    debug_assert_eq!(prog.num_registers(), layout.num_registers);
    let actions = std::iter::once(StepAction::FlipIn)
        .chain(prog.instructions().iter().map(|ins| StepAction::Instruction { instruction: ins.clone() }))
        .chain(std::iter::once(StepAction::FlipOut));
    number(actions)
}

pub(crate) fn number(actions: impl IntoIterator<Item = StepAction>) -> Vec<ObliviousStep> {
    actions.into_iter().enumerate().map(|(t, action)| ObliviousStep { t, action }).collect()
}

/// Canonical text of a stream, one step per line.
pub fn steps_to_text(steps: &[ObliviousStep]) -> String {
    let mut out = String::new();
    for s in steps {
        let body = match &s.action {
            StepAction::FlipIn => "FLIP-IN".to_string(),
            StepAction::FlipOut => "FLIP-OUT".to_string(),
            StepAction::Instruction { instruction } => instruction.to_string(),
            StepAction::Latch => "LATCH".to_string(),
            StepAction::Count { up: true } => "COUNT +1".to_string(),
            StepAction::Count { up: false } => "COUNT -1".to_string(),
        };
        out.push_str(&format!("{} {body}\n", s.t));
    }
    out
}

/// Physical qubit of every logical bit. Work comes first:
/// `[out, det, counter..]` (cycled only), `R_1`, flip bits, ancillas; then
/// the tape blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QubitMap {
    pub work_width: usize,
    pub catalytic_width: usize,
    pub output: usize,
    pub determined: Option<usize>,
    pub counter: Vec<usize>,
    pub result: Vec<usize>,
    pub flips: Vec<usize>,
    pub ancillas: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
}

impl QubitMap {
    pub fn new(layout: &TapeLayout, ancillas: usize) -> Self {
        let w = layout.bits_per_register;
        let mut next = 0usize;
        let mut take = |k: usize| {
            let r: Vec<usize> = (next..next + k).collect();
            next += k;
            r
        };
        let (latch, determined, counter) = match layout.cycle_counter_bits {
            Some(k) => (Some(take(1)[0]), Some(take(1)[0]), take(k)),
            None => (None, None, Vec::new()),
        };
        let result = take(w);
        let flips = take(layout.num_flip_bits());
        let ancillas = take(ancillas);
        let blocks = (0..layout.tape_blocks).map(|_| take(w)).collect();
        let work_width = layout.base_work_width() + ancillas.len();
        Self {
            work_width,
            catalytic_width: layout.catalytic_width(),
            output: latch.unwrap_or(result[w - 1]),
            determined,
            counter,
            result,
            flips,
            ancillas,
            blocks,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.work_width + self.catalytic_width
    }

    /// Basis index with clean work and the given tape.
    pub fn initial_index(&self, tape: u64) -> u64 {
        tape
    }

    pub fn tape_of(&self, index: u64) -> u64 {
        if self.catalytic_width == 0 {
            0
        } else {
            index & ((1u64 << self.catalytic_width) - 1)
        }
    }

    pub fn work_of(&self, index: u64) -> u64 {
        index >> self.catalytic_width
    }

    pub(crate) fn all_tape_qubits(&self) -> Vec<usize> {
        self.blocks.iter().flatten().copied().collect()
    }
}

/// Classical meaning of each step on a full basis index.
pub(crate) struct Semantics<'a> {
    pub layout: &'a TapeLayout,
    pub map: &'a QubitMap,
    pub x: &'a [bool],
}

impl Semantics<'_> {
    fn n(&self) -> usize {
        self.map.num_qubits()
    }

    fn read(&self, state: u64, qubits: &[usize]) -> u64 {
        gather_local(state, self.n(), qubits) as u64
    }

    fn write(&self, state: u64, qubits: &[usize], v: u64) -> u64 {
        scatter_local(state, self.n(), qubits, v as usize)
    }

    fn block_values(&self, state: u64) -> Vec<u64> {
        self.map.blocks.iter().map(|q| self.read(state, q)).collect()
    }

    /// Qubits of each program register in this state, or `None` when the
    /// tape is deficient under the global scheme.
    fn register_qubits(&self, state: u64) -> Option<Vec<&[usize]>> {
        let need = self.layout.num_registers - 1;
        let mut regs: Vec<&[usize]> = vec![&self.map.result];
        match self.layout.scheme {
            FlipScheme::PerBlock => regs.extend(self.map.blocks.iter().map(Vec::as_slice)),
            FlipScheme::Global { .. } => {
                let values = self.block_values(state);
                let valid: Vec<usize> = (0..values.len()).filter(|&i| values[i] < self.layout.modulus).take(need).collect();
                if valid.len() < need {
                    return None;
                }
                regs.extend(valid.iter().map(|&i| self.map.blocks[i].as_slice()));
            }
        }
        Some(regs)
    }

    /// Applies one step. `Err` carries a reason when an instruction would
    /// touch an invalid block; the state is then left unchanged, which is
    /// also what the unitary does.
    pub fn apply(&self, action: &StepAction, state: u64) -> Result<u64, String> {
        let p = self.layout.modulus;
        let mask = self.layout.block_mask();
        match action {
            StepAction::FlipIn | StepAction::FlipOut => {
                let inward = *action == StepAction::FlipIn;
                let mut s = state;
                match self.layout.scheme {
                    FlipScheme::PerBlock => {
                        for (block, &f) in self.map.blocks.iter().zip(&self.map.flips) {
                            let mut v = self.read(s, block);
                            let mut flag = self.read(s, &[f]) == 1;
                            if inward {
                                flag ^= v >= p;
                                if flag {
                                    v ^= mask;
                                }
                            } else {
                                if flag {
                                    v ^= mask;
                                }
                                flag ^= v >= p;
                            }
                            s = self.write(self.write(s, block, v), &[f], flag as u64);
                        }
                    }
                    FlipScheme::Global { .. } => {
                        let b = self.map.flips[0];
                        let tape = self.map.all_tape_qubits();
                        let mut flag = self.read(s, &[b]) == 1;
                        let all = self.layout.tape_of(&vec![mask; self.layout.tape_blocks]);
                        let mut t = self.read(s, &tape);
                        if inward {
                            flag ^= self.layout.global_flip(&self.layout.blocks_of(t));
                            if flag {
                                t ^= all;
                            }
                        } else {
                            if flag {
                                t ^= all;
                            }
                            flag ^= self.layout.global_flip(&self.layout.blocks_of(t));
                        }
                        s = self.write(self.write(s, &tape, t), &[b], flag as u64);
                    }
                }
                Ok(s)
            }
            StepAction::Instruction { instruction } => {
                let Some(regs) = self.register_qubits(state) else {
                    return Err("tape has too few valid blocks".into());
                };
                let mut values = vec![0u64; regs.len()];
                let t = instruction.target();
                let mut involved = vec![t];
                if let Instruction::AddPoly { poly, .. } = instruction {
                    involved.extend(poly.registers());
                }
                for &j in &involved {
                    values[j] = self.read(state, regs[j]);
                    if values[j] >= p {
                        return Err(format!("register {} holds {} >= {p}", j + 1, values[j]));
                    }
                }
                let delta = instruction.sign().apply(instruction.increment(self.x, &values, p), p);
                Ok(self.write(state, regs[t], (values[t] + delta) % p))
            }
            StepAction::Latch => {
                let det = self.map.determined.expect("latch needs a cycled layout");
                if self.read(state, &self.map.counter) != 0 {
                    return Ok(state);
                }
                let r = self.read(state, &self.map.result[self.map.result.len() - 1..]);
                let out = self.read(state, &[self.map.output]) ^ r;
                let d = self.read(state, &[det]) ^ 1;
                Ok(self.write(self.write(state, &[self.map.output], out), &[det], d))
            }
            StepAction::Count { up } => {
                let k = self.map.counter.len();
                let m = (1u64 << k) - 1;
                let v = self.read(state, &self.map.counter);
                let v = if *up { v.wrapping_add(1) } else { v.wrapping_sub(1) } & m;
                Ok(self.write(state, &self.map.counter, v))
            }
        }
    }

    /// Qubit groups the action factors over; each group is one permutation.
    pub fn groups(&self, action: &StepAction) -> Vec<Vec<usize>> {
        match (action, self.layout.scheme) {
            (StepAction::FlipIn | StepAction::FlipOut, FlipScheme::PerBlock) => self
                .map
                .blocks
                .iter()
                .zip(&self.map.flips)
                .map(|(b, &f)| std::iter::once(f).chain(b.iter().copied()).collect())
                .collect(),
            (StepAction::FlipIn | StepAction::FlipOut, FlipScheme::Global { .. }) => {
                vec![std::iter::once(self.map.flips[0]).chain(self.map.all_tape_qubits()).collect()]
            }
            (StepAction::Instruction { instruction }, FlipScheme::PerBlock) => {
                let reg = |j: usize| if j == 0 { self.map.result.clone() } else { self.map.blocks[j - 1].clone() };
                let mut regs = vec![instruction.target()];
                if let Instruction::AddPoly { poly, .. } = instruction {
                    regs.extend(poly.registers());
                }
                regs.sort_unstable();
                regs.dedup();
                vec![regs.into_iter().flat_map(reg).collect()]
            }
            (StepAction::Instruction { .. }, FlipScheme::Global { .. }) => {
                vec![self.map.result.iter().copied().chain(self.map.all_tape_qubits()).collect()]
            }
            (StepAction::Latch, _) => {
                let mut g = vec![self.map.output, self.map.determined.expect("cycled layout")];
                g.extend(&self.map.counter);
                g.push(self.map.result[self.map.result.len() - 1]);
                vec![g]
            }
            (StepAction::Count { .. }, _) => vec![self.map.counter.clone()],
        }
    }
}

/// Outcome of replaying a stream on one basis state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Replay {
    pub final_index: u64,
    /// Steps that met an invalid register; always empty for per-block flips.
    pub frozen_steps: Vec<usize>,
}

/// Runs `steps` classically from `index`.
pub fn replay(steps: &[ObliviousStep], layout: &TapeLayout, map: &QubitMap, x: &[bool], index: u64) -> Replay {
    let sem = Semantics { layout, map, x };
    let mut state = index;
    let mut frozen_steps = Vec::new();
    for step in steps {
        match sem.apply(&step.action, state) {
            Ok(s) => state = s,
            Err(_) => frozen_steps.push(step.t),
        }
    }
    Replay { final_index: state, frozen_steps }
}

/// Register values in a replayed state, `R_1` first.
pub fn read_registers(layout: &TapeLayout, map: &QubitMap, index: u64) -> Result<Vec<u64>, CompileError> {
    let sem = Semantics { layout, map, x: &[] };
    let regs = sem.register_qubits(index).ok_or(CompileError::DeficientTape { valid: 0, needed: layout.num_registers - 1 })?;
    Ok(regs.iter().map(|q| sem.read(index, q)).collect())
}
