use serde::Serialize;

use super::CompileError;
use crate::regprog::RegisterProgram;

/// How raw tape blocks that are not residues mod `p` get normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum FlipScheme {
    /// One flip bit per block: a block holding a value `>= p` is complemented,
    /// which always lands below `p`. Every tape works with exactly `m - 1`
    /// blocks.
    PerBlock,
    /// A single bit `b` complements the whole tape when that yields more valid
    /// blocks. Registers are addressed by counting valid blocks, so the tape
    /// needs spare blocks; tapes with too few valid blocks are rejected.
    Global { blocks: usize },
}

impl FlipScheme {
    /// Global scheme with enough blocks that no tape is ever deficient.
    pub fn global_for(prog: &RegisterProgram) -> Self {
        let need = prog.num_registers().saturating_sub(1);
        FlipScheme::Global { blocks: (2 * need).saturating_sub(1).max(need) }
    }
}

/// Where the program's registers live.
///
/// `R_1` is the clean output register and sits in the work register; the
/// other registers are `w`-bit blocks of the catalytic tape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TapeLayout {
    pub modulus: u64,
    pub bits_per_register: usize,
    pub num_registers: usize,
    pub num_inputs: usize,
    pub scheme: FlipScheme,
    pub tape_blocks: usize,
    /// Bit offset of each block from the start of the tape.
    pub register_block_offsets: Vec<usize>,
    /// Counter width when the stream has been cycle-wrapped.
    pub cycle_counter_bits: Option<usize>,
}

impl TapeLayout {
    pub fn new(prog: &RegisterProgram, scheme: FlipScheme) -> Result<Self, CompileError> {
        let p = prog.modulus();
        let w = bits_for(p);
        let need = prog.num_registers().saturating_sub(1);
        let tape_blocks = match scheme {
            FlipScheme::PerBlock => need,
            FlipScheme::Global { blocks } if blocks < need => {
                return Err(CompileError::InvalidArgument(format!("global scheme with {blocks} blocks cannot hold {need} tape registers")));
            }
            FlipScheme::Global { blocks } => blocks,
        };
        if prog.num_registers() == 0 {
            return Err(CompileError::InvalidArgument("program has no registers".into()));
        }
        Ok(Self {
            modulus: p,
            bits_per_register: w,
            num_registers: prog.num_registers(),
            num_inputs: prog.num_inputs(),
            scheme,
            tape_blocks,
            register_block_offsets: (0..tape_blocks).map(|i| i * w).collect(),
            cycle_counter_bits: None,
        })
    }

    pub fn catalytic_width(&self) -> usize {
        self.tape_blocks * self.bits_per_register
    }

    pub fn num_flip_bits(&self) -> usize {
        match self.scheme {
            FlipScheme::PerBlock => self.tape_blocks,
            FlipScheme::Global { .. } => 1,
        }
    }

    /// Work bits used by the step stream itself, before backend ancillas.
    pub fn base_work_width(&self) -> usize {
        self.cycle_prefix() + self.bits_per_register + self.num_flip_bits()
    }

    pub(crate) fn cycle_prefix(&self) -> usize {
        self.cycle_counter_bits.map_or(0, |k| 2 + k)
    }

    pub(crate) fn block_mask(&self) -> u64 {
        (1u64 << self.bits_per_register) - 1
    }

    /// Splits a tape (first tape bit most significant) into block values.
    pub fn blocks_of(&self, tape: u64) -> Vec<u64> {
        let (w, b) = (self.bits_per_register, self.tape_blocks);
        (0..b).map(|i| (tape >> ((b - 1 - i) * w)) & self.block_mask()).collect()
    }

    pub fn tape_of(&self, blocks: &[u64]) -> u64 {
        blocks.iter().fold(0u64, |acc, &v| (acc << self.bits_per_register) | v)
    }

    pub(crate) fn count_valid(&self, blocks: &[u64]) -> usize {
        blocks.iter().filter(|&&v| v < self.modulus).count()
    }

    /// Global flip decision: complement iff that strictly increases the
    /// number of valid blocks.
    pub(crate) fn global_flip(&self, blocks: &[u64]) -> bool {
        let mask = self.block_mask();
        let flipped = blocks.iter().filter(|&&v| (v ^ mask) < self.modulus).count();
        flipped > self.count_valid(blocks)
    }
}

pub(crate) fn bits_for(p: u64) -> usize {
    (64 - (p - 1).leading_zeros() as usize).max(1)
}

/// Result of normalizing a raw tape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Embedding {
    pub layout: TapeLayout,
    pub raw_tape: Vec<bool>,
    pub normalized_tape: Vec<bool>,
    /// Per-block flip bits, or the single global `b`.
    pub flips: Vec<bool>,
    pub block_valid: Vec<bool>,
    /// Tape block holding program register `j + 1` (register 0 is in work).
    pub valid_map: Vec<usize>,
    /// Register values seen by the program, `R_1 = 0` first.
    pub register_values: Vec<u64>,
}

impl Embedding {
    /// Undoes the flips; always returns the raw tape.
    pub fn unembed(&self) -> Vec<bool> {
        let w = self.layout.bits_per_register;
        self.normalized_tape
            .iter()
            .enumerate()
            .map(|(i, &bit)| {
                let flip = match self.layout.scheme {
                    FlipScheme::PerBlock => self.flips[i / w],
                    FlipScheme::Global { .. } => self.flips[0],
                };
                bit ^ flip
            })
            .collect()
    }
}

pub(crate) fn bits_to_u64(bits: &[bool]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

pub(crate) fn u64_to_bits(v: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| (v >> (n - 1 - i)) & 1 == 1).collect()
}

/// Normalizes `raw_tape` so every register block used by `prog` holds a
/// residue mod `p`.
pub fn embed(prog: &RegisterProgram, raw_tape: &[bool], scheme: FlipScheme) -> Result<Embedding, CompileError> {
    let layout = TapeLayout::new(prog, scheme)?;
    let c = layout.catalytic_width();
    if raw_tape.len() != c {
        return Err(CompileError::InvalidArgument(format!("tape has {} bits, layout needs {c}", raw_tape.len())));
    }
    if c > 64 {
        return Err(CompileError::InvalidArgument(format!("{c}-bit tape exceeds 64 bits")));
    }
    let mask = layout.block_mask();
    let p = layout.modulus;
    let raw = layout.blocks_of(bits_to_u64(raw_tape));
    let need = prog.num_registers() - 1;
    let (flips, blocks) = match scheme {
        FlipScheme::PerBlock => {
            let flips: Vec<bool> = raw.iter().map(|&v| v >= p).collect();
            let blocks = raw.iter().zip(&flips).map(|(&v, &f)| if f { v ^ mask } else { v }).collect::<Vec<_>>();
            (flips, blocks)
        }
        FlipScheme::Global { .. } => {
            let b = layout.global_flip(&raw);
            (vec![b], raw.iter().map(|&v| if b { v ^ mask } else { v }).collect())
        }
    };
    let block_valid: Vec<bool> = blocks.iter().map(|&v| v < p).collect();
    let valid_map: Vec<usize> = (0..blocks.len()).filter(|&i| block_valid[i]).take(need).collect();
    if valid_map.len() < need {
        return Err(CompileError::DeficientTape { valid: valid_map.len(), needed: need });
    }
    let mut register_values = vec![0u64];
    register_values.extend(valid_map.iter().map(|&i| blocks[i]));
    Ok(Embedding {
        normalized_tape: u64_to_bits(layout.tape_of(&blocks), c),
        raw_tape: raw_tape.to_vec(),
        layout,
        flips,
        block_valid,
        valid_map,
        register_values,
    })
}
