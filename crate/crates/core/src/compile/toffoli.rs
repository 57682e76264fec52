//! Toffoli/CNOT/X synthesis of the step stream.
//!
//! Modular addition is the Vedral-Barenco-Ekert construction on top of the
//! Cuccaro ripple-carry adder. Polynomial increments are loaded into a
//! scratch register by a lookup over all source values and unloaded by the
//! same lookup. Multi-controlled gates use a V-chain of work ancillas.

use super::layout::{FlipScheme, TapeLayout};
use super::steps::{ObliviousStep, QubitMap, StepAction};
use super::CompileError;
use crate::catalytic::Gate;
use crate::regprog::{Instruction, Sign};

pub(crate) type Op = (Gate, Vec<usize>);

#[derive(Debug, Default, Clone)]
pub(crate) struct Ops(pub Vec<Op>);

impl Ops {
    fn x(&mut self, q: usize) {
        self.0.push((Gate::X, vec![q]));
    }

    fn cnot(&mut self, c: usize, t: usize) {
        self.0.push((Gate::Cnot, vec![c, t]));
    }

    fn toffoli(&mut self, a: usize, b: usize, t: usize) {
        self.0.push((Gate::Toffoli, vec![a, b, t]));
    }

    /// Appends the inverse of `other`. Every gate here is self-inverse.
    fn extend_inverse(&mut self, other: &Ops) {
        self.0.extend(other.0.iter().rev().cloned());
    }

    fn extend(&mut self, other: &Ops) {
        self.0.extend(other.0.iter().cloned());
    }

    /// XORs the conjunction of `controls` (qubit, wanted value) into every
    /// target. Needs `controls.len() - 1` chain ancillas from three controls.
    pub(crate) fn mct(&mut self, controls: &[(usize, bool)], targets: &[usize], chain: &[usize]) {
        for &(q, want) in controls {
            if !want {
                self.x(q);
            }
        }
        let c: Vec<usize> = controls.iter().map(|&(q, _)| q).collect();
        match c.len() {
            0 => targets.iter().for_each(|&t| self.x(t)),
            1 => targets.iter().for_each(|&t| self.cnot(c[0], t)),
            2 => targets.iter().for_each(|&t| self.toffoli(c[0], c[1], t)),
            k => {
                assert!(chain.len() >= k - 1, "V-chain needs {} ancillas, have {}", k - 1, chain.len());
                let mut compute = Ops::default();
                compute.toffoli(c[0], c[1], chain[0]);
                for i in 2..k {
                    compute.toffoli(c[i], chain[i - 2], chain[i - 1]);
                }
                self.extend(&compute);
                targets.iter().for_each(|&t| self.cnot(chain[k - 2], t));
                self.extend_inverse(&compute);
            }
        }
        for &(q, want) in controls.iter().rev() {
            if !want {
                self.x(q);
            }
        }
    }

    /// `b += a` on little-endian registers, carry out XORed into `high`;
    /// `carry` is a clean ancilla that stays clean.
    pub(crate) fn cuccaro_add(&mut self, a: &[usize], b: &[usize], carry: usize, high: usize) {
        let n = a.len();
        debug_assert_eq!(n, b.len());
        let maj = |ops: &mut Ops, c: usize, b: usize, a: usize| {
            ops.cnot(a, b);
            ops.cnot(a, c);
            ops.toffoli(c, b, a);
        };
        let uma = |ops: &mut Ops, c: usize, b: usize, a: usize| {
            ops.toffoli(c, b, a);
            ops.cnot(a, c);
            ops.cnot(c, b);
        };
        maj(self, carry, b[0], a[0]);
        for i in 1..n {
            maj(self, a[i - 1], b[i], a[i]);
        }
        self.cnot(a[n - 1], high);
        for i in (1..n).rev() {
            uma(self, a[i - 1], b[i], a[i]);
        }
        uma(self, carry, b[0], a[0]);
    }

    fn cuccaro_sub(&mut self, a: &[usize], b: &[usize], carry: usize, high: usize) {
        let mut add = Ops::default();
        add.cuccaro_add(a, b, carry, high);
        self.extend_inverse(&add);
    }
}

/// Work ancillas used by the Toffoli backend.
#[derive(Debug, Clone)]
pub(crate) struct Scratch {
    /// Addend register, little-endian.
    addend: Vec<usize>,
    /// Holds the modulus while subtracting it, little-endian.
    modulus: Vec<usize>,
    carry: usize,
    high: usize,
    flag: usize,
    chain: Vec<usize>,
}

/// Largest control count any step needs.
fn max_controls(layout: &TapeLayout, steps: &[ObliviousStep]) -> usize {
    let w = layout.bits_per_register;
    let k = layout.cycle_counter_bits.unwrap_or(0);
    steps
        .iter()
        .map(|s| match &s.action {
            StepAction::FlipIn | StepAction::FlipOut => w,
            StepAction::Instruction { instruction: Instruction::AddPoly { poly, .. } } => poly.registers().count() * w,
            StepAction::Instruction { .. } => 0,
            StepAction::Latch => k + 1,
            StepAction::Count { .. } => k.saturating_sub(1),
        })
        .max()
        .unwrap_or(0)
}

pub(crate) fn ancillas_needed(layout: &TapeLayout, steps: &[ObliviousStep]) -> usize {
    let m = max_controls(layout, steps);
    let chain = if m >= 3 { m - 1 } else { 0 };
    2 * layout.bits_per_register + 3 + chain
}

fn le(q: &[usize]) -> Vec<usize> {
    q.iter().rev().copied().collect()
}

fn scratch(map: &QubitMap, w: usize) -> Scratch {
    let a = &map.ancillas;
    Scratch {
        addend: le(&a[..w]),
        modulus: le(&a[w..2 * w]),
        carry: a[2 * w],
        high: a[2 * w + 1],
        flag: a[2 * w + 2],
        chain: a[2 * w + 3..].to_vec(),
    }
}

/// `target = (target + addend) mod p` for residues; `target` little-endian.
fn mod_add(ops: &mut Ops, s: &Scratch, target: &[usize], p: u64) {
    if p == 1u64 << target.len() {
        // Only p = 2: addition is XOR.
        ops.cnot(s.addend[0], target[0]);
        return;
    }
    let load_p = |ops: &mut Ops, control: Option<usize>| {
        for (i, &q) in s.modulus.iter().enumerate() {
            if (p >> i) & 1 == 1 {
                match control {
                    Some(c) => ops.cnot(c, q),
                    None => ops.x(q),
                }
            }
        }
    };
    ops.cuccaro_add(&s.addend, target, s.carry, s.high);
    load_p(ops, None);
    ops.cuccaro_sub(&s.modulus, target, s.carry, s.high);
    load_p(ops, None);
    ops.cnot(s.high, s.flag);
    load_p(ops, Some(s.flag));
    ops.cuccaro_add(&s.modulus, target, s.carry, s.high);
    load_p(ops, Some(s.flag));
    ops.cuccaro_sub(&s.addend, target, s.carry, s.high);
    ops.x(s.high);
    ops.cnot(s.high, s.flag);
    ops.x(s.high);
    ops.cuccaro_add(&s.addend, target, s.carry, s.high);
}

/// `flag ^= [v >= p]` for a big-endian block `v`.
fn compare_ge(ops: &mut Ops, v: &[usize], p: u64, flag: usize, chain: &[usize]) {
    let w = v.len();
    if p >= 1u64 << w {
        return;
    }
    let pbit = |i: usize| (p >> (w - 1 - i)) & 1 == 1;
    // Disjoint cubes: agree with p above bit j, exceed it at j; or equal p.
    for j in 0..w {
        if !pbit(j) {
            let mut controls: Vec<(usize, bool)> = (0..j).map(|i| (v[i], pbit(i))).collect();
            controls.push((v[j], true));
            ops.mct(&controls, &[flag], chain);
        }
    }
    let eq: Vec<(usize, bool)> = (0..w).map(|i| (v[i], pbit(i))).collect();
    ops.mct(&eq, &[flag], chain);
}

fn register(map: &QubitMap, j: usize) -> &[usize] {
    if j == 0 {
        &map.result
    } else {
        &map.blocks[j - 1]
    }
}

/// XORs `q(sources)` into the addend register.
fn lookup(ops: &mut Ops, s: &Scratch, map: &QubitMap, poly: &crate::regprog::Polynomial, m: usize, p: u64) {
    let w = s.addend.len();
    let sources: Vec<usize> = {
        let mut r: Vec<usize> = poly.registers().collect();
        r.sort_unstable();
        r.dedup();
        r
    };
    let mut regs = vec![0u64; m];
    let total = (p as usize).pow(sources.len() as u32);
    for code in 0..total {
        let mut rest = code;
        let mut controls = Vec::with_capacity(sources.len() * w);
        for &j in &sources {
            let v = (rest % p as usize) as u64;
            rest /= p as usize;
            regs[j] = v;
            let q = register(map, j);
            controls.extend(q.iter().enumerate().map(|(i, &qb)| (qb, (v >> (w - 1 - i)) & 1 == 1)));
        }
        let value = poly.eval(&regs, p);
        let targets: Vec<usize> = (0..w).filter(|&i| (value >> i) & 1 == 1).map(|i| s.addend[i]).collect();
        if !targets.is_empty() {
            ops.mct(&controls, &targets, &s.chain);
        }
    }
}

pub(crate) fn lower_step(action: &StepAction, layout: &TapeLayout, map: &QubitMap, x: &[bool]) -> Result<Ops, CompileError> {
    if matches!(layout.scheme, FlipScheme::Global { .. }) {
        return Err(CompileError::BackendUnsupported("the toffoli backend needs per-block flips".into()));
    }
    let w = layout.bits_per_register;
    let p = layout.modulus;
    let s = scratch(map, w);
    let mut ops = Ops::default();
    match action {
        StepAction::FlipIn | StepAction::FlipOut => {
            for (block, &f) in map.blocks.iter().zip(&map.flips) {
                let mut one = Ops::default();
                compare_ge(&mut one, block, p, f, &s.chain);
                block.iter().for_each(|&q| one.cnot(f, q));
                if *action == StepAction::FlipIn {
                    ops.extend(&one);
                } else {
                    ops.extend_inverse(&one);
                }
            }
        }
        StepAction::Instruction { instruction } => {
            let target = le(register(map, instruction.target()));
            let mut load = Ops::default();
            match instruction {
                Instruction::AddInput { input, .. } => {
                    if !x[*input] {
                        return Ok(ops);
                    }
                    load.x(s.addend[0]);
                }
                Instruction::AddPoly { poly, .. } => lookup(&mut load, &s, map, poly, layout.num_registers, p),
            }
            if load.0.is_empty() {
                return Ok(ops);
            }
            let mut add = Ops::default();
            mod_add(&mut add, &s, &target, p);
            ops.extend(&load);
            match instruction.sign() {
                Sign::Plus => ops.extend(&add),
                Sign::Minus => ops.extend_inverse(&add),
            }
            ops.extend_inverse(&load);
        }
        StepAction::Latch => {
            let det = map.determined.expect("cycled layout");
            let zero: Vec<(usize, bool)> = map.counter.iter().map(|&q| (q, false)).collect();
            let mut with_result = zero.clone();
            with_result.push((map.result[w - 1], true));
            ops.mct(&with_result, &[map.output], &s.chain);
            ops.mct(&zero, &[det], &s.chain);
        }
        StepAction::Count { up } => {
            let c = le(&map.counter);
            let mut inc = Ops::default();
            for i in (0..c.len()).rev() {
                let controls: Vec<(usize, bool)> = c[..i].iter().map(|&q| (q, true)).collect();
                inc.mct(&controls, &[c[i]], &s.chain);
            }
            if *up {
                ops.extend(&inc);
            } else {
                ops.extend_inverse(&inc);
            }
        }
    }
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(ops: &Ops, n: usize, index: u64) -> u64 {
        ops.0.iter().fold(index, |i, (g, t)| g.apply_basis(i, n, t))
    }

    fn put(n: usize, qubits_le: &[usize], v: u64) -> u64 {
        qubits_le.iter().enumerate().fold(0u64, |acc, (i, &q)| acc | (((v >> i) & 1) << (n - 1 - q)))
    }

    fn get(n: usize, qubits_le: &[usize], index: u64) -> u64 {
        qubits_le.iter().enumerate().fold(0u64, |acc, (i, &q)| acc | (((index >> (n - 1 - q)) & 1) << i))
    }

    #[test]
    fn cuccaro_adds_mod_power_of_two() {
        let (a, b, carry, high) = (vec![0, 1, 2], vec![3, 4, 5], 6, 7);
        let mut ops = Ops::default();
        ops.cuccaro_add(&a, &b, carry, high);
        for va in 0..8u64 {
            for vb in 0..8u64 {
                for h in 0..2u64 {
                    let start = put(8, &a, va) | put(8, &b, vb) | put(8, &[high], h);
                    let end = run(&ops, 8, start);
                    assert_eq!(get(8, &a, end), va);
                    assert_eq!(get(8, &[carry], end), 0);
                    let mut bh = b.clone();
                    bh.push(high);
                    assert_eq!(get(8, &bh, end), (vb + (h << 3) + va) % 16);
                }
            }
        }
    }

    #[test]
    fn modular_adder_on_residues() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            let w = super::super::layout::bits_for(p);
            let target: Vec<usize> = (0..w).collect();
            let anc: Vec<usize> = (w..w + 2 * w + 3).collect();
            let n = 3 * w + 3;
            let s = Scratch {
                addend: anc[..w].to_vec(),
                modulus: anc[w..2 * w].to_vec(),
                carry: anc[2 * w],
                high: anc[2 * w + 1],
                flag: anc[2 * w + 2],
                chain: vec![],
            };
            let mut ops = Ops::default();
            mod_add(&mut ops, &s, &target, p);
            assert!(ops.0.iter().all(|(g, _)| matches!(g, Gate::X | Gate::Cnot | Gate::Toffoli)));
            for a in 0..p {
                for t in 0..p {
                    let end = run(&ops, n, put(n, &s.addend, a) | put(n, &target, t));
                    assert_eq!(end, put(n, &s.addend, a) | put(n, &target, (a + t) % p), "p={p} a={a} t={t}");
                }
            }
        }
    }

    #[test]
    fn mct_chain_is_clean() {
        let controls = [(0, true), (1, false), (2, true), (3, true)];
        let mut ops = Ops::default();
        ops.mct(&controls, &[4, 5], &[6, 7, 8]);
        for i in 0..64u64 {
            let start = i << 3;
            let end = run(&ops, 9, start);
            let bits = |q: usize| (start >> (8 - q)) & 1;
            let hit = bits(0) == 1 && bits(1) == 0 && bits(2) == 1 && bits(3) == 1;
            let expect = if hit { start ^ (0b11 << 3) } else { start };
            assert_eq!(end, expect);
        }
    }

    #[test]
    fn comparator_matches_threshold() {
        for p in [3u64, 5, 7, 11] {
            let w = super::super::layout::bits_for(p);
            let v: Vec<usize> = (0..w).collect();
            let n = w + 1 + w;
            let chain: Vec<usize> = (w + 1..n).collect();
            let mut ops = Ops::default();
            compare_ge(&mut ops, &v, p, w, &chain);
            for val in 0..1u64 << w {
                let start = val << (n - w);
                let end = run(&ops, n, start);
                assert_eq!(end, start | (((val >= p) as u64) << (n - w - 1)), "p={p} v={val}");
            }
        }
    }
}
