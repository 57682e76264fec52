//! Clean register programs over `Z_p`.
//!
//! Registers and inputs are 0-indexed in the API; register 0 is the
//! result register. The text format is 1-indexed (`r1`, `x1`).

mod build;
mod clean;
mod text;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use build::{gate_program, threshold_program, circuit_to_program, BoolCircuit, BoolGate, GateKind, Wire, DEFAULT_MAX_DEPTH};
pub use clean::{count_images, verify_clean, CleanComputationCert, CleanMode, Counterexample, TruthTable};
pub use text::{parse_program, program_to_text};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegProgError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("register {index} out of range for {count} registers")]
    RegisterOutOfRange { index: usize, count: usize },
    #[error("input {index} out of range for {count} inputs")]
    InputOutOfRange { index: usize, count: usize },
    #[error("instruction {instruction}: polynomial reads its own target r{}", register + 1)]
    SelfReference { instruction: usize, register: usize },
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("fan-in {fan_in} unsupported for {gate} (max {max})")]
    UnsupportedFanIn { gate: String, fan_in: usize, max: usize },
    #[error("modulus {modulus} must exceed the fan-in {fan_in}")]
    ModulusTooSmall { modulus: u64, fan_in: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("boolean circuit has a cycle through gate {0}")]
    Cyclic(usize),
    #[error("boolean circuit depth {depth} exceeds the bound {limit}")]
    DepthExceeded { depth: usize, limit: usize },
    #[error("invalid boolean circuit: {0}")]
    InvalidCircuit(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}

impl RegProgError {
    pub fn is_budget(&self) -> bool {
        matches!(self, RegProgError::BudgetExceeded(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub(crate) fn apply(self, v: u64, p: u64) -> u64 {
        match self {
            Sign::Plus => v % p,
            Sign::Minus => (p - v % p) % p,
        }
    }
}

/// `coeff * prod R_reg^exp`; factors sorted by register, exponents >= 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Monomial {
    pub coeff: u64,
    pub factors: Vec<(usize, u32)>,
}

impl Monomial {
    pub fn constant(coeff: u64) -> Self {
        Self { coeff, factors: Vec::new() }
    }

    pub fn new(coeff: u64, factors: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut f: Vec<(usize, u32)> = Vec::new();
        for (r, e) in factors {
            if e == 0 {
                continue;
            }
            match f.iter_mut().find(|x| x.0 == r) {
                Some(x) => x.1 += e,
                None => f.push((r, e)),
            }
        }
        f.sort_unstable();
        Self { coeff, factors: f }
    }

    fn eval(&self, regs: &[u64], p: u64) -> u64 {
        let mut acc = self.coeff % p;
        for &(r, e) in &self.factors {
            if acc == 0 {
                break;
            }
            acc = acc * pow_mod(regs[r], e, p) % p;
        }
        acc
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Self { terms }
    }

    pub fn constant(c: u64) -> Self {
        Self { terms: vec![Monomial::constant(c)] }
    }

    pub fn eval(&self, regs: &[u64], p: u64) -> u64 {
        self.terms.iter().fold(0, |acc, m| (acc + m.eval(regs, p)) % p)
    }

    pub fn registers(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().flat_map(|m| m.factors.iter().map(|f| f.0))
    }

    /// Reduces coefficients mod `p`, merges like terms and drops zeros.
    fn normalize(&mut self, p: u64) {
        let mut merged: Vec<Monomial> = Vec::new();
        for m in self.terms.drain(..) {
            match merged.iter_mut().find(|x| x.factors == m.factors) {
                Some(x) => x.coeff = (x.coeff + m.coeff % p) % p,
                None => merged.push(Monomial { coeff: m.coeff % p, factors: m.factors }),
            }
        }
        merged.retain(|m| m.coeff != 0);
        self.terms = merged;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Instruction {
    /// `R_target +=/-= x_input`.
    AddInput { target: usize, input: usize, sign: Sign },
    /// `R_target +=/-= q(R)`, where `q` never reads `R_target`.
    AddPoly { target: usize, poly: Polynomial, sign: Sign },
}

impl Instruction {
    pub fn target(&self) -> usize {
        match self {
            Instruction::AddInput { target, .. } | Instruction::AddPoly { target, .. } => *target,
        }
    }

    pub fn sign(&self) -> Sign {
        match self {
            Instruction::AddInput { sign, .. } | Instruction::AddPoly { sign, .. } => *sign,
        }
    }

    pub fn inverse(&self) -> Instruction {
        match self {
            Instruction::AddInput { target, input, sign } => Instruction::AddInput { target: *target, input: *input, sign: sign.flip() },
            Instruction::AddPoly { target, poly, sign } => Instruction::AddPoly { target: *target, poly: poly.clone(), sign: sign.flip() },
        }
    }

    /// Amount added to the target (before the sign), mod `p`.
    pub fn increment(&self, x: &[bool], regs: &[u64], p: u64) -> u64 {
        match self {
            Instruction::AddInput { input, .. } => x[*input] as u64,
            Instruction::AddPoly { poly, .. } => poly.eval(regs, p),
        }
    }

    #[inline]
    fn apply(&self, x: &[bool], regs: &mut [u64], p: u64) {
        let delta = self.sign().apply(self.increment(x, regs, p), p);
        let t = self.target();
        regs[t] = (regs[t] + delta) % p;
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::instruction_to_text(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RegisterProgram {
    modulus: u64,
    num_registers: usize,
    num_inputs: usize,
    instructions: Vec<Instruction>,
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

pub(crate) fn pow_mod(base: u64, mut exp: u32, p: u64) -> u64 {
    let mut b = base % p;
    let mut acc = 1 % p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        exp >>= 1;
    }
    acc
}

impl RegisterProgram {
    /// Validates indices and primality, reduces coefficients mod `p`, and
    /// rejects polynomials that read their own target.
    pub fn new(modulus: u64, num_registers: usize, num_inputs: usize, instructions: Vec<Instruction>) -> Result<Self, RegProgError> {
        if !is_prime(modulus) {
            return Err(RegProgError::NotPrime(modulus));
        }
        if modulus > u32::MAX as u64 {
            return Err(RegProgError::BudgetExceeded(format!("modulus {modulus} exceeds 32 bits")));
        }
        let mut instructions = instructions;
        for (i, ins) in instructions.iter_mut().enumerate() {
            let reg = |index: usize| {
                if index >= num_registers {
                    Err(RegProgError::RegisterOutOfRange { index, count: num_registers })
                } else {
                    Ok(())
                }
            };
            reg(ins.target())?;
            match ins {
                Instruction::AddInput { input, .. } => {
                    if *input >= num_inputs {
                        return Err(RegProgError::InputOutOfRange { index: *input, count: num_inputs });
                    }
                }
                Instruction::AddPoly { target, poly, .. } => {
                    for r in poly.registers() {
                        reg(r)?;
                        if r == *target {
                            return Err(RegProgError::SelfReference { instruction: i, register: r });
                        }
                    }
                    poly.normalize(modulus);
                }
            }
        }
        Ok(Self { modulus, num_registers, num_inputs, instructions })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn num_registers(&self) -> usize {
        self.num_registers
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn execute(&self, x: &[bool], tau: &[u64]) -> Result<Vec<u64>, RegProgError> {
        if x.len() != self.num_inputs {
            return Err(RegProgError::LengthMismatch { expected: self.num_inputs, found: x.len() });
        }
        if tau.len() != self.num_registers {
            return Err(RegProgError::LengthMismatch { expected: self.num_registers, found: tau.len() });
        }
        let mut regs: Vec<u64> = tau.iter().map(|v| v % self.modulus).collect();
        self.execute_in_place(x, &mut regs);
        Ok(regs)
    }

    /// Unchecked evaluation; `regs` must already be reduced.
    pub fn execute_in_place(&self, x: &[bool], regs: &mut [u64]) {
        for ins in &self.instructions {
            ins.apply(x, regs, self.modulus);
        }
    }

    /// Instructions in reverse order with flipped signs.
    pub fn reverse(&self) -> RegisterProgram {
        RegisterProgram {
            instructions: self.instructions.iter().rev().map(Instruction::inverse).collect(),
            ..self.clone()
        }
    }

    /// `self` followed by `other`; both must share modulus and shape.
    pub fn concat(&self, other: &RegisterProgram) -> Result<RegisterProgram, RegProgError> {
        if self.modulus != other.modulus {
            return Err(RegProgError::InvalidCircuit("moduli differ".into()));
        }
        let mut instructions = self.instructions.clone();
        instructions.extend(other.instructions.iter().cloned());
        RegisterProgram::new(
            self.modulus,
            self.num_registers.max(other.num_registers),
            self.num_inputs.max(other.num_inputs),
            instructions,
        )
    }

    /// Copy with the register space widened to `num_registers`.
    pub fn widen(&self, num_registers: usize) -> RegisterProgram {
        RegisterProgram { num_registers: num_registers.max(self.num_registers), ..self.clone() }
    }

    /// Copy with registers `a` and `b` exchanged everywhere.
    pub fn swap_registers(&self, a: usize, b: usize) -> Result<RegisterProgram, RegProgError> {
        let map = |r: usize| if r == a { b } else if r == b { a } else { r };
        let instructions = self
            .instructions
            .iter()
            .map(|ins| match ins {
                Instruction::AddInput { target, input, sign } => Instruction::AddInput { target: map(*target), input: *input, sign: *sign },
                Instruction::AddPoly { target, poly, sign } => Instruction::AddPoly {
                    target: map(*target),
                    poly: Polynomial::new(
                        poly.terms.iter().map(|m| Monomial::new(m.coeff, m.factors.iter().map(|&(r, e)| (map(r), e)))).collect(),
                    ),
                    sign: *sign,
                },
            })
            .collect();
        RegisterProgram::new(self.modulus, self.num_registers, self.num_inputs, instructions)
    }
}
