use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{RegProgError, RegisterProgram};

/// Boolean function on `n` inputs; `x1` is the most significant bit of the
/// row index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TruthTable {
    pub num_inputs: usize,
    pub values: Vec<bool>,
}

impl TruthTable {
    pub fn from_fn(num_inputs: usize, f: impl Fn(&[bool]) -> bool) -> Self {
        let values = (0..1usize << num_inputs).map(|row| f(&Self::row_bits(num_inputs, row))).collect();
        Self { num_inputs, values }
    }

    pub fn row_bits(num_inputs: usize, row: usize) -> Vec<bool> {
        (0..num_inputs).map(|k| (row >> (num_inputs - 1 - k)) & 1 == 1).collect()
    }

    pub fn row_index(x: &[bool]) -> usize {
        x.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn eval(&self, x: &[bool]) -> bool {
        self.values[Self::row_index(x)]
    }

    pub fn threshold(num_inputs: usize, k: usize) -> Self {
        Self::from_fn(num_inputs, |x| x.iter().filter(|&&b| b).count() >= k)
    }

    pub fn majority(num_inputs: usize) -> Self {
        Self::threshold(num_inputs, num_inputs / 2 + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CleanMode {
    Exhaustive,
    Sampled { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub x: Vec<bool>,
    pub tau: Vec<u64>,
    pub got: Vec<u64>,
    pub expected: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CleanComputationCert {
    pub verified_function: TruthTable,
    pub domains_checked: u64,
    pub passed: bool,
    pub exhaustive: bool,
    /// Set when exhaustive mode was requested but exceeded the budget.
    pub fell_back_to_sampling: bool,
    pub counterexample: Option<Counterexample>,
}

/// Default sample count when the exhaustive budget is exceeded.
pub const FALLBACK_SAMPLES: u64 = 10_000;
const FALLBACK_SEED: u64 = 0x5eed;

/// Checks that `prog` leaves `R_0 = tau_0 + f(x)` and every other register
/// at `tau_j`. Exhaustive mode covers all `p^m 2^n` pairs when that fits
/// in `budget`, otherwise it falls back to seeded sampling with a warning.
pub fn verify_clean(prog: &RegisterProgram, f: &TruthTable, mode: CleanMode, budget: u64) -> Result<CleanComputationCert, RegProgError> {
    if f.num_inputs != prog.num_inputs() {
        return Err(RegProgError::LengthMismatch { expected: prog.num_inputs(), found: f.num_inputs });
    }
    let (p, m, n) = (prog.modulus(), prog.num_registers(), prog.num_inputs());
    let total = (p as u128).checked_pow(m as u32).map(|t| t << n);
    let (mode, fell_back) = match (mode, total) {
        (CleanMode::Exhaustive, Some(t)) if t <= budget as u128 => (CleanMode::Exhaustive, false),
        (CleanMode::Exhaustive, _) => {
            log::warn!("clean check of {p}^{m} * 2^{n} pairs exceeds budget {budget}; sampling {FALLBACK_SAMPLES} pairs");
            (CleanMode::Sampled { trials: FALLBACK_SAMPLES, seed: FALLBACK_SEED }, true)
        }
        (sampled, _) => (sampled, false),
    };

    let mut regs = vec![0u64; m];
    let mut check = |x: &[bool], tau: &[u64]| -> Option<Counterexample> {
        regs.copy_from_slice(tau);
        prog.execute_in_place(x, &mut regs);
        let expected_first = m.checked_sub(1).map(|_| (tau[0] + f.eval(x) as u64) % p);
        let ok = regs.iter().enumerate().all(|(j, &v)| if j == 0 { Some(v) == expected_first } else { v == tau[j] });
        (!ok).then(|| {
            let mut expected = tau.to_vec();
            if let Some(e) = expected_first {
                expected[0] = e;
            }
            Counterexample { x: x.to_vec(), tau: tau.to_vec(), got: regs.clone(), expected }
        })
    };

    let mut checked = 0u64;
    let mut counterexample = None;
    match mode {
        CleanMode::Exhaustive => {
            let mut tau = vec![0u64; m];
            'outer: loop {
                for row in 0..1usize << n {
                    checked += 1;
                    if let Some(cx) = check(&TruthTable::row_bits(n, row), &tau) {
                        counterexample = Some(cx);
                        break 'outer;
                    }
                }
                let Some(pos) = (0..m).rev().find(|&j| tau[j] + 1 < p) else { break };
                tau[pos] += 1;
                tau[pos + 1..].iter_mut().for_each(|t| *t = 0);
            }
        }
        CleanMode::Sampled { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..trials {
                let tau: Vec<u64> = (0..m).map(|_| rng.random_range(0..p)).collect();
                let x: Vec<bool> = (0..n).map(|_| rng.random()).collect();
                checked += 1;
                if let Some(cx) = check(&x, &tau) {
                    counterexample = Some(cx);
                    break;
                }
            }
        }
    }
    Ok(CleanComputationCert {
        verified_function: f.clone(),
        domains_checked: checked,
        passed: counterexample.is_none() && m > 0,
        exhaustive: mode == CleanMode::Exhaustive,
        fell_back_to_sampling: fell_back,
        counterexample,
    })
}

/// Number of distinct images of the register map `tau -> P_x(tau)` over
/// all of `Z_p^m`; equals `p^m` exactly when the program is a bijection.
pub fn count_images(prog: &RegisterProgram, x: &[bool], budget: u64) -> Result<u64, RegProgError> {
    let (p, m) = (prog.modulus(), prog.num_registers());
    let total = (p as u128).checked_pow(m as u32).filter(|&t| t <= budget as u128).ok_or_else(|| {
        RegProgError::BudgetExceeded(format!("image count over {p}^{m} register vectors exceeds {budget}"))
    })? as usize;
    let encode = |regs: &[u64]| regs.iter().fold(0usize, |acc, &v| acc * p as usize + v as usize);
    let mut seen = vec![false; total];
    let mut tau = vec![0u64; m];
    let mut regs = vec![0u64; m];
    let mut distinct = 0u64;
    for _ in 0..total {
        regs.copy_from_slice(&tau);
        prog.execute_in_place(x, &mut regs);
        let k = encode(&regs);
        if !seen[k] {
            seen[k] = true;
            distinct += 1;
        }
        if let Some(pos) = (0..m).rev().find(|&j| tau[j] + 1 < p) {
            tau[pos] += 1;
            tau[pos + 1..].iter_mut().for_each(|t| *t = 0);
        }
    }
    Ok(distinct)
}
