//! Reversible catalytic automata and their runtime census.
//!
//! A configuration is `(state, clean, tape)`. Runs start at `(start, 0, tau)`
//! and stop at a halting state. Reversibility makes trajectories from
//! distinct tapes disjoint, so the run times summed over all tapes cannot
//! exceed the number of configurations.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::Limits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Config {
    pub state: u32,
    pub clean: u64,
    pub tape: u64,
}

pub type Transition = Arc<dyn Fn(Config) -> Option<Config> + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CensusError {
    #[error("transition is not injective: {a:?} and {b:?} both map to {image:?}")]
    NotReversible { a: Config, b: Config, image: Config },
    #[error("transition leaves the configuration space: {from:?} -> {to:?}")]
    OutOfRange { from: Config, to: Config },
    #[error("run on tape {tape:#x} does not halt within {limit} steps")]
    NonHalting { tape: u64, limit: u64 },
    #[error("budget exceeded: {what} (requested {requested}, limit {limit})")]
    BudgetExceeded { what: String, requested: u64, limit: u64 },
    #[error("{0}")]
    InvalidArgument(String),
}

/// Partial injective transition on a finite configuration space. Any
/// injective partial map extends to a bijection; [`CatalyticAutomaton::completed`]
/// builds one.
#[derive(Clone)]
pub struct CatalyticAutomaton {
    pub name: String,
    pub states: u32,
    pub clean_bits: usize,
    pub catalytic_bits: usize,
    pub start: u32,
    pub halting: Vec<u32>,
    delta: Transition,
}

impl fmt::Debug for CatalyticAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalyticAutomaton")
            .field("name", &self.name)
            .field("states", &self.states)
            .field("clean_bits", &self.clean_bits)
            .field("catalytic_bits", &self.catalytic_bits)
            .finish()
    }
}

/// Enumeration cap for reversibility checks.
const MAX_CONFIG_BITS: u32 = 30;

impl CatalyticAutomaton {
    pub fn new(
        name: impl Into<String>,
        states: u32,
        clean_bits: usize,
        catalytic_bits: usize,
        start: u32,
        halting: Vec<u32>,
        delta: Transition,
    ) -> Result<Self, CensusError> {
        if states == 0 || start >= states || halting.iter().any(|&h| h >= states) {
            return Err(CensusError::InvalidArgument("start and halting states must be below the state count".into()));
        }
        if clean_bits + catalytic_bits > 40 {
            return Err(CensusError::InvalidArgument("clean plus catalytic bits must fit in 40".into()));
        }
        Ok(Self { name: name.into(), states, clean_bits, catalytic_bits, start, halting, delta })
    }

    pub fn configurations(&self) -> u64 {
        (self.states as u64) << (self.clean_bits + self.catalytic_bits)
    }

    pub fn is_halted(&self, c: Config) -> bool {
        self.halting.contains(&c.state)
    }

    fn encode(&self, c: Config) -> u64 {
        (((c.state as u64) << self.clean_bits | c.clean) << self.catalytic_bits) | c.tape
    }

    fn decode(&self, i: u64) -> Config {
        let tape = i & ((1u64 << self.catalytic_bits) - 1);
        let rest = i >> self.catalytic_bits;
        Config { state: (rest >> self.clean_bits) as u32, clean: rest & ((1u64 << self.clean_bits) - 1), tape }
    }

    fn in_range(&self, c: Config) -> bool {
        c.state < self.states && c.clean >> self.clean_bits == 0 && c.tape >> self.catalytic_bits == 0
    }

    /// One step from a non-halted configuration.
    pub fn step(&self, c: Config) -> Option<Config> {
        if self.is_halted(c) {
            None
        } else {
            (self.delta)(c)
        }
    }

    fn check_size(&self) -> Result<(), CensusError> {
        let total = self.configurations();
        if total > 1u64 << MAX_CONFIG_BITS {
            return Err(CensusError::BudgetExceeded { what: "configuration enumeration".into(), requested: total, limit: 1u64 << MAX_CONFIG_BITS });
        }
        Ok(())
    }

    /// Exhaustive injectivity check; returns the domain size.
    pub fn check_reversible(&self) -> Result<u64, CensusError> {
        self.check_size()?;
        let total = self.configurations();
        let mut seen = Bitset::new(total);
        let mut domain = 0u64;
        for i in 0..total {
            let c = self.decode(i);
            let Some(img) = self.step(c) else { continue };
            if !self.in_range(img) {
                return Err(CensusError::OutOfRange { from: c, to: img });
            }
            domain += 1;
            let j = self.encode(img);
            if seen.test_and_set(j) {
                let b = (0..i).map(|k| self.decode(k)).find(|&o| self.step(o) == Some(img)).expect("earlier preimage");
                return Err(CensusError::NotReversible { a: b, b: c, image: img });
            }
        }
        Ok(domain)
    }

    /// Full bijection on configuration indices: the transition where it is
    /// defined, and configurations outside its domain paired in order with
    /// those outside its image.
    pub fn completed(&self) -> Result<Vec<u64>, CensusError> {
        self.check_reversible()?;
        let total = self.configurations();
        let mut table = vec![u64::MAX; total as usize];
        let mut hit = vec![false; total as usize];
        for i in 0..total {
            if let Some(img) = self.step(self.decode(i)) {
                let j = self.encode(img);
                table[i as usize] = j;
                hit[j as usize] = true;
            }
        }
        let free: Vec<u64> = (0..total).filter(|&j| !hit[j as usize]).collect();
        let undefined = (0..total).filter(|&i| table[i as usize] == u64::MAX).collect::<Vec<_>>();
        for (i, j) in undefined.into_iter().zip(free) {
            table[i as usize] = j;
        }
        Ok(table)
    }
}

struct Bitset(Vec<u64>);

impl Bitset {
    fn new(n: u64) -> Self {
        Bitset(vec![0; n.div_ceil(64) as usize])
    }

    /// Sets bit `i`; returns whether it was already set.
    fn test_and_set(&mut self, i: u64) -> bool {
        let (w, b) = ((i / 64) as usize, i % 64);
        let was = (self.0[w] >> b) & 1 == 1;
        self.0[w] |= 1 << b;
        was
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub automaton: String,
    pub clean_bits: usize,
    pub catalytic_bits: usize,
    pub configurations: u64,
    /// `T(tau)` for every tape, in tape order.
    pub times: Vec<u64>,
    pub sum: u64,
    pub mean: f64,
    pub max: u64,
    /// `configurations / 2^c`, the bound on the mean.
    pub mean_bound: f64,
    pub sum_within_configurations: bool,
    /// Configurations visited over all runs, halting ones included.
    pub distinct_configurations: u64,
    pub disjoint: bool,
    /// Every run ended with clean bits zero and the tape unchanged.
    pub restored: bool,
}

impl CensusReport {
    pub fn passed(&self) -> bool {
        self.sum_within_configurations && self.disjoint && self.restored
    }
}

/// Runs the automaton from every tape and records the running times.
pub fn runtime_census(aut: &CatalyticAutomaton, limits: &Limits) -> Result<CensusReport, CensusError> {
    let c = aut.catalytic_bits;
    if c > limits.max_census_catalytic {
        return Err(CensusError::BudgetExceeded { what: "census tapes (catalytic bits)".into(), requested: c as u64, limit: limits.max_census_catalytic as u64 });
    }
    aut.check_reversible()?;
    let total = aut.configurations();
    let mut visited = Bitset::new(total);
    let mut distinct = 0u64;
    let mut disjoint = true;
    let mut restored = true;
    let mut times = Vec::with_capacity(1 << c);
    for tape in 0..1u64 << c {
        let mut cfg = Config { state: aut.start, clean: 0, tape };
        let mut t = 0u64;
        loop {
            if visited.test_and_set(aut.encode(cfg)) {
                disjoint = false;
            } else {
                distinct += 1;
            }
            if aut.is_halted(cfg) {
                break;
            }
            let Some(next) = aut.step(cfg) else {
                return Err(CensusError::NonHalting { tape, limit: t });
            };
            cfg = next;
            t += 1;
            if t > total {
                return Err(CensusError::NonHalting { tape, limit: total });
            }
        }
        restored &= cfg.clean == 0 && cfg.tape == tape;
        times.push(t);
    }
    let sum: u64 = times.iter().sum();
    let tapes = times.len() as f64;
    Ok(CensusReport {
        automaton: aut.name.clone(),
        clean_bits: aut.clean_bits,
        catalytic_bits: c,
        configurations: total,
        max: times.iter().copied().max().unwrap_or(0),
        mean: sum as f64 / tapes,
        mean_bound: total as f64 / tapes,
        sum,
        sum_within_configurations: sum <= total,
        distinct_configurations: distinct,
        disjoint,
        restored,
        times,
    })
}

/// Halts before taking a step.
pub fn immediate_halt(clean_bits: usize, catalytic_bits: usize) -> CatalyticAutomaton {
    CatalyticAutomaton::new("immediate-halt", 1, clean_bits, catalytic_bits, 0, vec![0], Arc::new(|_| None)).expect("valid")
}

const SCAN: u32 = 0;
const RETURN: u32 = 1;
const HALT: u32 = 2;

/// Walks right over tape bits while they are 1, stops at the first 0 (or
/// the last cell), walks back, and halts. The head lives in the clean bits.
pub fn bit_scan_walker(catalytic_bits: usize) -> Result<CatalyticAutomaton, CensusError> {
    if catalytic_bits == 0 {
        return Err(CensusError::InvalidArgument("walker needs at least one tape bit".into()));
    }
    let c = catalytic_bits;
    let s = (usize::BITS - (c - 1).leading_zeros()) as usize;
    let cell = move |tape: u64, h: u64| (tape >> (c as u64 - 1 - h)) & 1 == 1;
    let delta = move |cfg: Config| -> Option<Config> {
        let h = cfg.clean;
        if h >= c as u64 {
            return None;
        }
        match cfg.state {
            SCAN if cell(cfg.tape, h) && h + 1 < c as u64 => Some(Config { clean: h + 1, ..cfg }),
            SCAN => Some(Config { state: RETURN, ..cfg }),
            // Moving left is only defined over cells the scan passed.
            RETURN if h > 0 && cell(cfg.tape, h - 1) => Some(Config { clean: h - 1, ..cfg }),
            RETURN if h == 0 => Some(Config { state: HALT, ..cfg }),
            _ => None,
        }
    };
    CatalyticAutomaton::new("bit-scan-walker", 3, s, c, SCAN, vec![HALT], Arc::new(delta))
}

const UP: u32 = 0;
const DOWN: u32 = 1;

/// Adds 1 to the tape (as a number mod `2^c`) `2^s - 1` times, then
/// subtracts it back. Every run takes `2^(s+1)` steps.
pub fn modular_counter(clean_bits: usize, catalytic_bits: usize) -> Result<CatalyticAutomaton, CensusError> {
    if clean_bits == 0 || catalytic_bits == 0 {
        return Err(CensusError::InvalidArgument("counter needs clean and tape bits".into()));
    }
    let k = (1u64 << clean_bits) - 1;
    let m = (1u64 << catalytic_bits) - 1;
    let delta = move |cfg: Config| -> Option<Config> {
        match cfg.state {
            UP if cfg.clean < k => Some(Config { clean: cfg.clean + 1, tape: (cfg.tape + 1) & m, ..cfg }),
            UP => Some(Config { state: DOWN, ..cfg }),
            DOWN if cfg.clean > 0 => Some(Config { clean: cfg.clean - 1, tape: cfg.tape.wrapping_sub(1) & m, ..cfg }),
            DOWN => Some(Config { state: HALT, ..cfg }),
            _ => None,
        }
    };
    CatalyticAutomaton::new("modular-counter", 3, clean_bits, catalytic_bits, UP, vec![HALT], Arc::new(delta))
}

/// Built-in automata by name.
pub fn builtin(name: &str, clean_bits: usize, catalytic_bits: usize) -> Result<CatalyticAutomaton, CensusError> {
    match name {
        "immediate-halt" => Ok(immediate_halt(clean_bits, catalytic_bits)),
        "bit-scan-walker" | "bit-scan" => bit_scan_walker(catalytic_bits),
        "modular-counter" => modular_counter(clean_bits, catalytic_bits),
        other => Err(CensusError::InvalidArgument(format!("unknown automaton {other:?} (immediate-halt|bit-scan-walker|modular-counter)"))),
    }
}

pub const BUILTINS: [&str; 3] = ["immediate-halt", "bit-scan-walker", "modular-counter"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn immediate_halt_takes_no_steps() {
        let r = runtime_census(&immediate_halt(2, 6), &Limits::default()).unwrap();
        assert!(r.times.iter().all(|&t| t == 0));
        assert!(r.passed());
    }

    #[test]
    fn walker_times_follow_first_zero() {
        let aut = bit_scan_walker(8).unwrap();
        assert_eq!(aut.clean_bits, 3);
        let r = runtime_census(&aut, &Limits::default()).unwrap();
        assert!(r.passed());
        for (tape, &t) in r.times.iter().enumerate() {
            // Leading ones, capped at the last cell.
            let j = (tape as u8).leading_ones().min(7) as u64;
            let expected = 2 * j + 2;
            assert_eq!(t, expected, "tape {tape:08b}");
        }
        assert!(r.mean <= r.mean_bound);
    }

    #[test]
    fn counter_is_constant_time() {
        let r = runtime_census(&modular_counter(2, 5).unwrap(), &Limits::default()).unwrap();
        assert!(r.times.iter().all(|&t| t == 8));
        assert!(r.passed());
    }

    #[test]
    fn completion_is_a_bijection() {
        let aut = bit_scan_walker(4).unwrap();
        let table = aut.completed().unwrap();
        let mut seen = vec![false; table.len()];
        for &j in &table {
            assert!(!seen[j as usize]);
            seen[j as usize] = true;
        }
    }

    #[test]
    fn rejects_non_injective() {
        let merge = Arc::new(|c: Config| Some(Config { state: 1, clean: 0, tape: c.tape }));
        let aut = CatalyticAutomaton::new("merge", 2, 1, 2, 0, vec![1], merge).unwrap();
        assert!(matches!(runtime_census(&aut, &Limits::default()), Err(CensusError::NotReversible { .. })));
    }
}
