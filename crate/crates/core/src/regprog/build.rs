//! Gate, threshold and circuit programs.
//!
//! A gate with `k` inputs is realized from its multilinear polynomial
//! `f = sum_S c_S prod_{i in S} v_i` over `Z`. The constant and linear
//! parts are added to the target directly. For the nonlinear part each
//! input is loaded into its own scratch register, whose value is
//! `tau_i + v_i` while loaded and `tau_i` otherwise, and the load set `T`
//! walks through every subset in Gray-code order. At each subset the target
//! receives `q_T = sum_{S >= T, |S| >= 2} c_S (-1)^{|S|-|T|} prod_{i in S} R_i`.
//! For each `S` the inclusion-exclusion sum over `T <= S` telescopes to
//! `c_S prod_{i in S} v_i` whatever the scratch contents `tau` were.

use serde::Serialize;

use super::clean::TruthTable;
use super::{is_prime, Instruction, Monomial, Polynomial, RegProgError, RegisterProgram, Sign};

pub const MAX_FAN_IN: usize = 5;
pub const DEFAULT_MAX_DEPTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GateKind {
    Not,
    And,
    Or,
    Xor,
    /// At least `k` inputs set.
    Threshold(usize),
}

impl GateKind {
    pub fn eval(&self, inputs: &[bool]) -> bool {
        let ones = inputs.iter().filter(|&&b| b).count();
        match self {
            GateKind::Not => !inputs[0],
            GateKind::And => ones == inputs.len(),
            GateKind::Or => ones > 0,
            GateKind::Xor => ones % 2 == 1,
            GateKind::Threshold(k) => ones >= *k,
        }
    }

    pub fn name(&self) -> String {
        match self {
            GateKind::Not => "NOT".into(),
            GateKind::And => "AND".into(),
            GateKind::Or => "OR".into(),
            GateKind::Xor => "XOR".into(),
            GateKind::Threshold(k) => format!("TH{k}"),
        }
    }

    fn check_fan_in(&self, fan_in: usize) -> Result<(), RegProgError> {
        let ok = match self {
            GateKind::Not => fan_in == 1,
            GateKind::Threshold(k) => (1..=MAX_FAN_IN).contains(&fan_in) && *k <= fan_in,
            _ => (1..=MAX_FAN_IN).contains(&fan_in),
        };
        if ok {
            Ok(())
        } else {
            let max = if *self == GateKind::Not { 1 } else { MAX_FAN_IN };
            Err(RegProgError::UnsupportedFanIn { gate: self.name(), fan_in, max })
        }
    }

    pub fn truth_table(&self, fan_in: usize) -> TruthTable {
        TruthTable::from_fn(fan_in, |x| self.eval(x))
    }
}

/// Integer multilinear coefficients `c_S`, indexed by bitmask with bit `i`
/// standing for input `i`.
fn mobius(f: &TruthTable) -> Vec<i64> {
    let k = f.num_inputs;
    let value = |mask: usize| {
        let row = (0..k).filter(|i| mask >> i & 1 == 1).fold(0usize, |acc, i| acc | 1 << (k - 1 - i));
        f.values[row] as i64
    };
    let mut c: Vec<i64> = (0..1usize << k).map(value).collect();
    for i in 0..k {
        for mask in 0..1usize << k {
            if mask >> i & 1 == 1 {
                c[mask] -= c[mask ^ (1 << i)];
            }
        }
    }
    c
}

fn reduce(v: i64, p: u64) -> u64 {
    v.rem_euclid(p as i64) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Wire {
    Input(usize),
    Gate(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BoolGate {
    pub kind: GateKind,
    pub inputs: Vec<Wire>,
}

/// Boolean circuit as a gate list; wires may reference any gate, and
/// cycles are rejected by [`BoolCircuit::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BoolCircuit {
    pub num_inputs: usize,
    pub gates: Vec<BoolGate>,
    pub output: usize,
}

impl BoolCircuit {
    /// Checks wiring and fan-in, rejects cycles and returns the depth.
    pub fn validate(&self) -> Result<usize, RegProgError> {
        if self.output >= self.gates.len() {
            return Err(RegProgError::InvalidCircuit(format!("output gate {} does not exist", self.output)));
        }
        for (g, gate) in self.gates.iter().enumerate() {
            gate.kind.check_fan_in(gate.inputs.len())?;
            for w in &gate.inputs {
                match *w {
                    Wire::Input(k) if k >= self.num_inputs => {
                        return Err(RegProgError::InvalidCircuit(format!("gate {g} reads missing input {k}")))
                    }
                    Wire::Gate(h) if h >= self.gates.len() => {
                        return Err(RegProgError::InvalidCircuit(format!("gate {g} reads missing gate {h}")))
                    }
                    _ => {}
                }
            }
        }
        // Depth by memoized DFS; `None` marks a gate on the current path.
        let mut depth: Vec<Option<Option<usize>>> = vec![None; self.gates.len()];
        fn visit(c: &BoolCircuit, g: usize, depth: &mut Vec<Option<Option<usize>>>) -> Result<usize, RegProgError> {
            match depth[g] {
                Some(Some(d)) => return Ok(d),
                Some(None) => return Err(RegProgError::Cyclic(g)),
                None => {}
            }
            depth[g] = Some(None);
            let mut d = 0;
            for w in &c.gates[g].inputs {
                if let Wire::Gate(h) = *w {
                    d = d.max(visit(c, h, depth)?);
                }
            }
            depth[g] = Some(Some(d + 1));
            Ok(d + 1)
        }
        let mut out = 0;
        for g in 0..self.gates.len() {
            let d = visit(self, g, &mut depth)?;
            if g == self.output {
                out = d;
            }
        }
        Ok(out)
    }

    pub fn max_fan_in(&self) -> usize {
        self.gates.iter().map(|g| g.inputs.len()).max().unwrap_or(0)
    }

    /// Direct evaluation; the circuit must be acyclic.
    pub fn evaluate(&self, x: &[bool]) -> bool {
        fn eval(c: &BoolCircuit, g: usize, x: &[bool], memo: &mut Vec<Option<bool>>) -> bool {
            if let Some(v) = memo[g] {
                return v;
            }
            let ins: Vec<bool> = c.gates[g]
                .inputs
                .iter()
                .map(|w| match *w {
                    Wire::Input(k) => x[k],
                    Wire::Gate(h) => eval(c, h, x, memo),
                })
                .collect();
            let v = c.gates[g].kind.eval(&ins);
            memo[g] = Some(v);
            v
        }
        eval(self, self.output, x, &mut vec![None; self.gates.len()])
    }

    pub fn truth_table(&self) -> TruthTable {
        TruthTable::from_fn(self.num_inputs, |x| self.evaluate(x))
    }
}

struct Builder<'c> {
    p: u64,
    circuit: Option<&'c BoolCircuit>,
    block: usize,
    max_register: usize,
    out: Vec<Instruction>,
}

impl Builder<'_> {
    /// Emits a clean sub-program adding `sign * gate(vars)` to `target`,
    /// using the scratch block for recursion `level`.
    fn comp(&mut self, kind: GateKind, vars: &[Wire], target: usize, sign: Sign, level: usize) {
        let p = self.p;
        let k = vars.len();
        let coeffs = mobius(&kind.truth_table(k));
        let block = self.block;
        let load_reg = |i: usize| 1 + level * block + i;

        let c0 = reduce(coeffs[0], p);
        if c0 != 0 {
            self.out.push(Instruction::AddPoly { target, poly: Polynomial::constant(c0), sign });
        }
        for (i, var) in vars.iter().enumerate() {
            let c = reduce(coeffs[1 << i], p);
            let (times, s) = if c <= p - c { (c, sign) } else { (p - c, sign.flip()) };
            for _ in 0..times {
                self.add_var(*var, target, s, level);
            }
        }

        let nonlinear: Vec<usize> =
            (0..1usize << k).filter(|s| s.count_ones() >= 2 && reduce(coeffs[*s], p) != 0).collect();
        if nonlinear.is_empty() {
            return;
        }
        let used: Vec<usize> = (0..k).filter(|i| nonlinear.iter().any(|s| s >> i & 1 == 1)).collect();
        self.max_register = self.max_register.max(load_reg(*used.last().expect("nonempty")));
        let q = |t: usize| -> Polynomial {
            let terms = nonlinear
                .iter()
                .filter(|&&s| s & t == t)
                .map(|&s| {
                    let mut c = coeffs[s];
                    if (s.count_ones() - t.count_ones()) % 2 == 1 {
                        c = -c;
                    }
                    Monomial::new(reduce(c, p), (0..k).filter(|i| s >> i & 1 == 1).map(|i| (load_reg(i), 1)))
                })
                .collect();
            let mut poly = Polynomial::new(terms);
            poly.normalize(p);
            poly
        };

        // Gray-code walk over subsets of `used`.
        let v = used.len();
        let mut loaded = 0usize;
        for j in 0..1usize << v {
            let gray = j ^ (j >> 1);
            let t = (0..v).filter(|b| gray >> b & 1 == 1).fold(0usize, |acc, b| acc | 1 << used[b]);
            debug_assert_eq!(t, loaded);
            let poly = q(t);
            if !poly.terms.is_empty() {
                self.out.push(Instruction::AddPoly { target, poly, sign });
            }
            let bit = if j + 1 < 1 << v { (j + 1).trailing_zeros() as usize } else { break };
            let i = used[bit];
            let s = if loaded >> i & 1 == 1 { Sign::Minus } else { Sign::Plus };
            self.add_var(vars[i], load_reg(i), s, level + 1);
            loaded ^= 1 << i;
        }
        for &i in &used {
            if loaded >> i & 1 == 1 {
                self.add_var(vars[i], load_reg(i), Sign::Minus, level + 1);
            }
        }
    }

    fn add_var(&mut self, wire: Wire, target: usize, sign: Sign, level: usize) {
        match wire {
            Wire::Input(input) => self.out.push(Instruction::AddInput { target, input, sign }),
            Wire::Gate(g) => {
                let circuit = self.circuit.expect("gate wires only occur in circuits");
                let gate = &circuit.gates[g];
                self.comp(gate.kind, &gate.inputs.clone(), target, sign, level);
            }
        }
    }
}

fn check_modulus(p: u64, fan_in: usize) -> Result<(), RegProgError> {
    if !is_prime(p) {
        return Err(RegProgError::NotPrime(p));
    }
    if p <= fan_in as u64 {
        return Err(RegProgError::ModulusTooSmall { modulus: p, fan_in });
    }
    Ok(())
}

/// Clean program adding `gate(x_1..x_k)` to `R_0`, with one scratch
/// register per input.
pub fn gate_program(kind: GateKind, fan_in: usize, p: u64) -> Result<RegisterProgram, RegProgError> {
    kind.check_fan_in(fan_in)?;
    check_modulus(p, fan_in)?;
    let mut b = Builder { p, circuit: None, block: fan_in, max_register: 0, out: Vec::new() };
    let vars: Vec<Wire> = (0..fan_in).map(Wire::Input).collect();
    b.comp(kind, &vars, 0, Sign::Plus, 0);
    RegisterProgram::new(p, b.max_register + 1, fan_in, b.out)
}

/// Clean program for "at least `k` of `n` inputs".
pub fn threshold_program(n: usize, k: usize, p: u64) -> Result<RegisterProgram, RegProgError> {
    gate_program(GateKind::Threshold(k), n, p)
}

/// Composes gate programs along the circuit. A gate input that is itself a
/// gate is loaded into its scratch register by a nested clean program one
/// level deeper, so scratch registers are shared per level and total
/// `1 + (max fan-in) * depth`.
pub fn circuit_to_program(circuit: &BoolCircuit, p: u64, max_depth: usize) -> Result<RegisterProgram, RegProgError> {
    let depth = circuit.validate()?;
    if depth > max_depth {
        return Err(RegProgError::DepthExceeded { depth, limit: max_depth });
    }
    let fan_in = circuit.max_fan_in();
    check_modulus(p, fan_in)?;
    let mut b = Builder { p, circuit: Some(circuit), block: fan_in, max_register: 0, out: Vec::new() };
    let out = &circuit.gates[circuit.output];
    b.comp(out.kind, &out.inputs.clone(), 0, Sign::Plus, 0);
    RegisterProgram::new(p, b.max_register + 1, circuit.num_inputs, b.out)
}
