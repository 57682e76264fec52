use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::qstate::linalg::{
    apply_matrix_to_amplitudes, apply_permutation_to_amplitudes, bit_position, gather_local, is_power_of_two_dim,
    scatter_local, unitarity_deviation, C64, ONE, ZERO,
};
use crate::qstate::SparseState;

use super::CircuitError;

/// A bijection of the `2^k` basis states of `k` qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    num_qubits: usize,
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self, CircuitError> {
        let num_qubits = is_power_of_two_dim(map.len())
            .ok_or_else(|| CircuitError::InvalidPermutation(format!("length {} is not a power of two", map.len())))?;
        let mut seen = vec![false; map.len()];
        for &image in &map {
            if image >= map.len() || std::mem::replace(&mut seen[image], true) {
                return Err(CircuitError::InvalidPermutation(format!("image {image} repeated or out of range")));
            }
        }
        Ok(Self { num_qubits, map })
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self { num_qubits, map: (0..1usize << num_qubits).collect() }
    }

    pub fn from_fn(num_qubits: usize, f: impl Fn(usize) -> usize) -> Result<Self, CircuitError> {
        Self::new((0..1usize << num_qubits).map(f).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, index: usize) -> usize {
        self.map[index]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Self { num_qubits: self.num_qubits, map: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Side-file form: a `QUBITS k` header, then one `i j` pair per moved
    /// basis state.
    pub fn to_text(&self) -> String {
        let mut out = format!("QUBITS {}\n", self.num_qubits);
        for (i, &j) in self.map.iter().enumerate() {
            if i != j {
                out.push_str(&format!("{i} {j}\n"));
            }
        }
        out
    }

    /// Parses the side-file form; unlisted indices are fixed points.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut qubits: Option<usize> = None;
        let mut map: Vec<usize> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let first = parts.next().unwrap_or_default();
            if first.eq_ignore_ascii_case("QUBITS") {
                let k: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| format!("line {}: QUBITS needs a count", lineno + 1))?;
                if k > 24 {
                    return Err(format!("line {}: permutation on {k} qubits is too large", lineno + 1));
                }
                qubits = Some(k);
                map = (0..1usize << k).collect();
                continue;
            }
            let Some(_) = qubits else {
                return Err(format!("line {}: pair before QUBITS header", lineno + 1));
            };
            let i: usize = first.parse().map_err(|_| format!("line {}: bad index {first:?}", lineno + 1))?;
            let j: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| format!("line {}: expected an index pair", lineno + 1))?;
            if i >= map.len() || j >= map.len() {
                return Err(format!("line {}: index out of range", lineno + 1));
            }
            map[i] = j;
        }
        if qubits.is_none() {
            return Err("missing QUBITS header".into());
        }
        Permutation::new(map).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    /// Control, target.
    Cnot,
    Cz,
    Swap,
    /// Control, control, target.
    Toffoli,
    Perm(Arc<Permutation>),
    Unitary(Arc<DMatrix<C64>>),
}

impl Gate {
    pub fn perm(p: Permutation) -> Self {
        Gate::Perm(Arc::new(p))
    }

    pub fn unitary(m: DMatrix<C64>) -> Result<Self, CircuitError> {
        is_power_of_two_dim(m.nrows())
            .filter(|_| m.nrows() == m.ncols())
            .ok_or_else(|| CircuitError::InvalidGate("matrix dimension is not a power of two".into()))?;
        let dev = unitarity_deviation(&m);
        if dev > 1e-10 {
            return Err(CircuitError::InvalidGate(format!("matrix is not unitary (deviation {dev:e})")));
        }
        Ok(Gate::Unitary(Arc::new(m)))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::H => "H",
            Gate::S => "S",
            Gate::Sdg => "SDG",
            Gate::T => "T",
            Gate::Tdg => "TDG",
            Gate::Cnot => "CNOT",
            Gate::Cz => "CZ",
            Gate::Swap => "SWAP",
            Gate::Toffoli => "TOFFOLI",
            Gate::Perm(_) => "PERM",
            Gate::Unitary(_) => "UNITARY",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Gate::X | Gate::Y | Gate::Z | Gate::H | Gate::S | Gate::Sdg | Gate::T | Gate::Tdg => 1,
            Gate::Cnot | Gate::Cz | Gate::Swap => 2,
            Gate::Toffoli => 3,
            Gate::Perm(p) => p.num_qubits(),
            Gate::Unitary(m) => m.nrows().trailing_zeros() as usize,
        }
    }

    /// Maps computational basis states to computational basis states without
    /// phases.
    pub fn is_classical(&self) -> bool {
        matches!(self, Gate::X | Gate::Cnot | Gate::Swap | Gate::Toffoli | Gate::Perm(_))
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            Gate::T => Gate::Tdg,
            Gate::Tdg => Gate::T,
            Gate::Perm(p) => Gate::Perm(Arc::new(p.inverse())),
            Gate::Unitary(m) => Gate::Unitary(Arc::new(m.adjoint())),
            g => g.clone(),
        }
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let i = C64::new(0.0, 1.0);
        match self {
            Gate::H => DMatrix::from_row_slice(2, 2, &[C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)]),
            Gate::Y => DMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
            Gate::Unitary(m) => (**m).clone(),
            g => {
                let (perm, phases) = g.monomial().expect("all other gates are monomial");
                let d = perm.len();
                let mut m = DMatrix::from_element(d, d, ZERO);
                for (col, &row) in perm.iter().enumerate() {
                    m[(row, col)] = phases.as_ref().map_or(ONE, |p| p[row]);
                }
                m
            }
        }
    }

    /// Basis permutation and phases (indexed by image) for gates that map
    /// basis states to multiples of basis states.
    pub fn monomial(&self) -> Option<(Vec<usize>, Option<Vec<C64>>)> {
        let i = C64::new(0.0, 1.0);
        let t = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let diag = |d: Vec<C64>| Some(((0..d.len()).collect(), Some(d)));
        match self {
            Gate::X => Some((vec![1, 0], None)),
            Gate::Y => Some((vec![1, 0], Some(vec![-i, i]))),
            Gate::Z => diag(vec![ONE, -ONE]),
            Gate::S => diag(vec![ONE, i]),
            Gate::Sdg => diag(vec![ONE, -i]),
            Gate::T => diag(vec![ONE, t]),
            Gate::Tdg => diag(vec![ONE, t.conj()]),
            Gate::Cnot => Some((vec![0, 1, 3, 2], None)),
            Gate::Cz => diag(vec![ONE, ONE, ONE, -ONE]),
            Gate::Swap => Some((vec![0, 2, 1, 3], None)),
            Gate::Toffoli => Some((vec![0, 1, 2, 3, 4, 5, 7, 6], None)),
            Gate::Perm(p) => Some((p.map().to_vec(), None)),
            Gate::H | Gate::Unitary(_) => None,
        }
    }

    /// Image of a basis index under a classical gate.
    pub fn apply_basis(&self, index: u64, num_qubits: usize, targets: &[usize]) -> u64 {
        let bit = |q: usize| (index >> bit_position(num_qubits, q)) & 1 == 1;
        let flip = |idx: u64, q: usize| idx ^ (1u64 << bit_position(num_qubits, q));
        match self {
            Gate::X => flip(index, targets[0]),
            Gate::Cnot => {
                if bit(targets[0]) {
                    flip(index, targets[1])
                } else {
                    index
                }
            }
            Gate::Toffoli => {
                if bit(targets[0]) && bit(targets[1]) {
                    flip(index, targets[2])
                } else {
                    index
                }
            }
            Gate::Swap => {
                if bit(targets[0]) != bit(targets[1]) {
                    flip(flip(index, targets[0]), targets[1])
                } else {
                    index
                }
            }
            Gate::Perm(p) => {
                let local = gather_local(index, num_qubits, targets);
                scatter_local(index, num_qubits, targets, p.apply(local))
            }
            other => panic!("apply_basis on non-classical gate {}", other.name()),
        }
    }

    pub fn apply_dense(&self, amps: &mut [C64], num_qubits: usize, targets: &[usize]) {
        match self {
            Gate::Perm(p) => apply_permutation_to_amplitudes(amps, num_qubits, targets, p.map()),
            Gate::X | Gate::Cnot | Gate::Swap | Gate::Toffoli => {
                let (perm, _) = self.monomial().expect("classical");
                apply_permutation_to_amplitudes(amps, num_qubits, targets, &perm);
            }
            _ => apply_matrix_to_amplitudes(amps, num_qubits, targets, &self.matrix()),
        }
    }

    pub fn apply_sparse(&self, state: &mut SparseState, targets: &[usize]) {
        if self.is_classical() {
            let n = state.num_qubits();
            state.apply_basis_map(|i| self.apply_basis(i, n, targets));
        } else if let Some((perm, phases)) = self.monomial() {
            state.apply_local_permutation(targets, &perm, phases.as_deref());
        } else {
            state.apply_matrix(targets, &self.matrix());
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::linalg::unitarity_deviation;

    #[test]
    fn fixed_gates_are_unitary_and_invertible() {
        let gates = [
            Gate::X, Gate::Y, Gate::Z, Gate::H, Gate::S, Gate::Sdg, Gate::T, Gate::Tdg, Gate::Cnot, Gate::Cz,
            Gate::Swap, Gate::Toffoli,
        ];
        for g in gates {
            let m = g.matrix();
            assert!(unitarity_deviation(&m) < 1e-14, "{g}");
            let prod = g.inverse().matrix() * &m;
            assert!((prod - DMatrix::identity(m.nrows(), m.nrows())).iter().all(|z| z.norm() < 1e-14), "{g}");
        }
    }

    #[test]
    fn classical_basis_action_matches_matrix() {
        for g in [Gate::X, Gate::Cnot, Gate::Swap, Gate::Toffoli] {
            let k = g.arity();
            let targets: Vec<usize> = (0..k).collect();
            let m = g.matrix();
            for col in 0..1u64 << k {
                let row = g.apply_basis(col, k, &targets) as usize;
                assert_eq!(m[(row, col as usize)], ONE);
            }
        }
    }

    #[test]
    fn permutation_text_roundtrip() {
        let p = Permutation::new(vec![2, 0, 1, 3]).unwrap();
        assert_eq!(Permutation::parse(&p.to_text()).unwrap(), p);
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::parse("0 1\n").is_err());
    }
}
