//! Tensor products of single-qubit Pauli eigenstates and the decomposition
//! of arbitrary matrices into rank-1 projectors onto them.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use super::linalg::{is_power_of_two_dim, C64, ONE, ZERO};
use super::state::PureState;
use super::QStateError;

/// One of the six single-qubit Pauli eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliEigenstate {
    /// |0>
    ZPlus,
    /// |1>
    ZMinus,
    /// |+>
    XPlus,
    /// |->
    XMinus,
    /// (|0> + i|1>)/sqrt 2
    YPlus,
    /// (|0> - i|1>)/sqrt 2
    YMinus,
}

impl PauliEigenstate {
    pub const ALL: [PauliEigenstate; 6] = [
        PauliEigenstate::ZPlus,
        PauliEigenstate::ZMinus,
        PauliEigenstate::XPlus,
        PauliEigenstate::XMinus,
        PauliEigenstate::YPlus,
        PauliEigenstate::YMinus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn amplitudes(self) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            PauliEigenstate::ZPlus => [ONE, ZERO],
            PauliEigenstate::ZMinus => [ZERO, ONE],
            PauliEigenstate::XPlus => [C64::new(h, 0.0), C64::new(h, 0.0)],
            PauliEigenstate::XMinus => [C64::new(h, 0.0), C64::new(-h, 0.0)],
            PauliEigenstate::YPlus => [C64::new(h, 0.0), C64::new(0.0, h)],
            PauliEigenstate::YMinus => [C64::new(h, 0.0), C64::new(0.0, -h)],
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            PauliEigenstate::ZPlus => "Z+",
            PauliEigenstate::ZMinus => "Z-",
            PauliEigenstate::XPlus => "X+",
            PauliEigenstate::XMinus => "X-",
            PauliEigenstate::YPlus => "Y+",
            PauliEigenstate::YMinus => "Y-",
        }
    }
}

/// One eigenstate label per qubit, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliEigenstateLabel(pub Vec<PauliEigenstate>);

impl PauliEigenstateLabel {
    pub fn num_qubits(&self) -> usize {
        self.0.len()
    }

    /// The `index`-th label in base-6 order over `num_qubits` qubits.
    pub fn from_index(num_qubits: usize, mut index: usize) -> Self {
        let mut labels = vec![PauliEigenstate::ZPlus; num_qubits];
        for slot in labels.iter_mut().rev() {
            *slot = PauliEigenstate::ALL[index % 6];
            index /= 6;
        }
        Self(labels)
    }

    pub fn to_index(&self) -> usize {
        self.0.iter().fold(0, |acc, l| acc * 6 + l.index())
    }
}

impl fmt::Display for PauliEigenstateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            f.write_str(l.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliEigenstateLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        if !bytes.len().is_multiple_of(2) {
            return Err(format!("malformed Pauli label {s:?}"));
        }
        bytes
            .chunks(2)
            .map(|pair| match pair {
                b"Z+" => Ok(PauliEigenstate::ZPlus),
                b"Z-" => Ok(PauliEigenstate::ZMinus),
                b"X+" => Ok(PauliEigenstate::XPlus),
                b"X-" => Ok(PauliEigenstate::XMinus),
                b"Y+" => Ok(PauliEigenstate::YPlus),
                b"Y-" => Ok(PauliEigenstate::YMinus),
                _ => Err(format!("unknown Pauli eigenstate {:?}", String::from_utf8_lossy(pair))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(PauliEigenstateLabel)
    }
}

pub fn pauli_eigenstate(label: &PauliEigenstateLabel) -> PureState {
    let mut amps = vec![ONE];
    for l in &label.0 {
        let [a0, a1] = l.amplitudes();
        amps = amps.iter().flat_map(|&x| [x * a0, x * a1]).collect();
    }
    PureState::from_raw(label.num_qubits(), DVector::from_vec(amps))
}

/// `M = sum coeff |phi><phi|` over PauliProd projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliProdDecomposition {
    pub num_qubits: usize,
    pub terms: Vec<(PauliEigenstateLabel, C64)>,
}

/// Expands `m` in the Pauli-string basis and rewrites every Pauli factor as
/// a signed pair of eigenstate projectors (`I = Z+ + Z-`, `X = X+ - X-`,
/// `Y = Y+ - Y-`, `Z = Z+ - Z-`).
pub fn pauli_decompose(m: &DMatrix<C64>) -> Result<PauliProdDecomposition, QStateError> {
    if m.nrows() != m.ncols() {
        return Err(QStateError::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    let d = is_power_of_two_dim(m.nrows()).ok_or(QStateError::NotPowerOfTwo { found: m.nrows() })?;
    let dim = 1usize << d;
    let mut coeffs = vec![ZERO; 6usize.pow(d as u32)];
    let i = C64::new(0.0, 1.0);
    for code in 0..1usize << (2 * d) {
        let digits: Vec<usize> = (0..d).map(|q| (code >> (2 * (d - 1 - q))) & 3).collect();
        // Tr(P M) with P having one nonzero per row: P[r, r ^ xmask].
        let mut trace = ZERO;
        for r in 0..dim {
            let mut col = 0usize;
            let mut phase = ONE;
            for (q, &p) in digits.iter().enumerate() {
                let bit = (r >> (d - 1 - q)) & 1;
                let (cbit, ph) = match p {
                    0 => (bit, ONE),
                    1 => (bit ^ 1, ONE),
                    // Y = [[0, -i], [i, 0]]: row 0 -> col 1 with -i, row 1 -> col 0 with i.
                    2 => (bit ^ 1, if bit == 0 { -i } else { i }),
                    _ => (bit, if bit == 0 { ONE } else { -ONE }),
                };
                col |= cbit << (d - 1 - q);
                phase *= ph;
            }
            trace += phase * m[(col, r)];
        }
        let c = trace / dim as f64;
        if c == ZERO {
            continue;
        }
        // Distribute over the 2^d eigenstate products.
        for choice in 0..1usize << d {
            let mut idx = 0usize;
            let mut sign = 1.0;
            for (q, &p) in digits.iter().enumerate() {
                let minus = (choice >> (d - 1 - q)) & 1 == 1;
                let (plus_label, minus_label, minus_sign) = match p {
                    0 => (PauliEigenstate::ZPlus, PauliEigenstate::ZMinus, 1.0),
                    1 => (PauliEigenstate::XPlus, PauliEigenstate::XMinus, -1.0),
                    2 => (PauliEigenstate::YPlus, PauliEigenstate::YMinus, -1.0),
                    _ => (PauliEigenstate::ZPlus, PauliEigenstate::ZMinus, -1.0),
                };
                let label = if minus {
                    sign *= minus_sign;
                    minus_label
                } else {
                    plus_label
                };
                idx = idx * 6 + label.index();
            }
            coeffs[idx] += c * sign;
        }
    }
    let terms = coeffs
        .into_iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 1e-15)
        .map(|(idx, c)| (PauliEigenstateLabel::from_index(d, idx), c))
        .collect();
    Ok(PauliProdDecomposition { num_qubits: d, terms })
}

pub fn pauli_reconstruct(decomposition: &PauliProdDecomposition) -> DMatrix<C64> {
    let dim = 1usize << decomposition.num_qubits;
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for (label, c) in &decomposition.terms {
        let v = pauli_eigenstate(label);
        m += v.amplitudes() * v.amplitudes().adjoint() * *c;
    }
    m
}
