use nalgebra::{DMatrix, DVector};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use super::linalg::{
    self, apply_matrix_to_amplitudes, check_targets, conjugate_density, hermiticity_deviation,
    hermitian_eigenvalues, is_power_of_two_dim, unitarity_deviation, C64, ONE, ZERO,
};
use super::QStateError;

pub(crate) const NORM_TOL: f64 = 1e-12;
pub(crate) const UNITARY_TOL: f64 = 1e-10;
pub(crate) const PSD_TOL: f64 = 1e-10;

/// A normalized state vector on `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self, QStateError> {
        let num_qubits = is_power_of_two_dim(amplitudes.len())
            .ok_or(QStateError::NotPowerOfTwo { found: amplitudes.len() })?;
        let norm_sqr = amplitudes.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(QStateError::NotNormalized(norm_sqr));
        }
        Ok(Self { num_qubits, amplitudes })
    }

    /// Normalizes `amplitudes` before wrapping them.
    pub fn normalized(amplitudes: DVector<C64>) -> Result<Self, QStateError> {
        let n = amplitudes.norm();
        if n == 0.0 {
            return Err(QStateError::NotNormalized(0.0));
        }
        Self::new(amplitudes.map(|a| a / n))
    }

    pub(crate) fn from_raw(num_qubits: usize, amplitudes: DVector<C64>) -> Self {
        Self { num_qubits, amplitudes }
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = DVector::from_element(1 << num_qubits, ZERO);
        amps[index] = ONE;
        Self { num_qubits, amplitudes: amps }
    }

    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    /// `c` Bell pairs `(|00> + |11>)/sqrt 2`, with qubit `i` of the first
    /// half paired to qubit `c + i`.
    pub fn epr_pairs(c: usize) -> Self {
        let d = 1usize << c;
        let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        let mut amps = DVector::from_element(d * d, ZERO);
        for i in 0..d {
            amps[i * d + i] = amp;
        }
        Self { num_qubits: 2 * c, amplitudes: amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let d2 = other.amplitudes.len();
        let amps = DVector::from_fn(self.amplitudes.len() * d2, |i, _| {
            self.amplitudes[i / d2] * other.amplitudes[i % d2]
        });
        PureState { num_qubits: self.num_qubits + other.num_qubits, amplitudes: amps }
    }

    pub fn apply_unitary(&self, u: &DMatrix<C64>, targets: &[usize]) -> Result<PureState, QStateError> {
        validate_gate(u, targets, self.num_qubits)?;
        let mut out = self.clone();
        apply_matrix_to_amplitudes(out.amplitudes.as_mut_slice(), self.num_qubits, targets, u);
        Ok(out)
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix { num_qubits: self.num_qubits, matrix: m }
    }

    /// Reduced density matrix on `keep` (in the given order) without forming
    /// the full projector.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix, QStateError> {
        if keep.is_empty() {
            return Err(QStateError::EmptyKeep);
        }
        check_targets(self.num_qubits, keep)?;
        let n = self.num_qubits;
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let dk = 1usize << keep.len();
        let dt = 1usize << traced.len();
        let (_, keep_offsets) = linalg::local_offsets(n, keep);
        let (_, traced_offsets) = linalg::local_offsets(n, &traced);
        let mut out = DMatrix::from_element(dk, dk, ZERO);
        let mut column = vec![ZERO; dk];
        for t in 0..dt {
            let base = traced_offsets[t];
            for (i, off) in keep_offsets.iter().enumerate() {
                column[i] = self.amplitudes[base | off];
            }
            for j in 0..dk {
                let cj = column[j].conj();
                if cj == ZERO {
                    continue;
                }
                for i in 0..dk {
                    out[(i, j)] += column[i] * cj;
                }
            }
        }
        Ok(DensityMatrix { num_qubits: keep.len(), matrix: out })
    }

    /// Probability that `qubit` is measured as 1.
    pub fn probability_one(&self, qubit: usize) -> f64 {
        let pos = linalg::bit_position(self.num_qubits, qubit);
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i >> pos) & 1 == 1)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// A density matrix on `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-12) and positivity
    /// (eigenvalues >= -1e-10).
    pub fn new(matrix: DMatrix<C64>) -> Result<Self, QStateError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(QStateError::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let num_qubits =
            is_power_of_two_dim(matrix.nrows()).ok_or(QStateError::NotPowerOfTwo { found: matrix.nrows() })?;
        let herm = hermiticity_deviation(&matrix);
        if herm > NORM_TOL {
            return Err(QStateError::InvalidDensity(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(QStateError::InvalidDensity(format!("trace {tr} != 1")));
        }
        let min_eig = hermitian_eigenvalues(&matrix).into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(QStateError::InvalidDensity(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { num_qubits, matrix })
    }

    pub(crate) fn from_raw(num_qubits: usize, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), 1 << num_qubits);
        Self { num_qubits, matrix }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let d = 1usize << num_qubits;
        Self { num_qubits, matrix: DMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0) }
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        PureState::basis(num_qubits, index).to_density()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            num_qubits: self.num_qubits + other.num_qubits,
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    pub fn apply_unitary(&self, u: &DMatrix<C64>, targets: &[usize]) -> Result<DensityMatrix, QStateError> {
        validate_gate(u, targets, self.num_qubits)?;
        let mut out = self.clone();
        conjugate_density(&mut out.matrix, self.num_qubits, targets, u);
        Ok(out)
    }

    /// `sum_k K rho K^dagger` for operators acting on `targets`; the caller
    /// guarantees the family is trace preserving.
    pub(crate) fn apply_kraus(&self, kraus: &[DMatrix<C64>], targets: &[usize]) -> DensityMatrix {
        let d = self.dim();
        let mut acc = DMatrix::from_element(d, d, ZERO);
        for k in kraus {
            let mut term = self.matrix.clone();
            conjugate_density(&mut term, self.num_qubits, targets, k);
            acc += term;
        }
        DensityMatrix { num_qubits: self.num_qubits, matrix: acc }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix, QStateError> {
        if keep.is_empty() {
            return Err(QStateError::EmptyKeep);
        }
        check_targets(self.num_qubits, keep)?;
        let n = self.num_qubits;
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let dk = 1usize << keep.len();
        let (_, keep_offsets) = linalg::local_offsets(n, keep);
        let (_, traced_offsets) = linalg::local_offsets(n, &traced);
        let mut out = DMatrix::from_element(dk, dk, ZERO);
        for t in &traced_offsets {
            for j in 0..dk {
                for i in 0..dk {
                    out[(i, j)] += self.matrix[(t | keep_offsets[i], t | keep_offsets[j])];
                }
            }
        }
        Ok(DensityMatrix { num_qubits: keep.len(), matrix: out })
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn probability_one(&self, qubit: usize) -> f64 {
        let pos = linalg::bit_position(self.num_qubits, qubit);
        (0..self.dim()).filter(|i| (i >> pos) & 1 == 1).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Expectation of a rank-1 projector, `<psi|rho|psi>`.
    pub fn fidelity_with_pure(&self, psi: &PureState) -> f64 {
        let v = psi.amplitudes();
        (v.adjoint() * &self.matrix * v)[(0, 0)].re
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("DensityMatrix", 2)?;
        s.serialize_field("num_qubits", &self.num_qubits)?;
        s.serialize_field("matrix", &MatrixRows(&self.matrix))?;
        s.end()
    }
}

/// Row-major `[[ [re, im], ... ], ...]` view of a complex matrix.
pub struct MatrixRows<'a>(pub &'a DMatrix<C64>);

impl Serialize for MatrixRows<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.0.nrows())
            .map(|i| (0..self.0.ncols()).map(|j| [self.0[(i, j)].re, self.0[(i, j)].im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

/// Either kind of state; used where an operation accepts both.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn num_qubits(&self) -> usize {
        match self {
            QuantumState::Pure(p) => p.num_qubits(),
            QuantumState::Mixed(m) => m.num_qubits(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            QuantumState::Pure(p) => p.to_density(),
            QuantumState::Mixed(m) => m.clone(),
        }
    }
}

/// Kronecker product; `a` occupies the low-index (most significant) qubits.
pub fn tensor(a: &QuantumState, b: &QuantumState) -> Result<QuantumState, QStateError> {
    match (a, b) {
        (QuantumState::Pure(x), QuantumState::Pure(y)) => Ok(QuantumState::Pure(x.tensor(y))),
        (QuantumState::Mixed(x), QuantumState::Mixed(y)) => Ok(QuantumState::Mixed(x.tensor(y))),
        _ => Err(QStateError::KindMismatch),
    }
}

/// Applies `u` to `targets` of either kind of state.
pub fn apply_unitary(u: &DMatrix<C64>, targets: &[usize], state: &QuantumState) -> Result<QuantumState, QStateError> {
    match state {
        QuantumState::Pure(p) => p.apply_unitary(u, targets).map(QuantumState::Pure),
        QuantumState::Mixed(m) => m.apply_unitary(u, targets).map(QuantumState::Mixed),
    }
}

/// Normalized trace distance `1/2 Tr|rho - sigma|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QStateError> {
    if rho.dim() != sigma.dim() {
        return Err(QStateError::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    Ok(matrix_trace_distance(rho.matrix(), sigma.matrix()))
}

pub(crate) fn matrix_trace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let diff = a - b;
    (0.5 * linalg::trace_norm_hermitian(&diff)).clamp(0.0, 1.0)
}

/// Optimal success probability for discriminating two equiprobable states.
pub fn helstrom_success(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64, QStateError> {
    Ok(0.5 + 0.5 * trace_distance(rho1, rho2)?)
}

fn validate_gate(u: &DMatrix<C64>, targets: &[usize], num_qubits: usize) -> Result<(), QStateError> {
    check_targets(num_qubits, targets)?;
    let expected = 1usize << targets.len();
    if u.nrows() != expected || u.ncols() != expected {
        return Err(QStateError::DimensionMismatch { expected, found: u.nrows() });
    }
    let dev = unitarity_deviation(u);
    if dev > UNITARY_TOL {
        return Err(QStateError::NotUnitary(dev));
    }
    Ok(())
}
