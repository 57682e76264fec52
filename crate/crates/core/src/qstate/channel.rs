use nalgebra::DMatrix;

use super::linalg::{check_targets, hermitian_eigen, hermitian_eigenvalues, C64, ONE, ZERO};
use super::state::{DensityMatrix, PSD_TOL, UNITARY_TOL};
use super::QStateError;

/// A CPTP map in Kraus form, `rho -> sum_k K rho K^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    in_qubits: usize,
    out_qubits: usize,
    kraus: Vec<DMatrix<C64>>,
}

/// Outcome of the Choi-based CPTP check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpCertificate {
    pub min_choi_eigenvalue: f64,
    pub trace_preservation_error: f64,
}

impl CptpCertificate {
    pub fn is_cptp(&self) -> bool {
        self.min_choi_eigenvalue >= -PSD_TOL && self.trace_preservation_error <= PSD_TOL
    }
}

impl QuantumChannel {
    pub fn new(in_qubits: usize, out_qubits: usize, kraus: Vec<DMatrix<C64>>) -> Result<Self, QStateError> {
        let (din, dout) = (1usize << in_qubits, 1usize << out_qubits);
        if kraus.is_empty() {
            return Err(QStateError::NotCptp("empty Kraus family".into()));
        }
        for k in &kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(QStateError::DimensionMismatch { expected: dout, found: k.nrows() });
            }
        }
        let ch = Self { in_qubits, out_qubits, kraus };
        let cert = ch.certify();
        if !cert.is_cptp() {
            return Err(QStateError::NotCptp(format!(
                "min Choi eigenvalue {:e}, trace-preservation error {:e}",
                cert.min_choi_eigenvalue, cert.trace_preservation_error
            )));
        }
        Ok(ch)
    }

    pub fn identity(num_qubits: usize) -> Self {
        let d = 1usize << num_qubits;
        Self { in_qubits: num_qubits, out_qubits: num_qubits, kraus: vec![DMatrix::identity(d, d)] }
    }

    pub fn unitary(u: DMatrix<C64>) -> Result<Self, QStateError> {
        let n = super::linalg::is_power_of_two_dim(u.nrows()).ok_or(QStateError::NotPowerOfTwo { found: u.nrows() })?;
        let dev = super::linalg::unitarity_deviation(&u);
        if dev > UNITARY_TOL {
            return Err(QStateError::NotUnitary(dev));
        }
        Ok(Self { in_qubits: n, out_qubits: n, kraus: vec![u] })
    }

    /// Computational-basis measurement with the outcome discarded.
    pub fn measurement() -> Self {
        let p0 = DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let p1 = DMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
        Self { in_qubits: 1, out_qubits: 1, kraus: vec![p0, p1] }
    }

    /// Same operators as [`measurement`](Self::measurement); named for use as
    /// a noise model.
    pub fn dephasing() -> Self {
        Self::measurement()
    }

    /// `rho -> (1-p) rho + p I/d` on `num_qubits` qubits, via the Pauli twirl.
    pub fn depolarizing(num_qubits: usize, p: f64) -> Result<Self, QStateError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(QStateError::NotCptp(format!("depolarizing parameter {p} outside [0,1]")));
        }
        let paulis = pauli_strings(num_qubits);
        let n = paulis.len() as f64;
        let mut kraus = Vec::with_capacity(paulis.len());
        for (i, pm) in paulis.into_iter().enumerate() {
            let weight = if i == 0 { 1.0 - p + p / n } else { p / n };
            if weight > 0.0 {
                kraus.push(pm * C64::new(weight.sqrt(), 0.0));
            }
        }
        Ok(Self { in_qubits: num_qubits, out_qubits: num_qubits, kraus })
    }

    pub fn completely_depolarizing(num_qubits: usize) -> Self {
        Self::depolarizing(num_qubits, 1.0).expect("p = 1 is valid")
    }

    pub fn amplitude_damping(gamma: f64) -> Result<Self, QStateError> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(QStateError::NotCptp(format!("damping {gamma} outside [0,1]")));
        }
        let k0 = DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, C64::new((1.0 - gamma).sqrt(), 0.0)]);
        let k1 = DMatrix::from_row_slice(2, 2, &[ZERO, C64::new(gamma.sqrt(), 0.0), ZERO, ZERO]);
        Ok(Self { in_qubits: 1, out_qubits: 1, kraus: vec![k0, k1] })
    }

    /// Replacement channel `sigma -> Tr(sigma) eta`.
    pub fn replacement(in_qubits: usize, eta: &DensityMatrix) -> Self {
        let din = 1usize << in_qubits;
        let dout = eta.dim();
        let (values, vectors) = hermitian_eigen(eta.matrix());
        let mut kraus = Vec::new();
        for (a, &lambda) in values.iter().enumerate() {
            if lambda <= 1e-15 {
                continue;
            }
            let v = vectors.column(a) * C64::new(lambda.sqrt(), 0.0);
            for i in 0..din {
                let mut k = DMatrix::from_element(dout, din, ZERO);
                k.set_column(i, &v);
                kraus.push(k);
            }
        }
        Self { in_qubits, out_qubits: eta.num_qubits(), kraus }
    }

    /// Rebuilds a Kraus family from a normalized Choi matrix laid out as
    /// (output, input), the convention of [`choi`](Self::choi).
    pub fn from_choi(in_qubits: usize, out_qubits: usize, choi: &DMatrix<C64>) -> Result<Self, QStateError> {
        let (din, dout) = (1usize << in_qubits, 1usize << out_qubits);
        if choi.nrows() != din * dout {
            return Err(QStateError::DimensionMismatch { expected: din * dout, found: choi.nrows() });
        }
        let (values, vectors) = hermitian_eigen(&(choi * C64::new(din as f64, 0.0)));
        let mut kraus = Vec::new();
        for (a, &lambda) in values.iter().enumerate() {
            if lambda < -PSD_TOL {
                return Err(QStateError::NotCptp(format!("Choi eigenvalue {lambda:e}")));
            }
            if lambda <= 1e-14 {
                continue;
            }
            let v = vectors.column(a);
            let k = DMatrix::from_fn(dout, din, |o, i| v[o * din + i] * C64::new(lambda.sqrt(), 0.0));
            kraus.push(k);
        }
        Self::new(in_qubits, out_qubits, kraus)
    }

    pub fn in_qubits(&self) -> usize {
        self.in_qubits
    }

    pub fn out_qubits(&self) -> usize {
        self.out_qubits
    }

    pub fn kraus(&self) -> &[DMatrix<C64>] {
        &self.kraus
    }

    /// Applies the channel to the whole of `rho`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, QStateError> {
        if rho.num_qubits() != self.in_qubits {
            return Err(QStateError::DimensionMismatch { expected: 1 << self.in_qubits, found: rho.dim() });
        }
        let dout = 1usize << self.out_qubits;
        let mut acc = DMatrix::from_element(dout, dout, ZERO);
        for k in &self.kraus {
            acc += k * rho.matrix() * k.adjoint();
        }
        Ok(DensityMatrix::from_raw(self.out_qubits, acc))
    }

    /// Applies a square channel to `targets` of a larger register.
    pub fn apply_on(&self, targets: &[usize], rho: &DensityMatrix) -> Result<DensityMatrix, QStateError> {
        if self.in_qubits != self.out_qubits || targets.len() != self.in_qubits {
            return Err(QStateError::DimensionMismatch { expected: self.in_qubits, found: targets.len() });
        }
        check_targets(rho.num_qubits(), targets)?;
        Ok(rho.apply_kraus(&self.kraus, targets))
    }

    /// Normalized Choi matrix `(1/d) sum_ij Phi(|i><j|) (x) |i><j|`, output
    /// register first.
    pub fn choi(&self) -> DMatrix<C64> {
        let (din, dout) = (1usize << self.in_qubits, 1usize << self.out_qubits);
        let mut j = DMatrix::from_element(dout * din, dout * din, ZERO);
        let scale = 1.0 / din as f64;
        for k in &self.kraus {
            // Column vector v[o*din + i] = K[o, i]; J += v v^dagger.
            for a in 0..dout * din {
                let va = k[(a / din, a % din)];
                if va == ZERO {
                    continue;
                }
                for b in 0..dout * din {
                    let vb = k[(b / din, b % din)];
                    j[(a, b)] += va * vb.conj() * scale;
                }
            }
        }
        j
    }

    pub fn certify(&self) -> CptpCertificate {
        certify_choi(&self.choi(), self.in_qubits, self.out_qubits)
    }
}

/// CPTP check from a normalized Choi matrix: positivity and
/// `d * Tr_out J = I_in`.
pub fn certify_choi(choi: &DMatrix<C64>, in_qubits: usize, out_qubits: usize) -> CptpCertificate {
    let (din, dout) = (1usize << in_qubits, 1usize << out_qubits);
    let min_eig = hermitian_eigenvalues(choi).into_iter().fold(f64::INFINITY, f64::min);
    let mut err: f64 = 0.0;
    for i in 0..din {
        for k in 0..din {
            let mut acc = ZERO;
            for o in 0..dout {
                acc += choi[(o * din + i, o * din + k)];
            }
            let target = if i == k { 1.0 } else { 0.0 };
            err = err.max((acc * C64::new(din as f64, 0.0) - C64::new(target, 0.0)).norm());
        }
    }
    CptpCertificate { min_choi_eigenvalue: min_eig, trace_preservation_error: err }
}

/// All `4^n` Pauli strings, identity first, in base-4 order (I, X, Y, Z per
/// qubit, qubit 0 most significant).
pub fn pauli_strings(num_qubits: usize) -> Vec<DMatrix<C64>> {
    let singles = single_paulis();
    (0..1usize << (2 * num_qubits))
        .map(|code| {
            let mut m = DMatrix::identity(1, 1);
            for q in 0..num_qubits {
                let digit = (code >> (2 * (num_qubits - 1 - q))) & 3;
                m = m.kronecker(&singles[digit]);
            }
            m
        })
        .collect()
}

pub(crate) fn single_paulis() -> [DMatrix<C64>; 4] {
    let i = C64::new(0.0, 1.0);
    [
        DMatrix::identity(2, 2),
        DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        DMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
        DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{trace_distance, PureState};

    #[test]
    fn measurement_dephases_plus_state() {
        let plus = PureState::normalized(nalgebra::DVector::from_vec(vec![ONE, ONE])).unwrap();
        let out = QuantumChannel::measurement().apply(&plus.to_density()).unwrap();
        let half = DensityMatrix::maximally_mixed(1);
        assert!(trace_distance(&out, &half).unwrap() < 1e-15);
    }

    #[test]
    fn identity_choi_is_bell_projector() {
        let j = QuantumChannel::identity(1).choi();
        for a in 0..4 {
            for b in 0..4 {
                let expected = if (a == 0 || a == 3) && (b == 0 || b == 3) { 0.5 } else { 0.0 };
                assert!((j[(a, b)] - C64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn completely_depolarizing_choi_is_maximally_mixed() {
        let j = QuantumChannel::completely_depolarizing(1).choi();
        let target = DMatrix::<C64>::identity(4, 4) * C64::new(0.25, 0.0);
        assert!((j - target).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn non_trace_preserving_family_rejected() {
        let k = DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        assert!(matches!(QuantumChannel::new(1, 1, vec![k]), Err(QStateError::NotCptp(_))));
    }

    #[test]
    fn choi_roundtrip_recovers_channel_action() {
        let ch = QuantumChannel::amplitude_damping(0.3).unwrap();
        let rebuilt = QuantumChannel::from_choi(1, 1, &ch.choi()).unwrap();
        let rho = DensityMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.4, 0.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), C64::new(0.6, 0.0)],
        ))
        .unwrap();
        let a = ch.apply(&rho).unwrap();
        let b = rebuilt.apply(&rho).unwrap();
        assert!(trace_distance(&a, &b).unwrap() < 1e-12);
    }
}
