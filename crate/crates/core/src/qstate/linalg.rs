//! Dense kernels shared by the state, channel and simulator code.
//!
//! Qubit ordering: qubit 0 is the most significant bit of the basis-state
//! integer. For a gate on `targets`, `targets[0]` is the most significant bit
//! of the gate's local index.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::QStateError;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Bit position (from the least significant end) of `qubit` in an
/// `num_qubits`-qubit basis index.
#[inline]
pub fn bit_position(num_qubits: usize, qubit: usize) -> usize {
    num_qubits - 1 - qubit
}

pub fn is_power_of_two_dim(dim: usize) -> Option<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        None
    } else {
        Some(dim.trailing_zeros() as usize)
    }
}

pub fn check_targets(num_qubits: usize, targets: &[usize]) -> Result<(), QStateError> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= num_qubits {
            return Err(QStateError::QubitOutOfRange { index: t, num_qubits });
        }
        if targets[..i].contains(&t) {
            return Err(QStateError::DuplicateTarget(t));
        }
    }
    Ok(())
}

/// Global offsets for each local index of a gate acting on `targets`.
pub fn local_offsets(num_qubits: usize, targets: &[usize]) -> (usize, Vec<usize>) {
    let k = targets.len();
    let shifts: Vec<usize> = targets.iter().map(|&q| bit_position(num_qubits, q)).collect();
    let mask = shifts.iter().fold(0usize, |acc, &s| acc | (1 << s));
    let offsets = (0..1usize << k)
        .map(|local| {
            shifts.iter().enumerate().fold(0usize, |acc, (i, &s)| {
                if (local >> (k - 1 - i)) & 1 == 1 {
                    acc | (1 << s)
                } else {
                    acc
                }
            })
        })
        .collect();
    (mask, offsets)
}

/// Extracts the local index of `targets` from a global basis index.
#[inline]
pub fn gather_local(index: u64, num_qubits: usize, targets: &[usize]) -> usize {
    let k = targets.len();
    let mut local = 0usize;
    for (i, &q) in targets.iter().enumerate() {
        let bit = (index >> bit_position(num_qubits, q)) & 1;
        local |= (bit as usize) << (k - 1 - i);
    }
    local
}

/// Writes the local index back into the `targets` bits of a global index.
#[inline]
pub fn scatter_local(index: u64, num_qubits: usize, targets: &[usize], local: usize) -> u64 {
    let k = targets.len();
    let mut out = index;
    for (i, &q) in targets.iter().enumerate() {
        let pos = bit_position(num_qubits, q);
        let bit = ((local >> (k - 1 - i)) & 1) as u64;
        out = (out & !(1u64 << pos)) | (bit << pos);
    }
    out
}

/// `amps <- (M on targets) amps`. `m` may be any square matrix of the right
/// size; unitarity is the caller's concern.
pub fn apply_matrix_to_amplitudes(
    amps: &mut [C64],
    num_qubits: usize,
    targets: &[usize],
    m: &DMatrix<C64>,
) {
    let dim = 1usize << targets.len();
    debug_assert_eq!(m.nrows(), dim);
    let (mask, offsets) = local_offsets(num_qubits, targets);
    let mut buf = vec![ZERO; dim];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (l, off) in offsets.iter().enumerate() {
            buf[l] = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (c, b) in buf.iter().enumerate() {
                acc += m[(r, c)] * b;
            }
            amps[base | off] = acc;
        }
    }
}

/// Applies a basis permutation `local -> perm[local]` on `targets`.
pub fn apply_permutation_to_amplitudes(
    amps: &mut [C64],
    num_qubits: usize,
    targets: &[usize],
    perm: &[usize],
) {
    let dim = perm.len();
    let (mask, offsets) = local_offsets(num_qubits, targets);
    let mut buf = vec![ZERO; dim];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (l, off) in offsets.iter().enumerate() {
            buf[l] = amps[base | off];
        }
        for (l, b) in buf.iter().enumerate() {
            amps[base | offsets[perm[l]]] = *b;
        }
    }
}

/// `rho <- M rho M^dagger` with `M` acting on `targets`.
pub fn conjugate_density(rho: &mut DMatrix<C64>, num_qubits: usize, targets: &[usize], m: &DMatrix<C64>) {
    left_apply(rho, num_qubits, targets, m);
    rho.adjoint_mut();
    left_apply(rho, num_qubits, targets, m);
    rho.adjoint_mut();
}

/// `rho <- M rho` column by column.
pub fn left_apply(rho: &mut DMatrix<C64>, num_qubits: usize, targets: &[usize], m: &DMatrix<C64>) {
    let d = rho.nrows();
    let data = rho.as_mut_slice();
    for col in data.chunks_mut(d) {
        apply_matrix_to_amplitudes(col, num_qubits, targets, m);
    }
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let prod = u.adjoint() * u;
    let id = DMatrix::<C64>::identity(u.nrows(), u.ncols());
    (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigendecomposition of the Hermitian part `(A + A^dagger)/2`, as
/// eigenvalues and a unitary whose columns are the eigenvectors.
///
/// Basis vectors whose row and column are exactly zero are split off as
/// exact zero eigenpairs. nalgebra's QR iteration occasionally returns
/// non-finite values on large low-rank inputs; such solves are retried on a
/// shifted matrix, which has the same eigenvectors.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let d = m.nrows();
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let support: Vec<usize> = (0..d).filter(|&i| (0..d).any(|j| sym[(i, j)] != ZERO)).collect();
    let k = support.len();
    if k == 0 {
        return (vec![0.0; d], DMatrix::identity(d, d));
    }
    let reduced = DMatrix::from_fn(k, k, |i, j| sym[(support[i], support[j])]);
    let mut eig = SymmetricEigen::new(reduced.clone());
    let finite = |e: &SymmetricEigen<C64, nalgebra::Dyn>| e.eigenvalues.iter().all(|x| x.is_finite()) && e.eigenvectors.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    let mut shift = 1.0 + reduced.iter().map(|z| z.norm()).fold(0.0, f64::max);
    while !finite(&eig) && shift < 1e6 {
        let shifted = &reduced + DMatrix::<C64>::identity(k, k) * C64::new(shift, 0.0);
        eig = SymmetricEigen::new(shifted);
        eig.eigenvalues.iter_mut().for_each(|x| *x -= shift);
        shift *= 3.7;
    }
    let mut values = vec![0.0; d];
    let mut vectors = DMatrix::<C64>::zeros(d, d);
    for (a, &lambda) in eig.eigenvalues.iter().enumerate() {
        values[a] = lambda;
        for (i, &row) in support.iter().enumerate() {
            vectors[(row, a)] = eig.eigenvectors[(i, a)];
        }
    }
    let off: Vec<usize> = (0..d).filter(|i| !support.contains(i)).collect();
    for (a, &row) in off.iter().enumerate() {
        vectors[(row, k + a)] = ONE;
    }
    (values, vectors)
}

/// Eigenvalues of the Hermitian part `(A + A^dagger)/2`.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Schatten-1 norm of a Hermitian matrix.
///
/// Rows that are exactly zero are dropped before the eigensolve, and exactly
/// diagonal inputs skip it entirely; both reductions are exact.
pub fn trace_norm_hermitian(m: &DMatrix<C64>) -> f64 {
    let d = m.nrows();
    let support: Vec<usize> = (0..d)
        .filter(|&i| (0..d).any(|j| m[(i, j)] != ZERO || m[(j, i)] != ZERO))
        .collect();
    if support.is_empty() {
        return 0.0;
    }
    let diagonal = support
        .iter()
        .all(|&i| support.iter().all(|&j| i == j || (m[(i, j)] == ZERO && m[(j, i)] == ZERO)));
    if diagonal {
        return support.iter().map(|&i| m[(i, i)].re.abs()).sum();
    }
    let reduced = if support.len() == d {
        m.clone()
    } else {
        DMatrix::from_fn(support.len(), support.len(), |i, j| m[(support[i], support[j])])
    };
    hermitian_eigenvalues(&reduced).iter().map(|x| x.abs()).sum()
}

/// Trace norm of `sum_i sign_i |v_i><v_i|` given only the Gram matrix
/// `G_ij = <v_i|v_j>` of the vectors. The nonzero spectrum equals that of
/// `G^{1/2} S G^{1/2}`, so the cost depends on the number of vectors rather
/// than on the ambient dimension.
pub fn signed_gram_trace_norm(gram: &DMatrix<C64>, signs: &[f64]) -> f64 {
    let k = gram.nrows();
    if k == 0 {
        return 0.0;
    }
    let root = psd_sqrt(gram);
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        k,
        signs.iter().map(|&x| C64::new(x, 0.0)),
    ));
    let h = &root * s * &root;
    hermitian_eigenvalues(&h).iter().map(|x| x.abs()).sum()
}

/// Positive square root of a PSD Hermitian matrix.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (values, vectors) = hermitian_eigen(m);
    let vals = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(values.len(), values.iter().map(|x| C64::new(x.max(0.0).sqrt(), 0.0))));
    &vectors * vals * vectors.adjoint()
}
