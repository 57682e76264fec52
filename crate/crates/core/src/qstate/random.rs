//! Random states, unitaries and channels for verification and tests.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::channel::QuantumChannel;
use super::linalg::C64;
use super::state::{DensityMatrix, PureState};

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> PureState {
    let v = DVector::from_fn(1 << num_qubits, |_, _| complex_gaussian(rng));
    PureState::normalized(v).expect("gaussian vector is nonzero")
}

/// Full-rank mixed state from the Hilbert-Schmidt (square Ginibre) ensemble,
/// returned together with a purification on `2 * num_qubits` qubits whose
/// second half is the reference.
pub fn random_density_with_purification<R: Rng + ?Sized>(
    num_qubits: usize,
    rng: &mut R,
) -> (DensityMatrix, PureState) {
    let d = 1usize << num_qubits;
    let g = ginibre(d, d, rng);
    let norm_sqr: f64 = g.iter().map(|z| z.norm_sqr()).sum();
    let rho = (&g * g.adjoint()) / C64::new(norm_sqr, 0.0);
    let scale = 1.0 / norm_sqr.sqrt();
    let psi = DVector::from_fn(d * d, |k, _| g[(k / d, k % d)] * scale);
    (
        DensityMatrix::from_raw(num_qubits, hermitize(rho)),
        PureState::from_raw(2 * num_qubits, psi),
    )
}

pub fn random_density<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> DensityMatrix {
    random_density_with_purification(num_qubits, rng).0
}

/// Haar-random unitary via QR with the phase correction on `R`'s diagonal.
pub fn random_unitary<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> DMatrix<C64> {
    let d = 1usize << num_qubits;
    let qr = ginibre(d, d, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Random channel from a Haar isometry into `num_qubits + env_qubits`.
pub fn random_channel<R: Rng + ?Sized>(num_qubits: usize, env_qubits: usize, rng: &mut R) -> QuantumChannel {
    let d = 1usize << num_qubits;
    let e = 1usize << env_qubits;
    let u = random_unitary(num_qubits + env_qubits, rng);
    // Input |psi>|0>_env; output index = sys * e + env.
    let kraus = (0..e)
        .map(|k| DMatrix::from_fn(d, d, |o, i| u[(o * e + k, i * e)]))
        .collect();
    QuantumChannel::new(num_qubits, num_qubits, kraus).expect("isometry yields a CPTP map")
}

fn hermitize(m: DMatrix<C64>) -> DMatrix<C64> {
    let mut out = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = out.trace().re;
    if tr != 0.0 {
        out /= C64::new(tr, 0.0);
    }
    out
}
