//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use catalyst_core::catalytic::{CatalyticCircuit, CircuitMode, Gate};
use catalyst_core::qstate::random::random_unitary;
use catalyst_core::qstate::QuantumChannel;
use catalyst_core::regprog::{threshold_program, RegisterProgram, TruthTable};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn maj3_program() -> RegisterProgram {
    threshold_program(3, 2, 5).unwrap()
}

pub fn maj3() -> TruthTable {
    TruthTable::majority(3)
}

pub fn bits(row: usize, n: usize) -> Vec<bool> {
    (0..n).map(|k| (row >> (n - 1 - k)) & 1 == 1).collect()
}

fn phase(theta: f64) -> DMatrix<Complex64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, theta)]))
}

/// A labelled circuit with its intended verdict.
pub struct Case {
    pub name: &'static str,
    pub circuit: CatalyticCircuit,
    pub catalytic: bool,
}

fn build(s: usize, c: usize, mode: CircuitMode, f: impl FnOnce(&mut CatalyticCircuit)) -> CatalyticCircuit {
    let mut circ = CatalyticCircuit::new(s, c, 0, mode).unwrap();
    f(&mut circ);
    circ
}

/// Small circuits (`s <= 2`, `c <= 3`) with known verdicts. General-mode
/// entries keep `s + 2c <= 7` so the density engine can take a reference.
pub fn corpus() -> Vec<Case> {
    use CircuitMode::{General, Unitary};
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let v2 = random_unitary(2, &mut rng);
    let w1 = random_unitary(1, &mut rng);
    let v1 = random_unitary(1, &mut rng);
    let g = |circ: &mut CatalyticCircuit, gate: Gate, t: &[usize]| {
        circ.gate(gate, t).unwrap();
    };
    let u = |m: &DMatrix<Complex64>| Gate::unitary(m.clone()).unwrap();
    let mut cases = vec![
        Case { name: "empty", circuit: build(1, 1, Unitary, |_| {}), catalytic: true },
        Case { name: "h-h on catalyst", circuit: build(1, 1, Unitary, |c| { g(c, Gate::H, &[1]); g(c, Gate::H, &[1]); }), catalytic: true },
        Case { name: "work-only gates", circuit: build(1, 2, Unitary, |c| { g(c, Gate::X, &[0]); g(c, Gate::H, &[0]); g(c, Gate::T, &[0]); }), catalytic: true },
        Case { name: "v, work, v-dagger", circuit: build(2, 2, Unitary, |c| {
            g(c, u(&v2), &[2, 3]);
            g(c, Gate::Cnot, &[0, 1]);
            g(c, u(&v2.adjoint()), &[2, 3]);
        }), catalytic: true },
        Case { name: "random work unitary", circuit: build(1, 3, Unitary, |c| g(c, u(&w1), &[0])), catalytic: true },
        Case { name: "double swap", circuit: build(1, 3, Unitary, |c| { g(c, Gate::Swap, &[1, 3]); g(c, Gate::Swap, &[1, 3]); }), catalytic: true },
        Case { name: "toffoli twice", circuit: build(1, 3, Unitary, |c| { g(c, Gate::Toffoli, &[1, 2, 3]); g(c, Gate::Toffoli, &[1, 2, 3]); }), catalytic: true },
        Case { name: "controlled on clean zero", circuit: build(1, 2, Unitary, |c| { g(c, Gate::Cnot, &[0, 1]); g(c, Gate::Cz, &[0, 2]); }), catalytic: true },
        Case { name: "phase and inverse", circuit: build(2, 1, Unitary, |c| {
            g(c, u(&phase(PI / 5.0)), &[2]);
            g(c, Gate::H, &[1]);
            g(c, u(&phase(-PI / 5.0)), &[2]);
        }), catalytic: true },
        Case { name: "measure work", circuit: build(1, 1, General, |c| { g(c, Gate::H, &[0]); c.measure(0).unwrap(); }), catalytic: true },
        Case { name: "noisy work, conjugated catalyst", circuit: build(1, 2, General, |c| {
            g(c, u(&v1), &[1]);
            c.channel(QuantumChannel::depolarizing(1, 0.3).unwrap(), &[0]).unwrap();
            g(c, u(&v1.adjoint()), &[1]);
        }), catalytic: true },
        Case { name: "compute-uncompute into work", circuit: build(2, 2, Unitary, |c| {
            g(c, Gate::Cnot, &[2, 1]);
            g(c, Gate::Cnot, &[3, 1]);
            g(c, Gate::X, &[0]);
            g(c, Gate::Cnot, &[3, 1]);
            g(c, Gate::Cnot, &[2, 1]);
        }), catalytic: true },
    ];
    let v3 = random_unitary(1, &mut rng);
    cases.extend([
        Case { name: "x on catalyst", circuit: build(1, 1, Unitary, |c| g(c, Gate::X, &[1])), catalytic: false },
        Case { name: "h on catalyst", circuit: build(1, 2, Unitary, |c| g(c, Gate::H, &[2])), catalytic: false },
        Case { name: "copy catalyst to work", circuit: build(1, 1, Unitary, |c| g(c, Gate::Cnot, &[1, 0])), catalytic: false },
        Case { name: "swap work and catalyst", circuit: build(1, 1, Unitary, |c| g(c, Gate::Swap, &[0, 1])), catalytic: false },
        Case { name: "measure catalyst", circuit: build(1, 1, General, |c| { c.measure(1).unwrap(); }), catalytic: false },
        Case { name: "z on catalyst", circuit: build(1, 1, Unitary, |c| g(c, Gate::Z, &[1])), catalytic: false },
        Case { name: "t on catalyst", circuit: build(2, 1, Unitary, |c| g(c, Gate::T, &[2])), catalytic: false },
        Case { name: "random catalyst unitary", circuit: build(1, 1, Unitary, |c| g(c, u(&v3), &[1])), catalytic: false },
        Case { name: "cnot inside catalyst", circuit: build(1, 2, Unitary, |c| g(c, Gate::Cnot, &[1, 2])), catalytic: false },
        Case { name: "depolarize catalyst", circuit: build(1, 2, General, |c| {
            c.channel(QuantumChannel::depolarizing(1, 0.1).unwrap(), &[2]).unwrap();
        }), catalytic: false },
        Case { name: "tiny rotation", circuit: build(1, 1, Unitary, |c| g(c, u(&phase(1e-3)), &[1])), catalytic: false },
    ]);
    cases
}
