use catalyst_core::regprog::{
    circuit_to_program, count_images, gate_program, parse_program, program_to_text, threshold_program, verify_clean, BoolCircuit, BoolGate,
    CleanMode, GateKind, Instruction, Monomial, Polynomial, RegProgError, RegisterProgram, Sign, TruthTable, Wire, DEFAULT_MAX_DEPTH,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BUDGET: u64 = 10_000_000;

fn add(target: usize, input: usize) -> Instruction {
    Instruction::AddInput { target, input, sign: Sign::Plus }
}

fn sub(target: usize, input: usize) -> Instruction {
    Instruction::AddInput { target, input, sign: Sign::Minus }
}

fn poly(target: usize, sign: Sign, factors: &[usize]) -> Instruction {
    Instruction::AddPoly { target, poly: Polynomial::new(vec![Monomial::new(1, factors.iter().map(|&r| (r, 1)))]), sign }
}

/// Every `(x, tau)` pair of a program, in a fixed order.
fn domain(p: u64, m: usize, n: usize) -> impl Iterator<Item = (Vec<bool>, Vec<u64>)> {
    let taus = (p as usize).pow(m as u32);
    (0..1usize << n).flat_map(move |row| {
        let x = TruthTable::row_bits(n, row);
        (0..taus).map(move |mut t| {
            let tau = (0..m)
                .map(|_| {
                    let v = (t % p as usize) as u64;
                    t /= p as usize;
                    v
                })
                .collect();
            (x.clone(), tau)
        })
    })
}

#[test]
fn single_addition() {
    let prog = RegisterProgram::new(5, 1, 1, vec![add(0, 0)]).unwrap();
    assert_eq!(prog.execute(&[true], &[3]).unwrap(), vec![4]);
}

#[test]
fn empty_program_is_identity() {
    let prog = RegisterProgram::new(7, 3, 2, vec![]).unwrap();
    assert_eq!(prog.execute(&[true, false], &[1, 5, 6]).unwrap(), vec![1, 5, 6]);
}

#[test]
fn execute_checks_lengths() {
    let prog = RegisterProgram::new(5, 2, 1, vec![add(0, 0)]).unwrap();
    assert!(matches!(prog.execute(&[true], &[1]), Err(RegProgError::LengthMismatch { expected: 2, found: 1 })));
}

#[test]
fn product_gadget_cleanly_computes_and() {
    // Load x1 into R2 and x2 into R4, then inclusion-exclusion on R2 R4:
    // (t2+x1)(t4+x2) - t2(t4+x2) - (t2+x1)t4 + t2 t4 = x1 x2.
    let prog = RegisterProgram::new(
        5,
        4,
        2,
        vec![
            add(1, 0),
            add(3, 1),
            poly(0, Sign::Plus, &[1, 3]),
            sub(1, 0),
            poly(0, Sign::Minus, &[1, 3]),
            sub(3, 1),
            add(1, 0),
            poly(0, Sign::Minus, &[1, 3]),
            sub(1, 0),
            poly(0, Sign::Plus, &[1, 3]),
        ],
    )
    .unwrap();
    // Brute force against the definition.
    for (x, tau) in domain(5, 4, 2) {
        let mut want = tau.clone();
        want[0] = (want[0] + (x[0] && x[1]) as u64) % 5;
        assert_eq!(prog.execute(&x, &tau).unwrap(), want);
    }
    let cert = verify_clean(&prog, &GateKind::And.truth_table(2), CleanMode::Exhaustive, BUDGET).unwrap();
    assert!(cert.passed && cert.exhaustive);
    assert_eq!(cert.domains_checked, 625 * 4);
}

#[test]
fn reverse_examples() {
    let prog = RegisterProgram::new(5, 1, 1, vec![add(0, 0)]).unwrap();
    assert_eq!(prog.reverse().instructions(), &[sub(0, 0)]);
    let maj = threshold_program(3, 2, 5).unwrap();
    assert_eq!(maj.reverse().reverse(), maj);
    let back = maj.reverse();
    for (x, tau) in domain(5, maj.num_registers(), 3) {
        let mid = maj.execute(&x, &tau).unwrap();
        assert_eq!(back.execute(&x, &mid).unwrap(), tau);
    }
}

#[test]
fn verify_clean_examples() {
    let copy = RegisterProgram::new(5, 1, 1, vec![add(0, 0)]).unwrap();
    assert!(verify_clean(&copy, &TruthTable::from_fn(1, |x| x[0]), CleanMode::Exhaustive, BUDGET).unwrap().passed);

    let sum = RegisterProgram::new(5, 1, 2, vec![add(0, 0), add(0, 1)]).unwrap();
    let cert = verify_clean(&sum, &GateKind::And.truth_table(2), CleanMode::Exhaustive, BUDGET).unwrap();
    assert!(!cert.passed);
    let ce = cert.counterexample.unwrap();
    assert_ne!(ce.got, ce.expected);
    assert_eq!(sum.execute(&ce.x, &ce.tau).unwrap(), ce.got);
    // The textbook counterexample fails too.
    assert_eq!(sum.execute(&[true, false], &[0]).unwrap(), vec![1]);

    let maj = threshold_program(3, 2, 5).unwrap();
    let cert = verify_clean(&maj, &TruthTable::majority(3), CleanMode::Exhaustive, BUDGET).unwrap();
    assert!(cert.passed && cert.exhaustive && !cert.fell_back_to_sampling);
}

#[test]
fn verify_clean_falls_back_when_over_budget() {
    let maj = threshold_program(3, 2, 5).unwrap();
    let cert = verify_clean(&maj, &TruthTable::majority(3), CleanMode::Exhaustive, 100).unwrap();
    assert!(cert.passed && cert.fell_back_to_sampling && !cert.exhaustive);
}

#[test]
fn gate_program_examples() {
    let not = gate_program(GateKind::Not, 1, 5).unwrap();
    assert_eq!(
        not.instructions(),
        &[Instruction::AddPoly { target: 0, poly: Polynomial::constant(1), sign: Sign::Plus }, sub(0, 0)]
    );
    let and = gate_program(GateKind::And, 2, 5).unwrap();
    assert!(verify_clean(&and, &GateKind::And.truth_table(2), CleanMode::Exhaustive, BUDGET).unwrap().passed);
    let th = gate_program(GateKind::Threshold(2), 3, 7).unwrap();
    assert!(verify_clean(&th, &TruthTable::majority(3), CleanMode::Exhaustive, BUDGET).unwrap().passed);
}

#[test]
fn every_small_gate_is_clean() {
    let kinds = [GateKind::And, GateKind::Or, GateKind::Xor, GateKind::Threshold(1), GateKind::Threshold(2)];
    for kind in kinds {
        for fan_in in 2..=3 {
            for p in [5, 7] {
                let prog = gate_program(kind, fan_in, p).unwrap();
                let cert = verify_clean(&prog, &kind.truth_table(fan_in), CleanMode::Exhaustive, BUDGET).unwrap();
                assert!(cert.passed && cert.exhaustive, "{} fan-in {fan_in} over Z_{p}", kind.name());
            }
        }
    }
}

#[test]
fn modulus_must_exceed_fan_in() {
    assert!(matches!(gate_program(GateKind::Or, 3, 3), Err(RegProgError::ModulusTooSmall { modulus: 3, fan_in: 3 })));
    assert!(matches!(RegisterProgram::new(4, 1, 1, vec![]), Err(RegProgError::NotPrime(4))));
}

#[test]
fn self_reading_polynomial_is_rejected() {
    let bad = poly(0, Sign::Plus, &[0, 1]);
    assert!(matches!(RegisterProgram::new(5, 2, 0, vec![bad]), Err(RegProgError::SelfReference { instruction: 0, register: 0 })));
}

fn gate(kind: GateKind, inputs: &[Wire]) -> BoolGate {
    BoolGate { kind, inputs: inputs.to_vec() }
}

#[test]
fn single_gate_circuit_matches_gate_program() {
    let circuit = BoolCircuit { num_inputs: 2, gates: vec![gate(GateKind::Or, &[Wire::Input(0), Wire::Input(1)])], output: 0 };
    let prog = circuit_to_program(&circuit, 5, DEFAULT_MAX_DEPTH).unwrap();
    let direct = gate_program(GateKind::Or, 2, 5).unwrap();
    for (x, tau) in domain(5, direct.num_registers(), 2) {
        let mut wide = tau.clone();
        wide.resize(prog.num_registers(), 0);
        let got = prog.execute(&x, &wide).unwrap();
        assert_eq!(&got[..tau.len()], &direct.execute(&x, &tau).unwrap()[..]);
    }
}

#[test]
fn depth_two_circuit() {
    // MAJ3(x1 AND x2, x2 OR x3, x3)
    let circuit = BoolCircuit {
        num_inputs: 3,
        gates: vec![
            gate(GateKind::And, &[Wire::Input(0), Wire::Input(1)]),
            gate(GateKind::Or, &[Wire::Input(1), Wire::Input(2)]),
            gate(GateKind::Threshold(2), &[Wire::Gate(0), Wire::Gate(1), Wire::Input(2)]),
        ],
        output: 2,
    };
    let depth = circuit.validate().unwrap();
    assert_eq!(depth, 2);
    let direct = |x: &[bool]| [x[0] && x[1], x[1] || x[2], x[2]].iter().filter(|&&b| b).count() >= 2;
    for row in 0..8 {
        let x = TruthTable::row_bits(3, row);
        assert_eq!(circuit.evaluate(&x), direct(&x));
    }
    let prog = circuit_to_program(&circuit, 5, DEFAULT_MAX_DEPTH).unwrap();
    let cert = verify_clean(&prog, &TruthTable::from_fn(3, direct), CleanMode::Sampled { trials: 20_000, seed: 1 }, BUDGET).unwrap();
    assert!(cert.passed);
    let per_gate = 1 + circuit.max_fan_in();
    assert!(prog.num_registers() <= per_gate * (depth + 1));
}

#[test]
fn cyclic_circuit_is_rejected() {
    let circuit = BoolCircuit {
        num_inputs: 1,
        gates: vec![gate(GateKind::And, &[Wire::Input(0), Wire::Gate(1)]), gate(GateKind::Or, &[Wire::Gate(0), Wire::Input(0)])],
        output: 0,
    };
    assert!(matches!(circuit_to_program(&circuit, 5, DEFAULT_MAX_DEPTH), Err(RegProgError::Cyclic(_))));
}

#[test]
fn text_diagnostics_carry_line_numbers() {
    let err = parse_program("MODULUS 5\nREGISTERS 2\nINPUTS 1\nADD r1 x1\nMUL r1 x1\n").unwrap_err();
    assert!(matches!(err, RegProgError::Parse { line: 5, .. }), "{err}");
}

/// Random valid program from a seed.
fn random_program(seed: u64) -> RegisterProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = [2u64, 3, 5, 7][rng.random_range(0..4)];
    let m = rng.random_range(1..=4usize);
    let n = rng.random_range(1..=3usize);
    let len = rng.random_range(0..=8usize);
    let instructions = (0..len)
        .map(|_| {
            let target = rng.random_range(0..m);
            let sign = if rng.random_bool(0.5) { Sign::Plus } else { Sign::Minus };
            let others: Vec<usize> = (0..m).filter(|&r| r != target).collect();
            if others.is_empty() || rng.random_bool(0.4) {
                Instruction::AddInput { target, input: rng.random_range(0..n), sign }
            } else {
                let terms = (0..rng.random_range(1..=2))
                    .map(|_| {
                        let k = rng.random_range(0..=others.len().min(2));
                        let factors: Vec<(usize, u32)> = (0..k).map(|_| (others[rng.random_range(0..others.len())], rng.random_range(1..=3))).collect();
                        Monomial::new(rng.random_range(0..p), factors)
                    })
                    .collect();
                Instruction::AddPoly { target, poly: Polynomial::new(terms), sign }
            }
        })
        .collect();
    RegisterProgram::new(p, m, n, instructions).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_then_reverse_is_identity(seed in any::<u64>()) {
        let prog = random_program(seed);
        let round = prog.concat(&prog.reverse()).unwrap();
        for (x, tau) in domain(prog.modulus(), prog.num_registers(), prog.num_inputs()).take(4096) {
            prop_assert_eq!(round.execute(&x, &tau).unwrap(), tau);
        }
    }

    #[test]
    fn programs_permute_register_space(seed in any::<u64>(), row in 0usize..8) {
        let prog = random_program(seed);
        let x = TruthTable::row_bits(prog.num_inputs(), row % (1 << prog.num_inputs()));
        let total = prog.modulus().pow(prog.num_registers() as u32);
        prop_assert_eq!(count_images(&prog, &x, 100_000).unwrap(), total);
    }

    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        let prog = random_program(seed);
        prop_assert_eq!(parse_program(&program_to_text(&prog)).unwrap(), prog);
    }

    #[test]
    fn compute_copy_uncompute_stays_clean(k in 1usize..=2, p in prop::sample::select(vec![5u64, 7])) {
        // The scratch register starts dirty, so its value is subtracted
        // before the compute and added back with f(x) after it.
        let maj = threshold_program(3, k, p).unwrap();
        let m = maj.num_registers();
        let wide = maj.widen(m + 1).swap_registers(0, m).unwrap();
        let uncopy = RegisterProgram::new(p, m + 1, 3, vec![poly(0, Sign::Minus, &[m])]).unwrap();
        let copy = RegisterProgram::new(p, m + 1, 3, vec![poly(0, Sign::Plus, &[m])]).unwrap();
        let whole = uncopy.concat(&wide).unwrap().concat(&copy).unwrap().concat(&wide.reverse()).unwrap();
        let f = TruthTable::threshold(3, k);
        let cert = verify_clean(&whole, &f, CleanMode::Sampled { trials: 3_000, seed: k as u64 }, BUDGET).unwrap();
        prop_assert!(cert.passed);
    }
}
