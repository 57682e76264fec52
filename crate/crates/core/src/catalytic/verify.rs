//! Catalyticity checks over the four catalytic sets.
//!
//! Every check runs the circuit on `|0^s> (x) psi`, where `psi` spans the
//! catalytic register and an optional reference of width `r`, and compares
//! the final catalytic-plus-reference marginal with the input and the work
//! marginal with a baseline. For unitary circuits the final state is pure,
//! so it is kept as one conditional vector `a_w` per work basis value `w`
//! and both comparisons are done in the span of those vectors and `psi`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::qstate::linalg::{hermitian_eigenvalues, kron, C64, ONE, ZERO};
use crate::qstate::random::{random_density_with_purification, random_pure_state};
use crate::qstate::{matrix_trace_distance, DensityMatrix, PauliEigenstate, PauliEigenstateLabel, QuantumChannel};
use crate::Limits;

use super::circuit::{CatalyticCircuit, CircuitMode};
use super::sim::{apply_classical, evolve_amplitudes, evolve_density_matrix};
use super::CircuitError;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Largest work register for which the report carries a dense `eta`.
const ETA_REPORT_MAX_QUBITS: usize = 10;
/// Largest `2c` for which the Choi matrix is materialized.
const CHOI_MAX_QUBITS: usize = 10;
/// Largest catalytic register the classical engine tabulates.
const CLASSICAL_TABLE_MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CatalyticSet {
    Density,
    Pure,
    PauliProd,
    Epr,
}

impl std::str::FromStr for CatalyticSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "density" | "random" => Ok(CatalyticSet::Density),
            "pure" => Ok(CatalyticSet::Pure),
            "pauliprod" => Ok(CatalyticSet::PauliProd),
            "epr" => Ok(CatalyticSet::Epr),
            other => Err(format!("unknown catalytic set {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    PauliprodExhaustive,
    EprChoi,
    RandomDensity,
    RandomPure,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalyticityReport {
    pub passed: bool,
    pub tolerance: f64,
    pub max_reset_deviation: f64,
    pub max_output_deviation: f64,
    /// Work-register output on the first tested state; omitted for wide
    /// work registers.
    pub output_state: Option<DensityMatrix>,
    pub states_tested: u64,
    pub certificate_kind: CertificateKind,
    pub worst_reset_state: Option<String>,
    pub worst_output_state: Option<String>,
    pub circuit_steps: usize,
}

/// Work-register marginal stored on the basis values it can occupy.
#[derive(Debug, Clone)]
struct WorkMarginal {
    support: Vec<usize>,
    block: DMatrix<C64>,
}

impl WorkMarginal {
    fn full(m: DMatrix<C64>) -> Self {
        Self { support: (0..m.nrows()).collect(), block: m }
    }

    fn distance(&self, other: &WorkMarginal) -> f64 {
        let mut union: Vec<usize> = self.support.iter().chain(&other.support).copied().collect();
        union.sort_unstable();
        union.dedup();
        let embed = |w: &WorkMarginal| {
            let pos: Vec<usize> = w.support.iter().map(|x| union.binary_search(x).expect("in union")).collect();
            let mut m = DMatrix::from_element(union.len(), union.len(), ZERO);
            for (i, &pi) in pos.iter().enumerate() {
                for (j, &pj) in pos.iter().enumerate() {
                    m[(pi, pj)] = w.block[(i, j)];
                }
            }
            m
        };
        matrix_trace_distance(&embed(self), &embed(other))
    }

    fn to_density(&self, work_width: usize) -> Option<DensityMatrix> {
        if work_width > ETA_REPORT_MAX_QUBITS {
            return None;
        }
        let d = 1usize << work_width;
        let mut m = DMatrix::from_element(d, d, ZERO);
        for (i, &a) in self.support.iter().enumerate() {
            for (j, &b) in self.support.iter().enumerate() {
                m[(a, b)] = self.block[(i, j)];
            }
        }
        Some(DensityMatrix::from_raw(work_width, m))
    }
}

/// Outcome of one catalytic input.
struct Probe {
    /// Trace distance of the final catalytic-plus-reference state from `psi`.
    reset: f64,
    eta: WorkMarginal,
    /// Final catalytic marginal with the reference traced out, on request.
    catalytic_only: Option<DMatrix<C64>>,
    /// Final catalytic-plus-reference marginal, on request.
    joint_catalytic: Option<DMatrix<C64>>,
}

#[derive(Clone, Copy, Default)]
struct Want {
    catalytic_only: bool,
    joint_catalytic: bool,
}

/// Basis action of an all-classical circuit on `|0^s>|tau>`, grouped by
/// the resulting work value.
struct ClassicalTable {
    image: Vec<u32>,
    rows: Vec<(usize, Vec<u32>)>,
}

impl ClassicalTable {
    fn new(circuit: &CatalyticCircuit) -> Result<Self, CircuitError> {
        let c = circuit.catalytic_width();
        let n = circuit.num_qubits();
        let mask = (1u64 << c) - 1;
        let mut image = Vec::with_capacity(1 << c);
        let mut groups: std::collections::BTreeMap<usize, Vec<u32>> = Default::default();
        for tau in 0..1u64 << c {
            let out = apply_classical(circuit, tau, n)?;
            image.push((out & mask) as u32);
            groups.entry((out >> c) as usize).or_default().push(tau as u32);
        }
        Ok(Self { image, rows: groups.into_iter().collect() })
    }
}

enum Engine {
    Classical(ClassicalTable),
    Dense,
    Density,
}

struct Evaluator<'a> {
    circuit: &'a CatalyticCircuit,
    engine: Engine,
    reference_width: usize,
}

impl<'a> Evaluator<'a> {
    fn new(circuit: &'a CatalyticCircuit, reference_width: usize, limits: &Limits) -> Result<Self, CircuitError> {
        circuit.check_limits(limits)?;
        let (s, c) = (circuit.work_width(), circuit.catalytic_width());
        let n = s + c + reference_width;
        let unitary = circuit.mode() == CircuitMode::Unitary;
        let engine = if unitary && circuit.is_classical() && c <= CLASSICAL_TABLE_MAX_QUBITS && c + reference_width <= 30 {
            Engine::Classical(ClassicalTable::new(circuit)?)
        } else if unitary && n <= limits.max_pure_qubits {
            Engine::Dense
        } else if n <= limits.max_density_qubits {
            Engine::Density
        } else {
            let (kind, limit) = if unitary {
                ("pure-state", limits.max_pure_qubits)
            } else {
                ("density-matrix", limits.max_density_qubits)
            };
            return Err(CircuitError::BudgetExceeded {
                what: format!("{kind} simulation of {n} qubits"),
                requested: n as u64,
                limit: limit as u64,
                hint: "raise the qubit cap or shrink the circuit",
            });
        };
        Ok(Self { circuit, engine, reference_width })
    }

    /// Runs the circuit on `|0^s> (x) psi` (`psi` over catalytic then
    /// reference qubits).
    fn probe(&self, psi: &[C64], want: Want) -> Probe {
        let s = self.circuit.work_width();
        let c = self.circuit.catalytic_width();
        let r = self.reference_width;
        let dim = 1usize << (c + r);
        let rdim = 1usize << r;
        let rows: Vec<(usize, Vec<C64>)> = match &self.engine {
            Engine::Classical(table) => table
                .rows
                .iter()
                .filter_map(|(w, taus)| {
                    let mut v = vec![ZERO; dim];
                    let mut nonzero = false;
                    for &tau in taus {
                        let (src, dst) = (tau as usize * rdim, table.image[tau as usize] as usize * rdim);
                        for k in 0..rdim {
                            let a = psi[src + k];
                            if a != ZERO {
                                nonzero = true;
                                v[dst + k] = a;
                            }
                        }
                    }
                    nonzero.then_some((*w, v))
                })
                .collect(),
            Engine::Dense => {
                let n = s + c + r;
                let mut amps = vec![ZERO; 1 << n];
                amps[..dim].copy_from_slice(psi);
                evolve_amplitudes(self.circuit, &mut amps, n).expect("dense engine runs unitary circuits");
                amps.chunks(dim)
                    .enumerate()
                    .filter(|(_, row)| row.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-30)
                    .map(|(w, row)| (w, row.to_vec()))
                    .collect()
            }
            Engine::Density => return self.probe_density(psi, want),
        };

        let (reset, eta) = span_comparison(&rows, psi);
        let catalytic_only = want.catalytic_only.then(|| {
            let dc = 1usize << c;
            let mut acc = DMatrix::from_element(dc, dc, ZERO);
            for (_, v) in &rows {
                let m = DMatrix::from_row_slice(dc, rdim, v);
                acc += &m * m.adjoint();
            }
            acc
        });
        let joint_catalytic = want.joint_catalytic.then(|| {
            let mut acc = DMatrix::from_element(dim, dim, ZERO);
            for (_, v) in &rows {
                let col = DVector::from_column_slice(v);
                acc += &col * col.adjoint();
            }
            acc
        });
        Probe { reset, eta, catalytic_only, joint_catalytic }
    }

    fn probe_density(&self, psi: &[C64], want: Want) -> Probe {
        let target = {
            let v = DVector::from_column_slice(psi);
            &v * v.adjoint()
        };
        let (final_joint, n) = self.evolve_mixed(&target);
        let s = self.circuit.work_width();
        let c = self.circuit.catalytic_width();
        let joint = DensityMatrix::from_raw(n, final_joint);
        let cr: Vec<usize> = (s..n).collect();
        let cr_state = partial(&joint, &cr);
        let reset = matrix_trace_distance(&cr_state, &target);
        let eta = WorkMarginal::full(partial(&joint, &(0..s).collect::<Vec<_>>()));
        let catalytic_only = want.catalytic_only.then(|| partial(&joint, &(s..s + c).collect::<Vec<_>>()));
        Probe { reset, eta, catalytic_only, joint_catalytic: want.joint_catalytic.then_some(cr_state) }
    }

    /// Evolves `|0^s><0^s| (x) sigma` with the density engine.
    fn evolve_mixed(&self, sigma: &DMatrix<C64>) -> (DMatrix<C64>, usize) {
        let s = self.circuit.work_width();
        let n = s + self.circuit.catalytic_width() + self.reference_width;
        let mut zero = DMatrix::from_element(1 << s, 1 << s, ZERO);
        zero[(0, 0)] = ONE;
        let mut m = kron(&zero, sigma);
        evolve_density_matrix(self.circuit, &mut m, n);
        (m, n)
    }
}

fn partial(rho: &DensityMatrix, keep: &[usize]) -> DMatrix<C64> {
    if keep.is_empty() {
        return DMatrix::from_element(1, 1, rho.trace());
    }
    rho.partial_trace(keep).expect("keep qubits are in range").matrix().clone()
}

/// Trace distance between `sum_w a_w a_w^dagger` and `psi psi^dagger`, and
/// the work marginal `eta[w, w'] = <a_w'|a_w>`, computed from coordinates
/// in an orthonormal basis of `span{psi, a_w}` that starts at `psi`.
/// Residuals are formed by direct subtraction so a reset state yields a
/// deviation at rounding level rather than at its square root.
fn span_comparison(rows: &[(usize, Vec<C64>)], psi: &[C64]) -> (f64, WorkMarginal) {
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut basis: Vec<Vec<C64>> = vec![psi.iter().map(|z| z / norm).collect()];
    let mut coords: Vec<Vec<C64>> = Vec::with_capacity(rows.len());
    for (_, v) in rows {
        let mut residual = v.clone();
        let mut coeff: Vec<C64> = vec![ZERO; basis.len()];
        for _ in 0..2 {
            for (j, b) in basis.iter().enumerate() {
                let proj: C64 = b.iter().zip(&residual).map(|(x, y)| x.conj() * y).sum();
                coeff[j] += proj;
                for (y, x) in residual.iter_mut().zip(b) {
                    *y -= proj * x;
                }
            }
        }
        let rnorm = residual.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if rnorm > 1e-150 {
            basis.push(residual.iter().map(|z| z / rnorm).collect());
            coeff.push(C64::new(rnorm, 0.0));
        }
        coords.push(coeff);
    }
    let k = basis.len();
    let mut m = DMatrix::from_element(k, k, ZERO);
    m[(0, 0)] = -ONE;
    for co in &coords {
        for (i, a) in co.iter().enumerate() {
            for (j, b) in co.iter().enumerate() {
                m[(i, j)] += a * b.conj();
            }
        }
    }
    let reset = (0.5 * hermitian_eigenvalues(&m).iter().map(|x| x.abs()).sum::<f64>()).clamp(0.0, 1.0);
    let support: Vec<usize> = rows.iter().map(|(w, _)| *w).collect();
    let block = DMatrix::from_fn(rows.len(), rows.len(), |i, j| {
        let (a, b) = (&coords[i], &coords[j]);
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
    });
    (reset, WorkMarginal { support, block })
}

/// Running worst-case bookkeeping shared by the verifiers.
struct Tally {
    max_reset: f64,
    worst_reset: Option<String>,
    max_output: f64,
    worst_output: Option<String>,
    baseline: Option<WorkMarginal>,
    count: u64,
}

impl Tally {
    fn new() -> Self {
        Self { max_reset: 0.0, worst_reset: None, max_output: 0.0, worst_output: None, baseline: None, count: 0 }
    }

    fn record(&mut self, reset: f64, eta: WorkMarginal, label: impl Fn() -> String) {
        self.count += 1;
        if reset > self.max_reset {
            self.max_reset = reset;
            self.worst_reset = Some(label());
        }
        match &self.baseline {
            None => self.baseline = Some(eta),
            Some(base) => {
                let d = base.distance(&eta);
                if d > self.max_output {
                    self.max_output = d;
                    self.worst_output = Some(label());
                }
            }
        }
    }

    fn finish(self, circuit: &CatalyticCircuit, tolerance: f64, kind: CertificateKind) -> CatalyticityReport {
        CatalyticityReport {
            passed: self.max_reset <= tolerance && self.max_output <= tolerance,
            tolerance,
            max_reset_deviation: self.max_reset,
            max_output_deviation: self.max_output,
            output_state: self.baseline.and_then(|b| b.to_density(circuit.work_width())),
            states_tested: self.count,
            certificate_kind: kind,
            worst_reset_state: self.worst_reset,
            worst_output_state: self.worst_output,
            circuit_steps: circuit.len(),
        }
    }
}

/// Exhaustive check over all `6^c` products of single-qubit Pauli
/// eigenstates. Their projectors span every `c`-qubit operator, so passing
/// here certifies every catalytic density matrix by linearity.
pub fn verify_pauliprod(circuit: &CatalyticCircuit, tolerance: f64, limits: &Limits) -> Result<CatalyticityReport, CircuitError> {
    let c = circuit.catalytic_width();
    if c > limits.max_pauliprod_catalytic {
        return Err(CircuitError::BudgetExceeded {
            what: format!("6^{c} PauliProd states"),
            requested: c as u64,
            limit: limits.max_pauliprod_catalytic as u64,
            hint: "use verify_epr, which needs one run on 2c qubits",
        });
    }
    let eval = Evaluator::new(circuit, 0, limits)?;
    let factors: Vec<[C64; 2]> = PauliEigenstate::ALL.iter().map(|p| p.amplitudes()).collect();
    // levels[k] holds the product state of qubits 0..k for the current digits.
    let mut digits = vec![0usize; c];
    let mut levels: Vec<Vec<C64>> = vec![vec![ONE]];
    for k in 0..c {
        let next = extend(&levels[k], &factors[0]);
        levels.push(next);
    }
    let mut tally = Tally::new();
    let total = 6u64.pow(c as u32);
    for index in 0..total {
        let probe = eval.probe(&levels[c], Want::default());
        tally.record(probe.reset, probe.eta, || PauliEigenstateLabel::from_index(c, index as usize).to_string());
        // Odometer step with the last qubit as the fastest digit.
        let Some(pos) = (0..c).rev().find(|&k| digits[k] < 5) else { break };
        digits[pos] += 1;
        for k in pos + 1..c {
            digits[k] = 0;
        }
        for k in pos..c {
            levels[k + 1] = extend(&levels[k], &factors[digits[k]]);
        }
    }
    Ok(tally.finish(circuit, tolerance, CertificateKind::PauliprodExhaustive))
}

fn extend(prefix: &[C64], factor: &[C64; 2]) -> Vec<C64> {
    prefix.iter().flat_map(|&x| [x * factor[0], x * factor[1]]).collect()
}

fn epr_amplitudes(c: usize) -> Vec<C64> {
    let d = 1usize << c;
    let a = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = vec![ZERO; d * d];
    for i in 0..d {
        v[i * d + i] = a;
    }
    v
}

/// Feeds halves of `c` EPR pairs into the catalytic register. The final
/// catalytic-plus-reference state is the Choi matrix of the effective
/// catalytic channel, so a reset here means that channel is the identity.
pub fn verify_epr(circuit: &CatalyticCircuit, tolerance: f64, limits: &Limits) -> Result<CatalyticityReport, CircuitError> {
    let c = circuit.catalytic_width();
    let eval = Evaluator::new(circuit, c, limits)?;
    let probe = eval.probe(&epr_amplitudes(c), Want::default());
    let mut tally = Tally::new();
    tally.record(probe.reset, probe.eta, || "epr".into());
    Ok(tally.finish(circuit, tolerance, CertificateKind::EprChoi))
}

/// Random Hilbert-Schmidt mixed states, each fed as a purification with an
/// equal-width reference when that fits the caps and as a bare mixed state
/// otherwise.
pub fn verify_random_density(
    circuit: &CatalyticCircuit,
    trials: usize,
    tolerance: f64,
    seed: u64,
    limits: &Limits,
) -> Result<CatalyticityReport, CircuitError> {
    if trials == 0 {
        return Err(CircuitError::InvalidArgument("trials must be at least 1".into()));
    }
    let c = circuit.catalytic_width();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    match Evaluator::new(circuit, c, limits) {
        Ok(eval) => {
            let want = Want { catalytic_only: true, joint_catalytic: false };
            for t in 0..trials {
                let (rho, psi) = random_density_with_purification(c, &mut rng);
                let probe = eval.probe(psi.amplitudes().as_slice(), want);
                let mixed = matrix_trace_distance(probe.catalytic_only.as_ref().expect("requested"), rho.matrix());
                tally.record(probe.reset.max(mixed), probe.eta, || format!("trial {t}"));
            }
        }
        Err(CircuitError::BudgetExceeded { .. }) => {
            let eval = Evaluator::new(circuit, 0, limits)?;
            if !matches!(eval.engine, Engine::Density) {
                return Err(CircuitError::BudgetExceeded {
                    what: "random-density check without a reference".into(),
                    requested: (circuit.num_qubits() + c) as u64,
                    limit: limits.max_pure_qubits as u64,
                    hint: "raise the qubit cap",
                });
            }
            let s = circuit.work_width();
            for t in 0..trials {
                let (rho, _) = random_density_with_purification(c, &mut rng);
                let (m, n) = eval.evolve_mixed(rho.matrix());
                let joint = DensityMatrix::from_raw(n, m);
                let reset = matrix_trace_distance(&partial(&joint, &(s..n).collect::<Vec<_>>()), rho.matrix());
                let eta = WorkMarginal::full(partial(&joint, &(0..s).collect::<Vec<_>>()));
                tally.record(reset, eta, || format!("trial {t}"));
            }
        }
        Err(e) => return Err(e),
    }
    Ok(tally.finish(circuit, tolerance, CertificateKind::RandomDensity))
}

/// Haar-random pure catalytic states, without a reference.
pub fn verify_random_pure(
    circuit: &CatalyticCircuit,
    trials: usize,
    tolerance: f64,
    seed: u64,
    limits: &Limits,
) -> Result<CatalyticityReport, CircuitError> {
    if trials == 0 {
        return Err(CircuitError::InvalidArgument("trials must be at least 1".into()));
    }
    let c = circuit.catalytic_width();
    let eval = Evaluator::new(circuit, 0, limits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    for t in 0..trials {
        let psi = random_pure_state(c, &mut rng);
        let probe = eval.probe(psi.amplitudes().as_slice(), Want::default());
        tally.record(probe.reset, probe.eta, || format!("trial {t}"));
    }
    Ok(tally.finish(circuit, tolerance, CertificateKind::RandomPure))
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub tolerance: f64,
    pub trials: usize,
    pub seed: u64,
    pub limits: Limits,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { tolerance: DEFAULT_TOLERANCE, trials: 100, seed: 0, limits: Limits::default() }
    }
}

/// Dispatches to the verifier for `set`.
pub fn verify(circuit: &CatalyticCircuit, set: CatalyticSet, opts: &VerifyOptions) -> Result<CatalyticityReport, CircuitError> {
    match set {
        CatalyticSet::PauliProd => verify_pauliprod(circuit, opts.tolerance, &opts.limits),
        CatalyticSet::Epr => verify_epr(circuit, opts.tolerance, &opts.limits),
        CatalyticSet::Density => verify_random_density(circuit, opts.trials, opts.tolerance, opts.seed, &opts.limits),
        CatalyticSet::Pure => verify_random_pure(circuit, opts.trials, opts.tolerance, opts.seed, &opts.limits),
    }
}

/// The factorization `Phi = Gamma (x) Xi` of a catalytic circuit.
#[derive(Debug, Clone)]
pub struct EffectiveChannels {
    /// Replacement channel onto the work output `eta`.
    pub gamma: QuantumChannel,
    /// Effective channel on the catalytic register, rebuilt from its Choi
    /// matrix.
    pub xi: QuantumChannel,
    pub eta: DensityMatrix,
    pub xi_choi: DMatrix<C64>,
    /// Trace distance between the Choi matrices of `xi` and the identity.
    pub choi_deviation: f64,
}

pub fn effective_channels(circuit: &CatalyticCircuit, tolerance: f64, limits: &Limits) -> Result<EffectiveChannels, CircuitError> {
    let (s, c) = (circuit.work_width(), circuit.catalytic_width());
    if 2 * c > CHOI_MAX_QUBITS || s > ETA_REPORT_MAX_QUBITS {
        return Err(CircuitError::BudgetExceeded {
            what: format!("Choi matrix on {} qubits", 2 * c),
            requested: (2 * c) as u64,
            limit: CHOI_MAX_QUBITS as u64,
            hint: "extract channels from a narrower circuit",
        });
    }
    let eval = Evaluator::new(circuit, c, limits)?;
    let probe = eval.probe(&epr_amplitudes(c), Want { catalytic_only: false, joint_catalytic: true });
    if probe.reset > tolerance {
        return Err(CircuitError::NonCatalytic { reset: probe.reset, output: 0.0 });
    }
    let xi_choi = probe.joint_catalytic.expect("requested");
    let xi = QuantumChannel::from_choi(c, c, &xi_choi)?;
    let eta = probe.eta.to_density(s).expect("work width checked");
    let gamma = QuantumChannel::replacement(s, &eta);
    Ok(EffectiveChannels { gamma, xi, eta, xi_choi, choi_deviation: probe.reset })
}
