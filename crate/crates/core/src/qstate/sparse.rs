use std::collections::HashMap;

use nalgebra::DMatrix;

use super::linalg::{bit_position, gather_local, scatter_local, C64, ONE, ZERO};

/// State vector stored as its nonzero amplitudes, for registers too wide for
/// a dense vector but whose evolution stays close to the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    num_qubits: usize,
    entries: HashMap<u64, C64>,
}

impl SparseState {
    pub fn basis(num_qubits: usize, index: u64) -> Self {
        assert!(num_qubits <= 64, "sparse states index with u64");
        let mut entries = HashMap::with_capacity(1);
        entries.insert(index, ONE);
        Self { num_qubits, entries }
    }

    pub fn from_entries(num_qubits: usize, entries: impl IntoIterator<Item = (u64, C64)>) -> Self {
        let mut map = HashMap::new();
        for (i, a) in entries {
            *map.entry(i).or_insert(ZERO) += a;
        }
        Self { num_qubits, entries: map }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, C64)> + '_ {
        self.entries.iter().map(|(&i, &a)| (i, a))
    }

    /// Entries sorted by basis index.
    pub fn sorted_entries(&self) -> Vec<(u64, C64)> {
        let mut v: Vec<_> = self.entries().collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }

    pub fn amplitude(&self, index: u64) -> C64 {
        self.entries.get(&index).copied().unwrap_or(ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().map(|a| a.norm_sqr()).sum()
    }

    /// Applies a basis map `index -> f(index)` that must be a bijection.
    pub fn apply_basis_map(&mut self, f: impl Fn(u64) -> u64) {
        let old = std::mem::take(&mut self.entries);
        self.entries = old.into_iter().map(|(i, a)| (f(i), a)).collect();
    }

    /// Applies a local permutation with optional per-image phases.
    pub fn apply_local_permutation(&mut self, targets: &[usize], perm: &[usize], phases: Option<&[C64]>) {
        let n = self.num_qubits;
        let old = std::mem::take(&mut self.entries);
        self.entries = old
            .into_iter()
            .map(|(i, a)| {
                let l = gather_local(i, n, targets);
                let image = perm[l];
                let a = match phases {
                    Some(p) => a * p[image],
                    None => a,
                };
                (scatter_local(i, n, targets, image), a)
            })
            .collect();
    }

    /// General matrix on `targets`; branching grows the support.
    pub fn apply_matrix(&mut self, targets: &[usize], m: &DMatrix<C64>) {
        let n = self.num_qubits;
        let old = std::mem::take(&mut self.entries);
        let mut out: HashMap<u64, C64> = HashMap::with_capacity(old.len());
        for (i, a) in old {
            let l = gather_local(i, n, targets);
            for r in 0..m.nrows() {
                let coeff = m[(r, l)];
                if coeff == ZERO {
                    continue;
                }
                *out.entry(scatter_local(i, n, targets, r)).or_insert(ZERO) += coeff * a;
            }
        }
        out.retain(|_, a| a.norm_sqr() > 1e-300);
        self.entries = out;
    }

    pub fn probability_one(&self, qubit: usize) -> f64 {
        let pos = bit_position(self.num_qubits, qubit);
        self.entries.iter().filter(|(i, _)| (*i >> pos) & 1 == 1).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Joint outcome distribution of `qubits` (first qubit most significant).
    pub fn marginal_distribution(&self, qubits: &[usize]) -> Vec<f64> {
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (&i, a) in &self.entries {
            probs[gather_local(i, self.num_qubits, qubits)] += a.norm_sqr();
        }
        probs
    }

    /// Reduced density matrix on `keep`, computed from the support only.
    pub fn reduced(&self, keep: &[usize]) -> DMatrix<C64> {
        let n = self.num_qubits;
        let keep_mask = keep.iter().fold(0u64, |acc, &q| acc | (1u64 << bit_position(n, q)));
        let mut groups: HashMap<u64, Vec<(usize, C64)>> = HashMap::new();
        for (&i, &a) in &self.entries {
            groups.entry(i & !keep_mask).or_default().push((gather_local(i, n, keep), a));
        }
        let dk = 1usize << keep.len();
        let mut out = DMatrix::from_element(dk, dk, ZERO);
        for members in groups.values() {
            for &(r, ar) in members {
                for &(c, ac) in members {
                    out[(r, c)] += ar * ac.conj();
                }
            }
        }
        out
    }
}
