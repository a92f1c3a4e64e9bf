//! Exact eigenvalue counting below a threshold via matrix inertia.
//!
//! By Sylvester's law of inertia the number of negative pivots of a
//! symmetric triangular factorization of `H - E I` equals the number of
//! eigenvalues below `E`. Tridiagonal matrices take the O(n) Sturm path,
//! larger sparse matrices an LDL^T under a fill-reducing ordering, and
//! small matrices fall back to a dense solve.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::lattice::HamiltonianMatrix;
use crate::sparse::{ldlt, reverse_cuthill_mckee, SymCsr};
use crate::spectral::sturm::sturm_pass;

/// Counting backend actually used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    Sturm,
    SparseInertia,
    Dense,
}

impl std::fmt::Display for CountMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CountMethod::Sturm => write!(f, "sturm"),
            CountMethod::SparseInertia => write!(f, "sparse-inertia"),
            CountMethod::Dense => write!(f, "dense"),
        }
    }
}

/// Tunables for the counting engine.
#[derive(Debug, Clone, Copy)]
pub struct CountOptions {
    /// Matrices at most this large may use the dense backend.
    pub dense_threshold: usize,
    /// A pivot below `pivot_rel * ||H||` means the shift grazed an
    /// eigenvalue (of `H` or of a leading principal submatrix).
    pub pivot_rel: f64,
    /// Relative size of the retry shift.
    pub shift_rel: f64,
    /// Force a specific backend (oracle cross-checks).
    pub force: Option<CountMethod>,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self {
            dense_threshold: 400,
            pivot_rel: 1e-13,
            shift_rel: 1e-10,
            force: None,
        }
    }
}

/// Count plus the tie-handling trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub count: usize,
    /// Set when the threshold had to be nudged off a numerical eigenvalue.
    pub shifted: bool,
    pub method: CountMethod,
}

/// Reusable counting handle: representation chosen once, then shared by all
/// threshold queries against the same matrix.
pub struct Slicer<'a> {
    repr: Repr<'a>,
    norm: f64,
    opts: CountOptions,
}

enum Repr<'a> {
    Tridiag { diag: Vec<f64>, off: Vec<f64> },
    Sparse { matrix: &'a SymCsr, perm: Vec<usize> },
    Dense { eigenvalues: Vec<f64> },
}

impl<'a> Slicer<'a> {
    pub fn new(matrix: &'a SymCsr, opts: CountOptions) -> Self {
        let norm = matrix.gershgorin_norm().max(1e-300);
        let repr = match opts.force {
            Some(CountMethod::Sturm) => {
                let (diag, off) = matrix
                    .as_tridiagonal()
                    .expect("Sturm backend forced on a non-tridiagonal matrix");
                Repr::Tridiag { diag, off }
            }
            Some(CountMethod::SparseInertia) => Repr::Sparse {
                matrix,
                perm: reverse_cuthill_mckee(matrix),
            },
            Some(CountMethod::Dense) => Repr::Dense {
                eigenvalues: dense_eigenvalues(matrix),
            },
            None => {
                if let Some((diag, off)) = matrix.as_tridiagonal() {
                    Repr::Tridiag { diag, off }
                } else if matrix.n <= opts.dense_threshold {
                    Repr::Dense {
                        eigenvalues: dense_eigenvalues(matrix),
                    }
                } else {
                    Repr::Sparse {
                        matrix,
                        perm: reverse_cuthill_mckee(matrix),
                    }
                }
            }
        };
        Self { repr, norm, opts }
    }

    pub fn method(&self) -> CountMethod {
        match self.repr {
            Repr::Tridiag { .. } => CountMethod::Sturm,
            Repr::Sparse { .. } => CountMethod::SparseInertia,
            Repr::Dense { .. } => CountMethod::Dense,
        }
    }

    /// Gershgorin bound used as the `||H||` scale.
    pub fn norm_scale(&self) -> f64 {
        self.norm
    }

    /// `n(H, E)`: eigenvalues `<= E`, counted with multiplicity. When `E`
    /// lands on an eigenvalue to within the pivot tolerance the query is
    /// retried just above so the grazed eigenvalue is included, and the
    /// result is flagged.
    pub fn count_below(&self, e: f64) -> CountResult {
        let tie_tol = self.opts.pivot_rel * self.norm;
        let (count, min_pivot) = self.raw_inertia(e);
        if min_pivot >= tie_tol && min_pivot.is_finite() {
            return CountResult {
                count,
                shifted: false,
                method: self.method(),
            };
        }
        let mut eps = self.opts.shift_rel * self.norm;
        for _ in 0..8 {
            let (count, min_pivot) = self.raw_inertia(e + eps);
            if min_pivot >= tie_tol && min_pivot.is_finite() {
                return CountResult {
                    count,
                    shifted: true,
                    method: self.method(),
                };
            }
            eps *= 4.0;
        }
        // Pathologically clustered spectrum; report the last attempt.
        CountResult {
            count: self.raw_inertia(e + eps).0,
            shifted: true,
            method: self.method(),
        }
    }

    /// Raw inertia at a shift plus the smallest pivot magnitude (dense
    /// backend reports the distance to the nearest eigenvalue instead).
    fn raw_inertia(&self, e: f64) -> (usize, f64) {
        match &self.repr {
            Repr::Tridiag { diag, off } => sturm_pass(diag, off, e),
            Repr::Sparse { matrix, perm } => {
                let f = ldlt(matrix, e, perm);
                let min = if f.pivots_finite() {
                    f.min_abs_pivot()
                } else {
                    0.0
                };
                (f.negative_pivots(), min)
            }
            Repr::Dense { eigenvalues } => {
                let count = eigenvalues.iter().filter(|&&x| x <= e).count();
                let nearest = eigenvalues
                    .iter()
                    .map(|&x| (x - e).abs())
                    .fold(f64::INFINITY, f64::min);
                (count, nearest)
            }
        }
    }

    /// The k-th smallest eigenvalue (1-based), located by bisection on
    /// counts. Exact to `tol_abs` in exact arithmetic of the counts.
    pub fn kth_eigenvalue(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        let mut lo = self.lower_bound();
        let mut hi = self.upper_bound();
        while hi - lo > self.eigen_tol(lo.abs().max(hi.abs())) {
            let mid = 0.5 * (lo + hi);
            if self.raw_inertia(mid).0 >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Smallest eigenvalue.
    pub fn ground_energy(&self) -> f64 {
        self.kth_eigenvalue(1)
    }

    fn eigen_tol(&self, local: f64) -> f64 {
        (1e-13 * self.norm).max(8.0 * f64::EPSILON * local.max(1.0))
    }

    pub fn lower_bound(&self) -> f64 {
        match &self.repr {
            Repr::Dense { eigenvalues } => {
                eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0
            }
            _ => -self.norm - 1.0,
        }
    }

    pub fn upper_bound(&self) -> f64 {
        match &self.repr {
            Repr::Dense { eigenvalues } => {
                eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0
            }
            _ => self.norm + 1.0,
        }
    }

    pub(crate) fn dense_pairs(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Dense { eigenvalues } => Some(eigenvalues),
            _ => None,
        }
    }

    pub(crate) fn tridiag(&self) -> Option<(&[f64], &[f64])> {
        match &self.repr {
            Repr::Tridiag { diag, off } => Some((diag, off)),
            _ => None,
        }
    }

    pub(crate) fn sparse_perm(&self) -> Option<(&SymCsr, &[usize])> {
        match &self.repr {
            Repr::Sparse { matrix, perm } => Some((matrix, perm)),
            _ => None,
        }
    }
}

fn dense_eigenvalues(matrix: &SymCsr) -> Vec<f64> {
    let mut ev: Vec<f64> = matrix
        .to_dense()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub(crate) fn dense_eigenpairs(matrix: &SymCsr) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = matrix.to_dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().cloned().collect())
        .collect();
    (energies, vectors)
}

#[allow(dead_code)]
pub(crate) fn dense_from(matrix: &SymCsr) -> DMatrix<f64> {
    matrix.to_dense()
}

/// `n(H, E)` with default options.
pub fn count_below(h: &HamiltonianMatrix, e: f64) -> usize {
    Slicer::new(&h.matrix, CountOptions::default()).count_below(e).count
}

/// `n(H, E)` with full control and tie reporting.
pub fn count_below_with(matrix: &SymCsr, e: f64, opts: CountOptions) -> CountResult {
    Slicer::new(matrix, opts).count_below(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{
        BoundaryCondition, DisorderSpec, Distribution, EnvelopeSpec, ModelSpec,
        SingleSitePotential,
    };
    use crate::rng::SplitMix64;

    fn chain(lambda: f64, seed: u64) -> ModelSpec {
        ModelSpec {
            dim: 1,
            lambda,
            envelope: EnvelopeSpec::power_law(0.0),
            u: SingleSitePotential::cube(1.0, 1.0).unwrap(),
            disorder: DisorderSpec::new(Distribution::Uniform01, seed),
            spacing: 0.5,
        }
    }

    #[test]
    fn free_laplacian_counts_zero_below_zero() {
        let m = chain(0.0, 0);
        let h = m
            .restriction(&[0.0], 16.0, BoundaryCondition::Dirichlet, 0)
            .unwrap();
        assert_eq!(count_below(&h, -0.1), 0);
    }

    /// Independent oracle: enumerate all eigenvalues of a tridiagonal matrix
    /// by index-wise bisection, then count directly.
    fn bisect_all_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
        let n = diag.len();
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for i in 0..n {
            let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let right = if i < n - 1 { off[i].abs() } else { 0.0 };
            lo = lo.min(diag[i] - left - right);
            hi = hi.max(diag[i] + left + right);
        }
        lo -= 1.0;
        hi += 1.0;
        (1..=n)
            .map(|k| {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if b - a < 1e-13 * mid.abs().max(1.0) {
                        break;
                    }
                    if crate::spectral::sturm::sturm_count(diag, off, mid) < k {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                0.5 * (a + b)
            })
            .collect()
    }

    #[test]
    fn single_deep_site_matches_sturm_bisection_oracle() {
        // One impurity at the origin with a large coupling.
        let m = ModelSpec {
            dim: 1,
            lambda: 25.0,
            envelope: EnvelopeSpec::power_law(0.0),
            u: SingleSitePotential::cube(1.0, 1.0).unwrap(),
            disorder: DisorderSpec::new(Distribution::Bernoulli { p: 1.0 }, 0),
            spacing: 0.25,
        };
        let h = m.finite_volume(&[0.0], 1.0, 6.0, 0).unwrap();
        let (d, e) = h.matrix.as_tridiagonal().unwrap();
        let all = bisect_all_eigenvalues(&d, &e);
        for threshold in [-20.0, -10.0, -5.0, -1.0, -0.01] {
            let oracle = all.iter().filter(|&&x| x <= threshold).count();
            assert_eq!(count_below(&h, threshold), oracle, "E = {threshold}");
        }
    }

    #[test]
    fn sparse_and_dense_agree_on_2d_instances() {
        let mut rng = SplitMix64::new(404);
        for trial in 0..25 {
            let m = ModelSpec {
                dim: 2,
                lambda: 2.0 + 4.0 * rng.uniform(),
                envelope: EnvelopeSpec::power_law(rng.uniform()),
                u: SingleSitePotential::cube(1.0, 1.0).unwrap(),
                disorder: DisorderSpec::new(Distribution::Uniform01, 900 + trial),
                spacing: 1.0,
            };
            let h = m
                .restriction(&[0.0, 0.0], 12.0, BoundaryCondition::Dirichlet, trial)
                .unwrap();
            let e = -0.05 - 2.0 * rng.uniform();
            let sparse = count_below_with(
                &h.matrix,
                e,
                CountOptions {
                    force: Some(CountMethod::SparseInertia),
                    ..Default::default()
                },
            );
            let dense = count_below_with(
                &h.matrix,
                e,
                CountOptions {
                    force: Some(CountMethod::Dense),
                    ..Default::default()
                },
            );
            assert_eq!(sparse.count, dense.count, "trial {trial}, E = {e}");
        }
    }

    #[test]
    fn count_monotone_in_threshold() {
        let m = chain(4.0, 7);
        let h = m.finite_volume(&[0.0], 24.0, 4.0, 2).unwrap();
        let slicer = Slicer::new(&h.matrix, CountOptions::default());
        let mut prev = 0;
        let mut e = -3.9;
        while e < -1e-3 {
            let c = slicer.count_below(e).count;
            assert!(c >= prev);
            prev = c;
            e += 0.05;
        }
    }

    #[test]
    fn tie_shift_flags_exact_eigenvalue() {
        let m = chain(0.0, 0);
        let h = m
            .restriction(&[0.0], 4.0, BoundaryCondition::Dirichlet, 0)
            .unwrap();
        // Hit the lowest free eigenvalue exactly.
        let (d, e) = h.matrix.as_tridiagonal().unwrap();
        let ev = bisect_all_eigenvalues(&d, &e)[0];
        let r = count_below_with(&h.matrix, ev, CountOptions::default());
        assert!(r.shifted);
        assert_eq!(r.count, 1, "shift must include the grazed eigenvalue");
    }

    #[test]
    fn kth_eigenvalue_matches_dense() {
        let m = chain(6.0, 3);
        let h = m.finite_volume(&[0.0], 12.0, 3.0, 1).unwrap();
        let slicer = Slicer::new(&h.matrix, CountOptions::default());
        let (dense, _) = dense_eigenpairs(&h.matrix);
        for k in [1usize, 2, 5, 10] {
            let lam = slicer.kth_eigenvalue(k);
            assert!(
                (lam - dense[k - 1]).abs() < 1e-9 * slicer.norm_scale(),
                "k = {k}: {lam} vs {}",
                dense[k - 1]
            );
        }
    }
}
