//! Low-lying eigenpairs and spectrum-distance queries.
//!
//! Eigenvalues are located by bisection on inertia counts (so they inherit
//! the counting engine's exactness), eigenvectors by inverse iteration at
//! the bisected shifts with reorthogonalization inside clusters. Window
//! completeness is certified by count differences at the window edges.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{EnvlocError, Result};
use crate::lattice::HamiltonianMatrix;
use crate::rng::SplitMix64;
use crate::sparse::{ldlt, SymCsr};
use crate::spectral::count::{dense_eigenpairs, CountOptions, Slicer};
use crate::spectral::sturm::TridiagLu;

/// What to compute: everything in a window, or the lowest `k` states below
/// zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenRequest {
    Window { lo: f64, hi: f64 },
    LowestK { k: usize },
}

/// Eigenvalue counts and low-lying eigenpairs of one realization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// Upper edge of the resolved window.
    pub threshold: f64,
    /// `n(H, threshold)`.
    pub count: usize,
    pub ground_energy: f64,
    /// Ascending eigenvalues in the resolved window.
    pub energies: Vec<f64>,
    /// Orthonormal eigenvectors matching `energies` (not serialized; use the
    /// binary sidecar for persistence).
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
    pub method: String,
    pub residual_norms: Vec<f64>,
    /// All requested pairs delivered and verified against the counts.
    pub complete: bool,
    /// A threshold had to be nudged off a numerical eigenvalue.
    pub shifted: bool,
}

const RESIDUAL_REL: f64 = 1e-8;
const ORTHO_TOL: f64 = 1e-8;
const MAX_RESTARTS: usize = 4;

/// All eigenpairs in a window (or the lowest `k`), verified complete.
pub fn lowest_eigenpairs(h: &HamiltonianMatrix, request: EigenRequest) -> Result<SpectralSummary> {
    lowest_eigenpairs_of(&h.matrix, request, CountOptions::default())
}

pub fn lowest_eigenpairs_of(
    matrix: &SymCsr,
    request: EigenRequest,
    opts: CountOptions,
) -> Result<SpectralSummary> {
    let slicer = Slicer::new(matrix, opts);
    let norm = slicer.norm_scale();
    let mut shifted = false;

    let (lo, hi, cap) = match request {
        EigenRequest::Window { lo, hi } => {
            if lo >= hi {
                return Err(EnvlocError::Precondition(format!(
                    "empty eigenpair window [{lo}, {hi}]"
                )));
            }
            (lo, hi, None)
        }
        EigenRequest::LowestK { k } => {
            if k == 0 {
                return Err(EnvlocError::Precondition("eigenpair cap must be >= 1".into()));
            }
            (slicer.lower_bound(), -1e-12 * norm, Some(k))
        }
    };

    let c_lo = slicer.count_below(lo);
    let c_hi = slicer.count_below(hi);
    shifted |= c_lo.shifted || c_hi.shifted;
    let available = c_hi.count - c_lo.count;
    let take = cap.map_or(available, |k| k.min(available));
    let complete_cap = cap.map_or(true, |k| k <= available);

    let mut energies = Vec::with_capacity(take);
    for j in 0..take {
        energies.push(slicer.kth_eigenvalue(c_lo.count + j + 1));
    }

    let (vectors, residuals, converged) = compute_vectors(matrix, &slicer, &energies)?;

    let ground = if matches!(request, EigenRequest::LowestK { .. }) && !energies.is_empty() {
        energies[0]
    } else {
        slicer.ground_energy()
    };

    Ok(SpectralSummary {
        threshold: hi,
        count: c_hi.count,
        ground_energy: ground,
        energies,
        vectors,
        method: slicer.method().to_string(),
        residual_norms: residuals,
        complete: complete_cap && converged,
        shifted,
    })
}

fn compute_vectors(
    matrix: &SymCsr,
    slicer: &Slicer,
    energies: &[f64],
) -> Result<(Vec<Vec<f64>>, Vec<f64>, bool)> {
    if energies.is_empty() {
        return Ok((Vec::new(), Vec::new(), true));
    }

    // The dense backend already has the full eigensystem.
    if slicer.dense_pairs().is_some() {
        let (all_e, all_v) = dense_eigenpairs(matrix);
        let tol = 1e-9 * slicer.norm_scale().max(1.0);
        let mut vectors = Vec::with_capacity(energies.len());
        let mut residuals = Vec::with_capacity(energies.len());
        let mut used = vec![false; all_e.len()];
        for &e in energies {
            let (idx, _) = all_e
                .iter()
                .enumerate()
                .filter(|&(i, &x)| !used[i] && (x - e).abs() <= tol.max(1e-7 * e.abs()))
                .min_by(|a, b| (a.1 - e).abs().total_cmp(&(b.1 - e).abs()))
                .ok_or_else(|| {
                    EnvlocError::Spectral(format!("dense backend lost eigenvalue near {e}"))
                })?;
            used[idx] = true;
            residuals.push(residual_norm(matrix, &all_v[idx], e));
            vectors.push(all_v[idx].clone());
        }
        return Ok((vectors, residuals, true));
    }

    let norm = slicer.norm_scale();
    let tol = RESIDUAL_REL * norm;
    let n = matrix.n;
    let mut rng = SplitMix64::new(0x1962_0de5);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(energies.len());
    let mut residuals = Vec::with_capacity(energies.len());
    let mut all_converged = true;

    for (j, &lambda) in energies.iter().enumerate() {
        let mut best: Option<(Vec<f64>, f64)> = None;
        for _restart in 0..MAX_RESTARTS {
            let mut x: Vec<f64> = (0..n).map(|_| rng.symmetric()).collect();
            normalize(&mut x);
            let solver = ShiftSolver::new(matrix, slicer, lambda);
            for _ in 0..4 {
                let mut y = solver.solve(&x);
                // project out already-found vectors of nearby energies
                for (i, v) in vectors.iter().enumerate() {
                    if (energies[i] - lambda).abs() <= 1e-5 * norm.max(1.0) || i + 1 == j + 1 {
                        let c = dot(&y, v);
                        axpy(&mut y, v, -c);
                    }
                }
                if !normalize(&mut y) {
                    break;
                }
                x = y;
                let r = residual_norm(matrix, &x, lambda);
                if r <= tol {
                    break;
                }
            }
            let r = residual_norm(matrix, &x, lambda);
            if best.as_ref().map_or(true, |(_, rb)| r < *rb) {
                best = Some((x.clone(), r));
            }
            if r <= tol {
                break;
            }
        }
        let (v, r) = best.expect("at least one restart ran");
        if r > tol {
            all_converged = false;
        }
        residuals.push(r);
        vectors.push(v);
    }

    // Orthonormality audit; clusters were already projected during the
    // iteration, so spill here means a genuinely failed vector.
    for i in 0..vectors.len() {
        for k in 0..i {
            if dot(&vectors[i], &vectors[k]).abs() > ORTHO_TOL {
                all_converged = false;
            }
        }
    }

    Ok((vectors, residuals, all_converged))
}

/// Linear solver at a fixed shift, backed by whichever representation the
/// slicer chose.
enum ShiftSolver<'a> {
    Tridiag(TridiagLu),
    Sparse(crate::sparse::LdltFactor, std::marker::PhantomData<&'a ()>),
}

impl<'a> ShiftSolver<'a> {
    fn new(matrix: &'a SymCsr, slicer: &Slicer, shift: f64) -> Self {
        if let Some((d, e)) = slicer.tridiag() {
            ShiftSolver::Tridiag(TridiagLu::factor(d, e, shift))
        } else if let Some((m, perm)) = slicer.sparse_perm() {
            ShiftSolver::Sparse(ldlt(m, shift, perm), std::marker::PhantomData)
        } else {
            // dense handled earlier; fall back to sparse on the raw matrix
            let perm: Vec<usize> = (0..matrix.n).collect();
            ShiftSolver::Sparse(ldlt(matrix, shift, &perm), std::marker::PhantomData)
        }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            ShiftSolver::Tridiag(lu) => {
                let mut x = b.to_vec();
                lu.solve(&mut x);
                x
            }
            ShiftSolver::Sparse(f, _) => {
                let x = f.solve(b);
                if x.iter().all(|v| v.is_finite()) {
                    x
                } else {
                    // singular pivot hit exactly; retreat to the rhs
                    b.to_vec()
                }
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], x: &[f64], a: f64) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn normalize(x: &mut [f64]) -> bool {
    let nrm = dot(x, x).sqrt();
    if nrm < 1e-300 || !nrm.is_finite() {
        return false;
    }
    for v in x.iter_mut() {
        *v /= nrm;
    }
    true
}

fn residual_norm(matrix: &SymCsr, x: &[f64], lambda: f64) -> f64 {
    let mut hx = vec![0.0; matrix.n];
    matrix.spmv(x, &mut hx);
    hx.iter()
        .zip(x)
        .map(|(h, v)| {
            let r = h - lambda * v;
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Distance from `E` to the spectrum within `[E - r, E + r]`; `None` marks
/// "no spectrum in range" (the +infinity case).
pub fn spectrum_distance(h: &HamiltonianMatrix, e: f64, radius: f64) -> Option<f64> {
    spectrum_distance_of(&h.matrix, e, radius, CountOptions::default())
}

pub fn spectrum_distance_of(
    matrix: &SymCsr,
    e: f64,
    radius: f64,
    opts: CountOptions,
) -> Option<f64> {
    assert!(radius > 0.0, "search radius must be positive");
    let slicer = Slicer::new(matrix, opts);
    spectrum_distance_sliced(&slicer, e, radius)
}

/// Same as [`spectrum_distance_of`] but reusing a counting handle.
pub fn spectrum_distance_sliced(slicer: &Slicer, e: f64, radius: f64) -> Option<f64> {
    let c_minus = slicer.count_below(e - radius).count;
    let c_mid = slicer.count_below(e).count;
    let c_plus = slicer.count_below(e + radius).count;
    let mut best = f64::INFINITY;
    if c_mid > c_minus {
        let below = slicer.kth_eigenvalue(c_mid);
        best = best.min((e - below).max(0.0));
    }
    if c_plus > c_mid {
        let above = slicer.kth_eigenvalue(c_mid + 1);
        best = best.min((above - e).max(0.0));
    }
    best.is_finite().then_some(best)
}

/// Binary sidecar for eigenvectors, keyed by a realization id.
/// Layout: magic, id, pair count, vector length, then row-major f64 LE data.
pub fn write_vectors_sidecar(path: &std::path::Path, id: u64, vectors: &[Vec<f64>]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(b"ENVLOCV1")?;
    f.write_all(&id.to_le_bytes())?;
    f.write_all(&(vectors.len() as u64).to_le_bytes())?;
    let n = vectors.first().map_or(0, |v| v.len());
    f.write_all(&(n as u64).to_le_bytes())?;
    for v in vectors {
        for x in v {
            f.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_vectors_sidecar(path: &std::path::Path) -> Result<(u64, Vec<Vec<f64>>)> {
    let mut f = std::fs::File::open(path)?;
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic)?;
    if &magic != b"ENVLOCV1" {
        return Err(EnvlocError::RunDir("bad sidecar magic".into()));
    }
    let mut word = [0u8; 8];
    f.read_exact(&mut word)?;
    let id = u64::from_le_bytes(word);
    f.read_exact(&mut word)?;
    let m = u64::from_le_bytes(word) as usize;
    f.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    let mut vectors = Vec::with_capacity(m);
    for _ in 0..m {
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            f.read_exact(&mut word)?;
            v.push(f64::from_le_bytes(word));
        }
        vectors.push(v);
    }
    Ok((id, vectors))
}
