//! Variational certificates for bound-state counts.
//!
//! The shell between the witness radius and the box edge is packed with
//! disjoint cubes of side `ell = F(L)^(-1/4) L`, each carrying a normalized
//! plateau function (flat on the inner region, linear ramp over an `ell/4`
//! margin). Disjoint supports make the plateau family orthonormal and the
//! quadratic form block-diagonal over it, so `max_n <phi_n, H phi_n> < 0`
//! certifies at least `N` eigenvalues below zero by the min-max principle.
//! The certificate is cross-checked against the inertia count on every
//! realization.

use serde::{Deserialize, Serialize};

use crate::error::{EnvlocError, Result};
use crate::lattice::{EnvelopeSpec, HamiltonianMatrix, ModelSpec, Witness};
use crate::spectral::{CountOptions, Slicer};

/// Axis-aligned cube `[origin, origin + side[^d`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlateauCube {
    pub origin: Vec<f64>,
    pub side: f64,
}

/// The discretized plateau family for one box size.
#[derive(Debug, Clone)]
pub struct TrialFunctionSet {
    pub box_side: f64,
    pub cube_side: f64,
    pub cubes: Vec<PlateauCube>,
    /// Realized cube-count ratio `N / F(L)^(d/4)`.
    pub kappa: f64,
    /// Upper bound `F(L)^(d/4)` on the cube count.
    pub count_cap: f64,
    /// Realized plateau constant in continuum normalization.
    pub c0: f64,
    /// Realized gradient constant (sup of the discrete gradient times
    /// `ell^(1 + d/2)` in continuum normalization).
    pub c0_grad: f64,
    /// Normalized plateau functions on the assembly domain.
    pub functions: Vec<Vec<f64>>,
}

/// Per-realization certificate outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRealization {
    pub realization: u64,
    pub quotients: Vec<f64>,
    /// Per-cube disorder average `X_n` over interior sites.
    pub x_stats: Vec<f64>,
    /// Per-cube interior site count `Z_n`.
    pub z_counts: Vec<usize>,
    pub max_quotient: Option<f64>,
    pub certified: bool,
    pub count_below: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialCertificateRecord {
    pub box_side: f64,
    pub cube_side: f64,
    pub n_cubes: usize,
    pub kappa: f64,
    pub mu: f64,
    pub threshold: f64,
    pub realizations: Vec<TrialRealization>,
    pub success_fraction: f64,
    /// Min-max soundness: every certified realization had `count >= N`.
    pub sound: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialConfig {
    pub box_side: f64,
    pub buffer: f64,
    pub realizations: u64,
    /// Disorder-average threshold; defaults to half the coupling mean.
    pub mu: Option<f64>,
    pub first_realization: u64,
}

/// Pack the shell `Λ_L \ Λ_{2 R0}` with cubes of side `ell`.
///
/// In one dimension each shell component is packed from the hole outward;
/// in higher dimensions the box is tiled from its lower corner and cubes
/// meeting the hole are dropped.
pub fn shell_cubes(dim: usize, box_side: f64, r0: f64, ell: f64) -> Vec<PlateauCube> {
    let half = box_side / 2.0;
    if ell <= 0.0 || ell > box_side {
        return Vec::new();
    }
    if dim == 1 {
        let span = half - r0;
        let per_side = (span / ell).floor() as usize;
        let mut cubes = Vec::with_capacity(2 * per_side);
        for k in 0..per_side {
            cubes.push(PlateauCube {
                origin: vec![-r0 - (k as f64 + 1.0) * ell],
                side: ell,
            });
            cubes.push(PlateauCube {
                origin: vec![r0 + k as f64 * ell],
                side: ell,
            });
        }
        cubes.sort_by(|a, b| a.origin[0].total_cmp(&b.origin[0]));
        return cubes;
    }
    let per_axis = (box_side / ell).floor() as usize;
    if per_axis == 0 {
        return Vec::new();
    }
    let mut cubes = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let origin: Vec<f64> = idx.iter().map(|&i| -half + i as f64 * ell).collect();
        // keep cubes disjoint from the hole Λ_{2 r0}
        let hits_hole = origin
            .iter()
            .all(|&o| o < r0 && o + ell > -r0);
        if !hits_hole {
            cubes.push(PlateauCube {
                origin,
                side: ell,
            });
        }
        let mut k = dim;
        loop {
            if k == 0 {
                return cubes;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Build the normalized plateau family on an assembled operator's domain.
pub fn build_trial_set(
    h: &HamiltonianMatrix,
    witness: &Witness,
    box_side: f64,
) -> Result<TrialFunctionSet> {
    let domain = &h.domain;
    let dim = domain.dim;
    let f_l = witness.f.value(box_side);
    if !(f_l > 0.0) {
        return Err(EnvlocError::Witness(format!(
            "witness evaluates to {f_l} at L = {box_side}"
        )));
    }
    let ell = f_l.powf(-0.25) * box_side;
    let cubes = shell_cubes(dim, box_side, witness.r0, ell);
    let count_cap = f_l.powf(dim as f64 / 4.0);
    let n_cubes = cubes.len();
    if n_cubes as f64 > count_cap + 1e-9 {
        return Err(EnvlocError::Precondition(format!(
            "packed {n_cubes} cubes, above the cap {count_cap}"
        )));
    }

    let margin = ell / 4.0;
    let h_step = domain.spacing;
    let mut functions = Vec::with_capacity(n_cubes);
    let mut plateau_value = 0.0f64;
    let mut grad_sup = 0.0f64;
    for cube in &cubes {
        let mut phi = vec![0.0f64; domain.node_count()];
        for (flat, x) in domain.nodes() {
            let mut t = 1.0f64;
            for k in 0..dim {
                let lo = cube.origin[k];
                let hi = cube.origin[k] + cube.side;
                if x[k] <= lo || x[k] >= hi {
                    t = 0.0;
                    break;
                }
                let edge = (x[k] - lo).min(hi - x[k]);
                t *= (edge / margin).min(1.0);
            }
            phi[flat] = t;
        }
        let norm = phi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(EnvlocError::Precondition(format!(
                "plateau cube at {:?} contains no grid node",
                cube.origin
            )));
        }
        phi.iter_mut().for_each(|v| *v /= norm);
        let peak = phi.iter().cloned().fold(0.0, f64::max);
        plateau_value = plateau_value.max(peak);
        // discrete gradient sup (forward differences along each axis)
        for (flat, x) in domain.nodes() {
            for k in 0..dim {
                let mut xn = x.clone();
                xn[k] += h_step;
                let neighbor = neighbor_flat(domain, flat, k);
                if let Some(nf) = neighbor {
                    grad_sup = grad_sup.max((phi[nf] - phi[flat]).abs() / h_step);
                }
            }
        }
        functions.push(phi);
    }

    // continuum normalization: phi_cont = phi_disc / h^{d/2}
    let h_half_d = h_step.powf(dim as f64 / 2.0);
    let c0 = plateau_value / h_half_d * ell.powf(dim as f64 / 2.0);
    let c0_grad = grad_sup / h_half_d * ell.powf(1.0 + dim as f64 / 2.0);

    Ok(TrialFunctionSet {
        box_side,
        cube_side: ell,
        cubes,
        kappa: n_cubes as f64 / count_cap,
        count_cap,
        c0,
        c0_grad,
        functions,
    })
}

fn neighbor_flat(domain: &crate::lattice::LatticeDomain, flat: usize, axis: usize) -> Option<usize> {
    let mut idx = domain.multi_index(flat);
    if idx[axis] + 1 >= domain.shape[axis] {
        return None;
    }
    idx[axis] += 1;
    Some(domain.flat_index(&idx))
}

/// Interior sites `i` with `Λ_1(i)` inside the cube shrunk by its margin.
pub fn interior_sites(cube: &PlateauCube) -> Vec<Vec<i64>> {
    let margin = cube.side / 4.0;
    let dim = cube.origin.len();
    let mut ranges = Vec::with_capacity(dim);
    for k in 0..dim {
        let lo = cube.origin[k] + margin + 0.5;
        let hi = cube.origin[k] + cube.side - margin - 0.5;
        ranges.push(((lo - 1e-12).ceil() as i64, (hi + 1e-12).floor() as i64));
    }
    let mut sites = vec![vec![]];
    for &(lo, hi) in &ranges {
        let mut next = Vec::new();
        for prefix in &sites {
            for j in lo..=hi {
                let mut s = prefix.clone();
                s.push(j);
                next.push(s);
            }
        }
        sites = next;
    }
    sites
}

/// Negative-spectrum threshold used by the certificates: just below zero,
/// scaled off the discretization's energy unit.
pub fn negative_threshold(spacing: f64) -> f64 {
    -1e-9 / (spacing * spacing)
}

/// Run the trial-function certificate campaign at one box size.
pub fn trial_certificate(
    model: &ModelSpec,
    cfg: &TrialConfig,
) -> Result<TrialCertificateRecord> {
    let witness = *model.envelope.witness().ok_or_else(|| {
        EnvlocError::Precondition(
            "trial certificates need an envelope with an attached witness (F, R0)".into(),
        )
    })?;
    witness.f.validate()?;
    if cfg.box_side <= 2.0 * witness.r0 {
        return Err(EnvlocError::Precondition(format!(
            "box side {} must exceed 2 R0 = {}",
            cfg.box_side,
            2.0 * witness.r0
        )));
    }
    let mean = model.disorder.distribution.mean();
    let mu = cfg.mu.unwrap_or(0.5 * mean);
    if !(mu > 0.0 && mu < mean) {
        return Err(EnvlocError::Precondition(format!(
            "mu must lie in ]0, E[omega]] = ]0, {mean}[, got {mu}"
        )));
    }

    let threshold = negative_threshold(model.spacing);
    let center = model.origin();
    let mut set: Option<TrialFunctionSet> = None;
    let mut outcomes = Vec::with_capacity(cfg.realizations as usize);
    let mut successes = 0usize;
    let mut sound = true;
    for r in 0..cfg.realizations {
        let realization = cfg.first_realization + r;
        let ham = model.finite_volume(&center, cfg.box_side, cfg.buffer, realization)?;
        if set.is_none() {
            set = Some(build_trial_set(&ham, &witness, cfg.box_side)?);
        }
        let set_ref = set.as_ref().expect("set built on first realization");
        let quotients: Vec<f64> = set_ref
            .functions
            .iter()
            .map(|phi| ham.matrix.quadratic_form(phi))
            .collect();
        let mut x_stats = Vec::with_capacity(set_ref.cubes.len());
        let mut z_counts = Vec::with_capacity(set_ref.cubes.len());
        for cube in &set_ref.cubes {
            let sites = interior_sites(cube);
            let z = sites.len();
            let x = if z > 0 {
                sites
                    .iter()
                    .map(|s| model.disorder.coupling(realization, s))
                    .sum::<f64>()
                    / z as f64
            } else {
                0.0
            };
            x_stats.push(x);
            z_counts.push(z);
        }
        let max_quotient = quotients.iter().cloned().fold(None, |m: Option<f64>, q| {
            Some(m.map_or(q, |v| v.max(q)))
        });
        let certified = matches!(max_quotient, Some(q) if q < threshold);
        let count = Slicer::new(&ham.matrix, CountOptions::default())
            .count_below(threshold)
            .count;
        if certified {
            successes += 1;
            if count < set_ref.functions.len() {
                sound = false;
            }
        }
        outcomes.push(TrialRealization {
            realization,
            quotients,
            x_stats,
            z_counts,
            max_quotient,
            certified,
            count_below: count,
        });
    }

    let set = set.expect("at least one realization");
    Ok(TrialCertificateRecord {
        box_side: cfg.box_side,
        cube_side: set.cube_side,
        n_cubes: set.functions.len(),
        kappa: set.kappa,
        mu,
        threshold,
        realizations: outcomes,
        success_fraction: successes as f64 / cfg.realizations.max(1) as f64,
        sound,
    })
}

/// Growth of the bound-state count with the box size, against the
/// certificate's realized cube counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthRow {
    pub box_side: f64,
    pub n_cubes: usize,
    pub kappa: f64,
    /// `kappa * F(L)^(d/4)` (equals the realized cube count).
    pub bound: f64,
    pub counts: Vec<usize>,
    pub mean_count: f64,
    pub verdict: bool,
}

/// For each box size: the mean eigenvalue count below zero and the realized
/// certificate bound.
pub fn infinitude_growth(
    model: &ModelSpec,
    sides: &[f64],
    buffer: f64,
    realizations: u64,
) -> Result<Vec<GrowthRow>> {
    let witness = *model.envelope.witness().ok_or_else(|| {
        EnvlocError::Precondition("growth study needs an envelope witness".into())
    })?;
    witness.f.validate()?;
    let threshold = negative_threshold(model.spacing);
    let center = model.origin();
    let mut rows = Vec::with_capacity(sides.len());
    for &l in sides {
        let mut counts = Vec::with_capacity(realizations as usize);
        let mut set_info: Option<(usize, f64, f64)> = None;
        for r in 0..realizations {
            let ham = model.finite_volume(&center, l, buffer, r)?;
            if set_info.is_none() {
                let set = build_trial_set(&ham, &witness, l)?;
                set_info = Some((set.functions.len(), set.kappa, set.count_cap));
            }
            counts.push(
                Slicer::new(&ham.matrix, CountOptions::default())
                    .count_below(threshold)
                    .count,
            );
        }
        let (n_cubes, kappa, cap) = set_info.expect("at least one realization");
        let bound = kappa * cap;
        let mean = counts.iter().sum::<usize>() as f64 / counts.len().max(1) as f64;
        rows.push(GrowthRow {
            box_side: l,
            n_cubes,
            kappa,
            bound,
            counts,
            mean_count: mean,
            verdict: mean >= bound,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{
        DisorderSpec, Distribution, GammaFn, SingleSitePotential, WitnessFn,
    };

    fn witnessed_model(lambda: f64, alpha: f64, f: WitnessFn, r0: f64, seed: u64) -> ModelSpec {
        ModelSpec {
            dim: 1,
            lambda,
            envelope: EnvelopeSpec::General {
                gamma: GammaFn::PowerLaw { alpha },
                witness: Witness { f, r0 },
            },
            u: SingleSitePotential::cube(1.0, 1.0).unwrap(),
            disorder: DisorderSpec::new(Distribution::Uniform01, seed),
            spacing: 0.25,
        }
    }

    fn linear_witness() -> WitnessFn {
        WitnessFn::Power {
            coeff: 0.7,
            exponent: 1.0,
        }
    }

    #[test]
    fn shell_packing_in_1d() {
        // L = 64, ell = 20, r0 = 2: each side holds floor(30/20) = 1 cube.
        let cubes = shell_cubes(1, 64.0, 2.0, 20.0);
        assert_eq!(cubes.len(), 2);
        for c in &cubes {
            assert!(c.origin[0] >= -32.0 && c.origin[0] + c.side <= 32.0);
            assert!(c.origin[0] + c.side <= -2.0 || c.origin[0] >= 2.0);
        }
    }

    #[test]
    fn oversized_cubes_pack_nothing() {
        assert!(shell_cubes(1, 64.0, 2.0, 38.0).is_empty());
    }

    #[test]
    fn plateau_functions_satisfy_shape_invariants() {
        let m = witnessed_model(4.0, 1.0, linear_witness(), 1.0, 3);
        let ham = m.finite_volume(&[0.0], 64.0, 4.0, 0).unwrap();
        let w = m.envelope.witness().unwrap();
        let set = build_trial_set(&ham, w, 64.0).unwrap();
        assert!(set.functions.len() >= 2);
        assert!(set.functions.len() as f64 <= set.count_cap + 1e-9);
        assert!(set.kappa > 0.0 && set.kappa <= 1.0 + 1e-9);

        let margin = set.cube_side / 4.0;
        for (k, phi) in set.functions.iter().enumerate() {
            let norm: f64 = phi.iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-10, "norm^2 = {norm}");
            // plateau flat on the inner region
            let cube = &set.cubes[k];
            let peak = phi.iter().cloned().fold(0.0, f64::max);
            for (flat, x) in ham.domain.nodes() {
                let inner = x[0] >= cube.origin[0] + margin
                    && x[0] <= cube.origin[0] + cube.side - margin;
                if inner {
                    assert!((phi[flat] - peak).abs() < 1e-12);
                }
                let outside = x[0] <= cube.origin[0] || x[0] >= cube.origin[0] + cube.side;
                if outside {
                    assert_eq!(phi[flat], 0.0);
                }
            }
            // disjoint supports: overlap with every other function is empty
            for other in &set.functions[..k] {
                assert!(phi.iter().zip(other).all(|(a, b)| a * b == 0.0));
            }
        }
    }

    #[test]
    fn quotient_matches_dense_quadratic_form_oracle() {
        let m = witnessed_model(4.0, 1.0, linear_witness(), 1.0, 7);
        let ham = m.finite_volume(&[0.0], 64.0, 4.0, 1).unwrap();
        let set = build_trial_set(&ham, m.envelope.witness().unwrap(), 64.0).unwrap();
        let dense = ham.matrix.to_dense();
        for phi in &set.functions {
            let v = nalgebra::DVector::from_column_slice(phi);
            let oracle = (&v.transpose() * &dense * &v)[(0, 0)];
            let fast = ham.matrix.quadratic_form(phi);
            assert!(
                (oracle - fast).abs() < 1e-9 * oracle.abs().max(1.0),
                "{fast} vs {oracle}"
            );
        }
    }

    #[test]
    fn free_disorder_never_certifies() {
        let m = ModelSpec {
            disorder: DisorderSpec::new(Distribution::Bernoulli { p: 0.0 }, 0),
            ..witnessed_model(4.0, 1.0, linear_witness(), 1.0, 0)
        };
        let rec = trial_certificate(
            &m,
            &TrialConfig {
                box_side: 64.0,
                buffer: 4.0,
                realizations: 3,
                mu: Some(0.1),
                first_realization: 0,
            },
        );
        // mu must be below the coupling mean, which is zero here: rejected.
        assert!(rec.is_err());
        // run with a tiny positive mean instead
        let m = ModelSpec {
            disorder: DisorderSpec::new(Distribution::Bernoulli { p: 1e-9 }, 0),
            ..m
        };
        let rec = trial_certificate(
            &m,
            &TrialConfig {
                box_side: 64.0,
                buffer: 4.0,
                realizations: 3,
                mu: Some(1e-10),
                first_realization: 0,
            },
        )
        .unwrap();
        for out in &rec.realizations {
            assert!(!out.certified, "free operator must not certify");
            assert!(out.quotients.iter().all(|&q| q > 0.0));
        }
        assert!(rec.sound);
    }

    #[test]
    fn certificate_fires_and_is_sound_at_strong_coupling() {
        let m = witnessed_model(4.0, 1.0, linear_witness(), 1.0, 11);
        let rec = trial_certificate(
            &m,
            &TrialConfig {
                box_side: 64.0,
                buffer: 4.0,
                realizations: 5,
                mu: None,
                first_realization: 0,
            },
        )
        .unwrap();
        assert!(rec.n_cubes >= 2);
        assert!(rec.success_fraction > 0.0, "no realization certified");
        assert!(rec.sound);
        for out in &rec.realizations {
            if out.certified {
                assert!(out.count_below >= rec.n_cubes);
            }
        }
    }

    #[test]
    fn growth_counts_non_decreasing_in_box() {
        let m = witnessed_model(4.0, 1.0, linear_witness(), 1.0, 5);
        let rows = infinitude_growth(&m, &[16.0, 32.0, 64.0], 4.0, 3).unwrap();
        for r in 0..3 {
            for k in 1..rows.len() {
                assert!(
                    rows[k].counts[r] >= rows[k - 1].counts[r],
                    "count fell from {} to {} between L = {} and {}",
                    rows[k - 1].counts[r],
                    rows[k].counts[r],
                    rows[k - 1].box_side,
                    rows[k].box_side
                );
            }
        }
        assert!(rows[2].verdict, "strong coupling should beat the bound");
    }

    #[test]
    fn fast_decay_refused_via_witness() {
        // gamma = <x>^{-2.5} cannot satisfy any admissible witness; the
        // violation surfaces at assembly.
        let m = witnessed_model(4.0, 2.5, linear_witness(), 1.0, 0);
        let err = trial_certificate(
            &m,
            &TrialConfig {
                box_side: 32.0,
                buffer: 4.0,
                realizations: 1,
                mu: None,
                first_realization: 0,
            },
        );
        assert!(matches!(
            err,
            Err(crate::error::EnvlocError::WitnessViolated { .. })
        ));
    }
}
