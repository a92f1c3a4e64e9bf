//! Per-realization localization and dynamics pipeline.
//!
//! One cell = one `(alpha, realization)` pair: assemble the operator, take
//! the bottom fraction of its strictly negative spectrum as the analysis
//! window, compute the complete eigenbasis there, and analyze each
//! eigenfunction (center, decay mass, SULE form, center-radius bound).
//! The dynamics variant evolves the origin packet in the same window.

use serde::{Deserialize, Serialize};

use crate::error::{EnvlocError, Result};
use crate::lattice::{HamiltonianMatrix, ModelSpec};
use crate::localization::{
    analyze_eigenfunction, center_radius_prediction, dynamics_moment, DynamicsReport,
    LocalizationProfile,
};
use crate::spectral::{lowest_eigenpairs, CountOptions, EigenRequest, Slicer, SpectralSummary};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizeConfig {
    pub box_side: f64,
    pub buffer: f64,
    /// Fraction of the strictly negative spectral range kept, measured up
    /// from the ground energy.
    pub window_fraction: f64,
    pub sule_epsilon: f64,
    /// The measured center norm must satisfy
    /// `|x_n| <= radius_safety * predicted radius`.
    pub radius_safety: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenfunctionReport {
    pub energy: f64,
    pub center: Vec<i64>,
    pub center_norm: f64,
    pub mass: Option<f64>,
    pub prefactor: Option<f64>,
    pub fit_residual: Option<f64>,
    pub sule_ok: bool,
    pub predicted_radius: f64,
    pub radius_ok: bool,
    pub localized: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizeCellResult {
    pub alpha: f64,
    pub realization: u64,
    pub window: (f64, f64),
    pub negative_count: usize,
    pub reports: Vec<EigenfunctionReport>,
    /// Partition identity held for every analyzed eigenfunction.
    pub partition_ok: bool,
}

/// Analysis window: bottom `fraction` of the strictly negative spectral
/// range `[ground, max negative eigenvalue]`. Empty if nothing is negative.
pub fn negative_window(
    slicer: &Slicer,
    spacing: f64,
    fraction: f64,
) -> Option<((f64, f64), usize)> {
    let tau = crate::experiments::negative_threshold(spacing);
    let m = slicer.count_below(tau).count;
    if m == 0 {
        return None;
    }
    let ground = slicer.kth_eigenvalue(1);
    let top_negative = slicer.kth_eigenvalue(m);
    let hi = ground + fraction * (top_negative - ground);
    Some(((ground, hi), m))
}

fn window_pairs(
    ham: &HamiltonianMatrix,
    cfg_fraction: f64,
) -> Result<Option<((f64, f64), usize, SpectralSummary)>> {
    let slicer = Slicer::new(&ham.matrix, CountOptions::default());
    let Some(((ground, hi), m)) = negative_window(&slicer, ham.domain.spacing, cfg_fraction)
    else {
        return Ok(None);
    };
    drop(slicer);
    let norm = ham.matrix.gershgorin_norm();
    let lo = ground - 1e-9 * norm;
    let hi = hi + 1e-9 * norm;
    let summary = lowest_eigenpairs(ham, EigenRequest::Window { lo, hi })?;
    if !summary.complete {
        return Err(EnvlocError::Spectral(format!(
            "eigenbasis for the window [{lo}, {hi}] did not converge"
        )));
    }
    Ok(Some(((lo, hi), m, summary)))
}

/// Localization analysis for one `(alpha, realization)` cell.
pub fn localize_cell(
    model: &ModelSpec,
    cfg: &LocalizeConfig,
    realization: u64,
) -> Result<(LocalizeCellResult, HamiltonianMatrix, SpectralSummary)> {
    let alpha = match &model.envelope {
        crate::lattice::EnvelopeSpec::PowerLaw { alpha } => *alpha,
        crate::lattice::EnvelopeSpec::General { .. } => {
            return Err(EnvlocError::Precondition(
                "localization cells use power-law envelopes".into(),
            ))
        }
    };
    let center = model.origin();
    let ham = model.finite_volume(&center, cfg.box_side, cfg.buffer, realization)?;
    let Some((window, m, summary)) = window_pairs(&ham, cfg.window_fraction)? else {
        return Ok((
            LocalizeCellResult {
                alpha,
                realization,
                window: (0.0, 0.0),
                negative_count: 0,
                reports: Vec::new(),
                partition_ok: true,
            },
            ham,
            SpectralSummary {
                threshold: 0.0,
                count: 0,
                ground_energy: 0.0,
                energies: Vec::new(),
                vectors: Vec::new(),
                method: "none".into(),
                residual_norms: Vec::new(),
                complete: true,
                shifted: false,
            },
        ));
    };

    let u0 = model.u.sup();
    let mut reports = Vec::with_capacity(summary.energies.len());
    let mut partition_ok = true;
    for (k, vector) in summary.vectors.iter().enumerate() {
        let energy = summary.energies[k];
        let profile: LocalizationProfile =
            analyze_eigenfunction(&ham, energy, vector, cfg.sule_epsilon);
        if (profile.profile.total_mass_sq() - 1.0).abs() > 1e-8 {
            partition_ok = false;
        }
        let center_norm = profile
            .center
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt();
        let predicted = center_radius_prediction(alpha, model.lambda, u0, energy);
        reports.push(EigenfunctionReport {
            energy,
            center: profile.center.clone(),
            center_norm,
            mass: profile.fit.map(|f| f.mass),
            prefactor: profile.fit.map(|f| f.prefactor),
            fit_residual: profile.fit.map(|f| f.residual),
            sule_ok: profile.sule_violations.is_empty(),
            predicted_radius: predicted,
            radius_ok: center_norm <= cfg.radius_safety * predicted,
            localized: profile.localized,
        });
    }
    Ok((
        LocalizeCellResult {
            alpha,
            realization,
            window,
            negative_count: m,
            reports,
            partition_ok,
        },
        ham,
        summary,
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DynamicsCellResult {
    pub alpha: f64,
    pub realization: u64,
    pub window: (f64, f64),
    pub pairs: usize,
    pub projected_mass: f64,
    pub sup_moment: f64,
    pub domination_margin: f64,
    pub correlator_mass: Option<f64>,
    pub moments: Vec<f64>,
}

/// Dynamics surrogate for one `(alpha, realization)` cell: `<x>^p` moments
/// of the window-filtered origin packet plus the correlator audit.
pub fn dynamics_cell(
    model: &ModelSpec,
    cfg: &LocalizeConfig,
    p: f64,
    times: &[f64],
    realization: u64,
) -> Result<(DynamicsCellResult, DynamicsReport)> {
    let (cell, ham, summary) = localize_cell(model, cfg, realization)?;
    let report = dynamics_moment(&ham, &summary, cell.window, p, times)?;
    Ok((
        DynamicsCellResult {
            alpha: cell.alpha,
            realization,
            window: cell.window,
            pairs: summary.energies.len(),
            projected_mass: report.projected_mass,
            sup_moment: report.sup_moment,
            domination_margin: report.domination_margin,
            correlator_mass: report.correlator_fit.map(|f| f.mass),
            moments: report.moments.clone(),
        },
        report,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{DisorderSpec, Distribution, EnvelopeSpec, SingleSitePotential};

    fn model(alpha: f64, seed: u64) -> ModelSpec {
        ModelSpec {
            dim: 1,
            lambda: 8.0,
            envelope: EnvelopeSpec::power_law(alpha),
            u: SingleSitePotential::cube(1.0, 1.0).unwrap(),
            disorder: DisorderSpec::new(Distribution::Uniform01, 77),
            spacing: 0.25,
        }
    }

    fn cfg() -> LocalizeConfig {
        LocalizeConfig {
            box_side: 32.0,
            buffer: 6.0,
            window_fraction: 0.2,
            sule_epsilon: 0.5,
            radius_safety: 4.0,
        }
    }

    #[test]
    fn localize_cell_produces_localized_states() {
        let (cell, _, _) = localize_cell(&model(0.0, 77), &cfg(), 0).unwrap();
        assert!(cell.negative_count > 0);
        assert!(!cell.reports.is_empty());
        assert!(cell.partition_ok);
        assert!(cell.reports.iter().all(|r| r.radius_ok), "{:#?}", cell.reports);
        let localized = cell.reports.iter().filter(|r| r.localized).count();
        assert!(localized * 2 >= cell.reports.len(), "most window states localize");
    }

    #[test]
    fn deep_impurity_center_matches_dense_argmax() {
        // one strong impurity at site 2
        let m = ModelSpec {
            dim: 1,
            lambda: 14.0,
            envelope: EnvelopeSpec::power_law(0.0),
            u: SingleSitePotential::cube(1.0, 1.0).unwrap(),
            disorder: DisorderSpec::new(Distribution::Bernoulli { p: 0.06 }, 4242),
            spacing: 0.25,
        };
        // hunt a realization whose only deep site is isolated
        let (cell, ham, summary) = localize_cell(&m, &cfg(), 5).unwrap();
        if cell.reports.is_empty() {
            return; // all couplings came up zero for this seed; covered elsewhere
        }
        // dense oracle: argmax of squared mass of the dense ground state
        let (es, vs) = crate::spectral::count::dense_eigenpairs(&ham.matrix);
        assert!((es[0] - summary.energies[0]).abs() < 1e-8 * ham.matrix.gershgorin_norm());
        let oracle_center =
            crate::localization::localization_center(&vs[0], &ham.domain);
        assert_eq!(cell.reports[0].center, oracle_center);
    }

    #[test]
    fn dynamics_cell_runs_and_dominates() {
        let times: Vec<f64> = (0..10).map(|k| k as f64 * 1.5).collect();
        let (cell, report) = dynamics_cell(&model(0.5, 3), &cfg(), 2.0, &times, 1).unwrap();
        assert!(cell.sup_moment >= 0.0);
        assert!(report.domination_margin >= -1e-9);
        assert_eq!(report.moments.len(), times.len());
    }
}
