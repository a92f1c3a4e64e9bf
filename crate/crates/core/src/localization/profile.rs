//! Eigenfunction localization profiles on the unit-cube partition.
//!
//! Space is tiled by half-open unit cubes centered at the integer lattice;
//! `||chi_x phi||` aggregates the eigenvector mass per cube. The decay mass
//! comes from a log-linear least-squares fit of cube mass against distance
//! from the localization center.

use serde::{Deserialize, Serialize};

use crate::error::{EnvlocError, Result};
use crate::lattice::{HamiltonianMatrix, LatticeDomain};

/// Per-cube masses of one normalized eigenvector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubeProfile {
    pub sites: Vec<Vec<i64>>,
    /// `||chi_x phi||` per cube (same order as `sites`).
    pub masses: Vec<f64>,
}

/// Mass per unit cube, sites in lexicographic order.
pub fn cube_masses(vector: &[f64], domain: &LatticeDomain) -> CubeProfile {
    let mut map: std::collections::BTreeMap<Vec<i64>, f64> = std::collections::BTreeMap::new();
    for (flat, x) in domain.nodes() {
        let site = LatticeDomain::owning_site(&x);
        *map.entry(site).or_insert(0.0) += vector[flat] * vector[flat];
    }
    let (sites, masses): (Vec<_>, Vec<_>) = map.into_iter().map(|(s, m)| (s, m.sqrt())).unzip();
    CubeProfile { sites, masses }
}

impl CubeProfile {
    /// Sum of squared cube masses (1 for a normalized vector: the cubes
    /// partition the box).
    pub fn total_mass_sq(&self) -> f64 {
        self.masses.iter().map(|m| m * m).sum()
    }

    /// Argmax cube; ties resolved toward the lexicographically smaller site.
    pub fn center(&self) -> Vec<i64> {
        let mut best = 0usize;
        for i in 1..self.sites.len() {
            // BTreeMap order is lexicographic, so strict improvement keeps
            // the smaller site on ties.
            if self.masses[i] > self.masses[best] {
                best = i;
            }
        }
        self.sites[best].clone()
    }
}

/// Localization center of a normalized eigenvector.
pub fn localization_center(vector: &[f64], domain: &LatticeDomain) -> Vec<i64> {
    cube_masses(vector, domain).center()
}

/// Distance window for the decay fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub min_dist: f64,
    pub max_dist: f64,
}

/// Default window: drop the innermost two and outermost two cube shells
/// (near-center curvature and boundary contamination).
pub fn default_fit_window(profile: &CubeProfile, center: &[i64]) -> FitWindow {
    let mut dists: Vec<f64> = profile
        .sites
        .iter()
        .map(|s| euclid(s, center))
        .collect();
    dists.sort_by(f64::total_cmp);
    dists.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let k = dists.len();
    if k <= 5 {
        return FitWindow {
            min_dist: 0.0,
            max_dist: f64::INFINITY,
        };
    }
    FitWindow {
        min_dist: dists[2] - 1e-9,
        max_dist: dists[k - 3] + 1e-9,
    }
}

fn euclid(site: &[i64], center: &[i64]) -> f64 {
    site.iter()
        .zip(center)
        .map(|(&a, &b)| {
            let d = (a - b) as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Result of the log-linear decay fit `log ||chi_x phi|| ~ log C - m |x - x_n|`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayFit {
    /// Exponential decay mass `m` (positive means decaying).
    pub mass: f64,
    /// Prefactor `C`.
    pub prefactor: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    pub used_points: usize,
    pub zeros_excluded: usize,
}

/// Least-squares decay fit over the window. Refuses with fewer than five
/// usable (positive-mass) points.
pub fn decay_mass_fit(
    profile: &CubeProfile,
    center: &[i64],
    window: FitWindow,
) -> Result<DecayFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut zeros = 0usize;
    for (site, &mass) in profile.sites.iter().zip(&profile.masses) {
        let d = euclid(site, center);
        if d < window.min_dist || d > window.max_dist {
            continue;
        }
        if mass <= 0.0 {
            zeros += 1;
            continue;
        }
        xs.push(d);
        ys.push(mass.ln());
    }
    if xs.len() < 5 {
        return Err(EnvlocError::FitRefused(format!(
            "{} usable cubes in the fit window (need 5); {} zero-mass cubes excluded",
            xs.len(),
            zeros
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        mass: -slope,
        prefactor: intercept.exp(),
        residual,
        used_points: xs.len(),
        zeros_excluded: zeros,
    })
}

/// One analyzed eigenfunction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizationProfile {
    pub energy: f64,
    pub center: Vec<i64>,
    pub profile: CubeProfile,
    pub fit: Option<DecayFit>,
    pub fit_window: FitWindow,
    pub sule_epsilon: f64,
    /// Sites where the SULE-form bound failed.
    pub sule_violations: Vec<Vec<i64>>,
    /// Verdict: positive fitted mass and a successful fit.
    pub localized: bool,
}

/// Fraction of the fitted mass retained in the SULE-form check.
pub const SULE_MASS_SLACK: f64 = 0.8;

/// Analyze one normalized eigenvector: center, cube profile, decay fit, and
/// the SULE-form bound `||chi_x phi|| <= C e^{|x_n|^eps} e^{-0.8 m |x-x_n|}`.
pub fn analyze_eigenfunction(
    h: &HamiltonianMatrix,
    energy: f64,
    vector: &[f64],
    sule_epsilon: f64,
) -> LocalizationProfile {
    let profile = cube_masses(vector, &h.domain);
    let center = profile.center();
    let window = default_fit_window(&profile, &center);
    let fit = decay_mass_fit(&profile, &center, window).ok();
    let localized = fit.map_or(false, |f| f.mass > 0.0);
    let sule_violations = match fit {
        Some(f) if f.mass > 0.0 => sule_violations(&profile, &center, &f, sule_epsilon),
        _ => Vec::new(),
    };
    LocalizationProfile {
        energy,
        center,
        profile,
        fit,
        fit_window: window,
        sule_epsilon,
        sule_violations,
        localized,
    }
}

/// Sites violating the SULE-form bound at mass `0.8 m` and the fitted
/// prefactor (floored at the center mass, the smallest prefactor for which
/// the bound can hold at all).
pub fn sule_violations(
    profile: &CubeProfile,
    center: &[i64],
    fit: &DecayFit,
    eps: f64,
) -> Vec<Vec<i64>> {
    let center_norm = center
        .iter()
        .map(|&c| (c as f64) * (c as f64))
        .sum::<f64>()
        .sqrt();
    let center_mass = profile
        .sites
        .iter()
        .zip(&profile.masses)
        .find(|(s, _)| s.as_slice() == center)
        .map(|(_, &m)| m)
        .unwrap_or(0.0);
    let sule_prefactor = fit
        .prefactor
        .max(center_mass * (-center_norm.powf(eps)).exp());
    let amplitude = sule_prefactor * center_norm.powf(eps).exp();
    profile
        .sites
        .iter()
        .zip(&profile.masses)
        .filter(|(site, &mass)| {
            let d = euclid(site, center);
            mass > amplitude * (-SULE_MASS_SLACK * fit.mass * d).exp() * (1.0 + 1e-9)
        })
        .map(|(site, _)| site.clone())
        .collect()
}
