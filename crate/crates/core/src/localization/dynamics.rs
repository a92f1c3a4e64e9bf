//! Dynamical-localization surrogates in the computed eigenbasis.
//!
//! The time evolution of a cube-localized packet, filtered to a spectral
//! window `I`, is expanded over the window's eigenpairs, so the propagated
//! moments carry no time-stepping error. The eigenfunction correlator
//! `Q(x) = sum_n ||chi_x phi_n|| ||chi_0 phi_n||` dominates the kernel
//! column of every bounded function of the filtered operator, which is the
//! computable stand-in for the supremum over |f| <= 1.

use serde::{Deserialize, Serialize};

use crate::error::{EnvlocError, Result};
use crate::lattice::{bracket, HamiltonianMatrix, LatticeDomain};
use crate::localization::profile::{
    cube_masses, decay_mass_fit, default_fit_window, DecayFit,
};
use crate::spectral::SpectralSummary;

/// Moments and correlator of one realization's window dynamics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DynamicsReport {
    pub interval: (f64, f64),
    pub moment_order: f64,
    pub times: Vec<f64>,
    /// `M_p(t)`: `<x>^p`-weighted mass of the unit-norm projected packet.
    pub moments: Vec<f64>,
    pub sup_moment: f64,
    /// `||P_I psi_0||^2`: how much of the packet the window captured.
    /// Multiplying `moments` by this recovers the raw (unnormalized) moments.
    pub projected_mass: f64,
    pub correlator_sites: Vec<Vec<i64>>,
    pub correlator: Vec<f64>,
    pub correlator_fit: Option<DecayFit>,
    /// Minimum over sampled `(x, t)` of `Q(x) - ||chi_x U(t) P_I psi_0||`
    /// (non-negative up to roundoff by the triangle inequality).
    pub domination_margin: f64,
}

/// Normalized indicator packet of the unit cube at the origin.
pub fn origin_packet(domain: &LatticeDomain) -> Result<Vec<f64>> {
    let mut psi = vec![0.0; domain.node_count()];
    let mut hits = 0usize;
    for (flat, x) in domain.nodes() {
        if LatticeDomain::owning_site(&x).iter().all(|&c| c == 0) {
            psi[flat] = 1.0;
            hits += 1;
        }
    }
    if hits == 0 {
        return Err(EnvlocError::Precondition(
            "domain does not contain the origin unit cube".into(),
        ));
    }
    let nrm = (hits as f64).sqrt();
    psi.iter_mut().for_each(|v| *v /= nrm);
    Ok(psi)
}

/// Eigenfunction correlator table over the cube partition.
pub fn eigenfunction_correlator(
    h: &HamiltonianMatrix,
    summary: &SpectralSummary,
) -> Result<(Vec<Vec<i64>>, Vec<f64>)> {
    if !summary.complete {
        return Err(EnvlocError::Precondition(
            "correlator needs a complete eigenbasis for the window".into(),
        ));
    }
    let origin = vec![0i64; h.domain.dim];
    let mut sites: Vec<Vec<i64>> = Vec::new();
    let mut q: Vec<f64> = Vec::new();
    for vector in &summary.vectors {
        let profile = cube_masses(vector, &h.domain);
        let at_origin = profile
            .sites
            .iter()
            .zip(&profile.masses)
            .find(|(s, _)| **s == origin)
            .map(|(_, &m)| m)
            .unwrap_or(0.0);
        if sites.is_empty() {
            sites = profile.sites.clone();
            q = vec![0.0; sites.len()];
        }
        for (k, &m) in profile.masses.iter().enumerate() {
            q[k] += m * at_origin;
        }
    }
    if sites.is_empty() {
        // empty window: still report the partition with zero correlator
        let empty = vec![0.0; h.domain.node_count()];
        let profile = cube_masses(&empty, &h.domain);
        sites = profile.sites;
        q = vec![0.0; sites.len()];
    }
    Ok((sites, q))
}

/// Spectral-basis time evolution of the origin packet filtered to the
/// window, with `<x>^p`-weighted moments and the correlator-domination
/// audit. Refuses incomplete eigenbases (they would silently underestimate
/// the moments).
pub fn dynamics_moment(
    h: &HamiltonianMatrix,
    summary: &SpectralSummary,
    interval: (f64, f64),
    p: f64,
    times: &[f64],
) -> Result<DynamicsReport> {
    if !summary.complete {
        return Err(EnvlocError::Precondition(
            "dynamics needs a complete eigenbasis for the window".into(),
        ));
    }
    let domain = &h.domain;
    let n = domain.node_count();
    let psi0 = origin_packet(domain)?;

    // overlap coefficients of the packet with the window states
    let coeff: Vec<f64> = summary
        .vectors
        .iter()
        .map(|v| v.iter().zip(&psi0).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let projected_mass: f64 = coeff.iter().map(|c| c * c).sum();

    let weights: Vec<f64> = (0..n)
        .map(|flat| bracket(&domain.node_coordinate(flat)).powf(p))
        .collect();

    let (sites, q) = eigenfunction_correlator(h, summary)?;
    let site_of_node: Vec<usize> = (0..n)
        .map(|flat| {
            let s = LatticeDomain::owning_site(&domain.node_coordinate(flat));
            sites.binary_search(&s).expect("partition covers all nodes")
        })
        .collect();

    let mut moments = Vec::with_capacity(times.len());
    let mut domination_margin = f64::INFINITY;
    let mut re = vec![0.0f64; n];
    let mut im = vec![0.0f64; n];
    for &t in times {
        re.iter_mut().for_each(|v| *v = 0.0);
        im.iter_mut().for_each(|v| *v = 0.0);
        for (k, vector) in summary.vectors.iter().enumerate() {
            let phase = -summary.energies[k] * t;
            let (s, c) = phase.sin_cos();
            let a = coeff[k];
            for (g, &vg) in vector.iter().enumerate() {
                re[g] += a * c * vg;
                im[g] += a * s * vg;
            }
        }
        // moment of the normalized projected packet
        let mut m = 0.0;
        for g in 0..n {
            m += weights[g] * (re[g] * re[g] + im[g] * im[g]);
        }
        moments.push(if projected_mass > 1e-300 {
            m / projected_mass
        } else {
            0.0
        });

        // domination: per cube, ||chi_x U(t) P psi0|| <= Q(x)
        let mut cube_sq = vec![0.0f64; sites.len()];
        for g in 0..n {
            cube_sq[site_of_node[g]] += re[g] * re[g] + im[g] * im[g];
        }
        for (k, &sq) in cube_sq.iter().enumerate() {
            domination_margin = domination_margin.min(q[k] - sq.sqrt());
        }
    }
    let sup_moment = moments.iter().cloned().fold(0.0, f64::max);

    // decay fit of the correlator, anchored at the origin cube
    let origin = vec![0i64; domain.dim];
    let q_profile = crate::localization::profile::CubeProfile {
        sites: sites.clone(),
        masses: q.clone(),
    };
    let window = default_fit_window(&q_profile, &origin);
    let correlator_fit = decay_mass_fit(&q_profile, &origin, window).ok();

    Ok(DynamicsReport {
        interval,
        moment_order: p,
        times: times.to_vec(),
        moments,
        sup_moment,
        projected_mass,
        correlator_sites: sites,
        correlator: q,
        correlator_fit,
        domination_margin,
    })
}
