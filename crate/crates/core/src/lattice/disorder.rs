//! Site disorder: i.i.d. couplings in `[0, 1]`, sampled counter-based.

use serde::{Deserialize, Serialize};

use crate::error::{EnvlocError, Result};
use crate::rng::site_uniform;

/// Single-site coupling distribution. All variants take values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Uniform01,
    Bernoulli { p: f64 },
    /// Piecewise-constant Lebesgue density on `[0, 1]` given by equal-width
    /// bins (normalized to integrate to one at construction).
    BoundedDensity { bins: Vec<f64> },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            Distribution::Uniform01 => Ok(()),
            Distribution::Bernoulli { p } => {
                if !(0.0..=1.0).contains(p) {
                    Err(EnvlocError::Model(format!("Bernoulli p must be in [0, 1], got {p}")))
                } else {
                    Ok(())
                }
            }
            Distribution::BoundedDensity { bins } => {
                if bins.is_empty() || bins.iter().any(|&b| b < 0.0 || !b.is_finite()) {
                    return Err(EnvlocError::Model(
                        "density table must be non-empty and non-negative".into(),
                    ));
                }
                if bins.iter().sum::<f64>() <= 0.0 {
                    return Err(EnvlocError::Model("density table integrates to zero".into()));
                }
                Ok(())
            }
        }
    }

    /// Sup of the Lebesgue density, `None` for the atomic Bernoulli case.
    pub fn density_sup(&self) -> Option<f64> {
        match self {
            Distribution::Uniform01 => Some(1.0),
            Distribution::Bernoulli { .. } => None,
            Distribution::BoundedDensity { bins } => {
                let norm = bins.iter().sum::<f64>() / bins.len() as f64;
                Some(bins.iter().cloned().fold(0.0, f64::max) / norm)
            }
        }
    }

    /// Mean of the coupling.
    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Uniform01 => 0.5,
            Distribution::Bernoulli { p } => *p,
            Distribution::BoundedDensity { bins } => {
                let total: f64 = bins.iter().sum();
                let w = 1.0 / bins.len() as f64;
                bins.iter()
                    .enumerate()
                    .map(|(k, &b)| b / total * (k as f64 + 0.5) * w)
                    .sum()
            }
        }
    }

    /// Map a uniform variate to a coupling value (inverse CDF).
    fn transform(&self, unit: f64) -> f64 {
        match self {
            Distribution::Uniform01 => unit,
            Distribution::Bernoulli { p } => {
                if unit < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Distribution::BoundedDensity { bins } => {
                let total: f64 = bins.iter().sum();
                let target = unit * total;
                let mut acc = 0.0;
                let w = 1.0 / bins.len() as f64;
                for (k, &b) in bins.iter().enumerate() {
                    if acc + b >= target || k == bins.len() - 1 {
                        let frac = if b > 0.0 { (target - acc) / b } else { 1.0 };
                        return ((k as f64 + frac.clamp(0.0, 1.0)) * w).min(1.0);
                    }
                    acc += b;
                }
                1.0
            }
        }
    }
}

/// Disorder configuration: distribution plus the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub distribution: Distribution,
    pub master_seed: u64,
}

impl DisorderSpec {
    pub fn new(distribution: Distribution, master_seed: u64) -> Self {
        Self {
            distribution,
            master_seed,
        }
    }

    /// Coupling at one site of one realization; a pure function of
    /// `(master seed, realization, site)`.
    pub fn coupling(&self, realization: u64, site: &[i64]) -> f64 {
        self.distribution
            .transform(site_uniform(self.master_seed, realization, site))
    }
}

/// One realization of site couplings over a finite site set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DisorderField {
    pub realization: u64,
    pub master_seed: u64,
    pub sites: Vec<Vec<i64>>,
    pub couplings: Vec<f64>,
}

/// Sample the couplings for `sites` in one realization.
pub fn sample_disorder(spec: &DisorderSpec, sites: &[Vec<i64>], realization: u64) -> DisorderField {
    let couplings = sites.iter().map(|s| spec.coupling(realization, s)).collect();
    DisorderField {
        realization,
        master_seed: spec.master_seed,
        sites: sites.to_vec(),
        couplings,
    }
}

impl DisorderField {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, f64)> {
        self.sites.iter().zip(self.couplings.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sites_1d(n: i64) -> Vec<Vec<i64>> {
        (-n..=n).map(|j| vec![j]).collect()
    }

    #[test]
    fn bernoulli_degenerate_cases() {
        let ones = DisorderSpec::new(Distribution::Bernoulli { p: 1.0 }, 3);
        let zeros = DisorderSpec::new(Distribution::Bernoulli { p: 0.0 }, 3);
        for (s, w) in sample_disorder(&ones, &sites_1d(20), 0).iter() {
            assert_eq!(w, 1.0, "site {s:?}");
        }
        for (_, w) in sample_disorder(&zeros, &sites_1d(20), 5).iter() {
            assert_eq!(w, 0.0);
        }
    }

    #[test]
    fn couplings_deterministic_and_in_range() {
        let spec = DisorderSpec::new(Distribution::Uniform01, 11);
        let a = sample_disorder(&spec, &sites_1d(50), 2);
        let b = sample_disorder(&spec, &sites_1d(50), 2);
        assert_eq!(a.couplings, b.couplings);
        assert!(a.couplings.iter().all(|w| (0.0..=1.0).contains(w)));
        let c = sample_disorder(&spec, &sites_1d(50), 3);
        assert_ne!(a.couplings, c.couplings);
    }

    #[test]
    fn bounded_density_mean_and_sup() {
        // density 2 on [0, 1/2], 0 on ]1/2, 1]: mean 1/4, sup 2.
        let d = Distribution::BoundedDensity { bins: vec![2.0, 0.0] };
        d.validate().unwrap();
        assert!((d.mean() - 0.25).abs() < 1e-12);
        assert!((d.density_sup().unwrap() - 2.0).abs() < 1e-12);
        let spec = DisorderSpec::new(d, 7);
        for j in 0..200 {
            let w = spec.coupling(0, &[j]);
            assert!((0.0..=0.5).contains(&w), "sample {w} escaped the density support");
        }
    }

    #[test]
    fn bounded_density_empirical_mean() {
        let d = Distribution::BoundedDensity { bins: vec![1.0, 3.0, 2.0, 2.0] };
        let spec = DisorderSpec::new(d.clone(), momentum_seed());
        let n = 200_000;
        let mean: f64 =
            (0..n).map(|j| spec.coupling(1, &[j])).sum::<f64>() / n as f64;
        assert!((mean - d.mean()).abs() < 5e-3, "{mean} vs {}", d.mean());
    }

    fn momentum_seed() -> u64 {
        0x5eed
    }
}
