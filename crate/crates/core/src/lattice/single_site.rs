//! Single-site (impurity) potentials.
//!
//! The impurity bump `u` is supported inside the unit cube around the
//! origin, with the half-open convention `[-1/2, 1/2[` per axis so that the
//! integer translates of the unit cube tile space exactly. `U0` is the sup
//! of the periodized sum `sum_j u(x - j)`; for a full-cube indicator this
//! equals `u0` at every point.

use serde::{Deserialize, Serialize};

use crate::error::{EnvlocError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleSitePotential {
    /// `u = u0 * chi_{Lambda_delta}` with `delta` in `]0, 1]`.
    CubeIndicator { u0: f64, delta: f64 },
    /// Samples on a regular sub-grid of the unit cube (resolution
    /// `samples_per_axis`, cell-centered); nearest-sample lookup.
    Tabulated {
        dim: usize,
        samples_per_axis: usize,
        /// Row-major over the cell-centered sub-grid of `[-1/2, 1/2[^d`.
        values: Vec<f64>,
    },
}

impl SingleSitePotential {
    pub fn cube(u0: f64, delta: f64) -> Result<Self> {
        if !(u0 > 0.0) {
            return Err(EnvlocError::Model(format!(
                "single-site amplitude u0 must be positive, got {u0}"
            )));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(EnvlocError::Model(format!(
                "single-site support delta must lie in ]0, 1], got {delta}"
            )));
        }
        Ok(SingleSitePotential::CubeIndicator { u0, delta })
    }

    pub fn tabulated(dim: usize, samples_per_axis: usize, values: Vec<f64>) -> Result<Self> {
        let expect = samples_per_axis.pow(dim as u32);
        if values.len() != expect {
            return Err(EnvlocError::Model(format!(
                "tabulated potential needs {expect} samples, got {}",
                values.len()
            )));
        }
        if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(EnvlocError::Model(
                "tabulated potential must be non-negative and finite".into(),
            ));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(EnvlocError::Model("tabulated potential vanishes (v = 0)".into()));
        }
        Ok(SingleSitePotential::Tabulated {
            dim,
            samples_per_axis,
            values,
        })
    }

    /// Pointwise value `u(y)` for an offset `y` from the impurity site.
    /// Support lies inside `[-1/2, 1/2[^d`.
    pub fn value(&self, offset: &[f64]) -> f64 {
        if offset.iter().any(|&c| !(-0.5..0.5).contains(&c)) {
            return 0.0;
        }
        match self {
            SingleSitePotential::CubeIndicator { u0, delta } => {
                let half = delta / 2.0;
                if offset.iter().all(|&c| (-half..half).contains(&c)) {
                    *u0
                } else {
                    0.0
                }
            }
            SingleSitePotential::Tabulated {
                samples_per_axis,
                values,
                ..
            } => {
                let m = *samples_per_axis;
                let mut flat = 0usize;
                for &c in offset {
                    let i = (((c + 0.5) * m as f64).floor() as usize).min(m - 1);
                    flat = flat * m + i;
                }
                values[flat]
            }
        }
    }

    /// Sup bound `u0 = sup u`.
    pub fn sup(&self) -> f64 {
        match self {
            SingleSitePotential::CubeIndicator { u0, .. } => *u0,
            SingleSitePotential::Tabulated { values, .. } => {
                values.iter().cloned().fold(0.0, f64::max)
            }
        }
    }

    /// `v = integral of u` (exact for the cube, midpoint quadrature for
    /// tabulated samples).
    pub fn integral(&self, dim: usize) -> f64 {
        match self {
            SingleSitePotential::CubeIndicator { u0, delta } => u0 * delta.powi(dim as i32),
            SingleSitePotential::Tabulated {
                samples_per_axis,
                values,
                dim,
            } => {
                let cell = (1.0 / *samples_per_axis as f64).powi(*dim as i32);
                values.iter().sum::<f64>() * cell
            }
        }
    }

    /// `U0 = sup_x sum_j u(x - j)`. Since the support fits in one unit cube
    /// of the half-open tiling, the periodized sum at any point equals the
    /// value of the single bump covering it, so `U0 = sup u`.
    pub fn periodized_sup(&self) -> f64 {
        self.sup()
    }
}
