//! Discretized boxes and their site/node bookkeeping.
//!
//! A domain is a cube of side `L` centered at `x`, discretized with a
//! cell-centered grid of spacing `h`: along each axis the nodes sit at
//! `x_k - L/2 + (i + 1/2) h` for `i = 0 .. L/h - 1`. Cell-centering keeps
//! nodes off the unit-cube boundaries of the impurity lattice, so the
//! half-open tiling of space by unit cubes assigns every node to exactly
//! one impurity cell.

use serde::{Deserialize, Serialize};

use crate::error::{EnvlocError, Result};

/// Boundary condition of the restricted operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// Wavefunction pinned to zero outside the box (diagonal keeps the full
    /// `2d/h^2` stencil weight).
    Dirichlet,
    /// Graph-Laplacian stencil: the diagonal counts only existing neighbors.
    Neumann,
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryCondition::Dirichlet => write!(f, "dirichlet"),
            BoundaryCondition::Neumann => write!(f, "neumann"),
        }
    }
}

/// A discretized box `Λ_L(x)` with its grid layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeDomain {
    pub dim: usize,
    pub center: Vec<f64>,
    pub side: f64,
    pub spacing: f64,
    pub bc: BoundaryCondition,
    /// Per-axis node counts (`L/h` each).
    pub shape: Vec<usize>,
}

impl LatticeDomain {
    /// Build a domain, validating the discretization.
    ///
    /// `L/h` must be integral (within 1e-9 relative) and `d` in 1..=3.
    pub fn build(
        dim: usize,
        center: &[f64],
        side: f64,
        spacing: f64,
        bc: BoundaryCondition,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(EnvlocError::Domain(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if center.len() != dim {
            return Err(EnvlocError::Domain(format!(
                "center has {} components, expected {dim}",
                center.len()
            )));
        }
        if !(side > 0.0) || !(spacing > 0.0) {
            return Err(EnvlocError::Domain(format!(
                "side and spacing must be positive, got L = {side}, h = {spacing}"
            )));
        }
        let ratio = side / spacing;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(EnvlocError::Domain(format!(
                "L/h must be a positive integer per axis, got L = {side}, h = {spacing} (L/h = {ratio})"
            )));
        }
        let per_axis = n as usize;
        Ok(Self {
            dim,
            center: center.to_vec(),
            side,
            spacing,
            bc,
            shape: vec![per_axis; dim],
        })
    }

    /// Total number of grid nodes.
    pub fn node_count(&self) -> usize {
        self.shape.iter().product()
    }

    /// Physical coordinate of the node with multi-index `idx`.
    pub fn coordinate(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.center)
            .map(|(&i, &c)| c - self.side / 2.0 + (i as f64 + 0.5) * self.spacing)
            .collect()
    }

    /// Flat row-major index of a multi-index.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (k, &i) in idx.iter().enumerate() {
            flat = flat * self.shape[k] + i;
        }
        flat
    }

    /// Multi-index of a flat index.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.dim];
        for k in (0..self.dim).rev() {
            idx[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        idx
    }

    /// Physical coordinate of a flat node index.
    pub fn node_coordinate(&self, flat: usize) -> Vec<f64> {
        self.coordinate(&self.multi_index(flat))
    }

    /// Iterate all node coordinates in flat-index order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, Vec<f64>)> + '_ {
        (0..self.node_count()).map(move |f| (f, self.node_coordinate(f)))
    }

    /// Integer lattice sites strictly inside the open box `Λ_L(x)`.
    pub fn sites_inside(center: &[f64], side: f64) -> Vec<Vec<i64>> {
        site_product(center, side, |c, s| {
            let lo = (c - s / 2.0 + 1e-12).ceil() as i64;
            let hi = (c + s / 2.0 - 1e-12).floor() as i64;
            (lo, hi)
        })
    }

    /// Integer lattice sites whose unit cube `Λ_1(i)` meets the box.
    pub fn sites_touching(center: &[f64], side: f64) -> Vec<Vec<i64>> {
        site_product(center, side, |c, s| {
            let lo = (c - s / 2.0 - 0.5 + 1e-12).ceil() as i64;
            let hi = (c + s / 2.0 + 0.5 - 1e-12).floor() as i64;
            (lo, hi)
        })
    }

    /// The impurity site owning a node: unit cubes tile space half-open,
    /// `x` belongs to the cube of site `round_half_down(x)` per axis.
    pub fn owning_site(x: &[f64]) -> Vec<i64> {
        x.iter().map(|&c| (c + 0.5).floor() as i64).collect()
    }
}

fn site_product(
    center: &[f64],
    side: f64,
    range: impl Fn(f64, f64) -> (i64, i64),
) -> Vec<Vec<i64>> {
    let ranges: Vec<(i64, i64)> = center.iter().map(|&c| range(c, side)).collect();
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
