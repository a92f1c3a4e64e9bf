//! Assembly of the finite-difference Hamiltonian `-Δ + V` on a lattice box.
//!
//! The kinetic part is the standard second-order stencil: `2d/h^2` on the
//! diagonal and `-1/h^2` on nearest-neighbor pairs. Dirichlet boxes keep the
//! full diagonal weight at the boundary; Neumann boxes use the
//! graph-Laplacian convention (diagonal counts existing neighbors only).
//! The potential at a node `g` is `-lambda * gamma(g) * w_i * u(g - i)`
//! where `i` is the impurity site owning `g`; since the single-site bump
//! lives inside one unit cube of the half-open tiling, no other site can
//! contribute.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{EnvlocError, Result};
use crate::lattice::disorder::{sample_disorder, DisorderField, DisorderSpec};
use crate::lattice::domain::{BoundaryCondition, LatticeDomain};
use crate::lattice::envelope::EnvelopeSpec;
use crate::lattice::single_site::SingleSitePotential;
use crate::sparse::SymCsr;

/// Coupling strength and envelope of the random potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub envelope: EnvelopeSpec,
}

/// Which impurity sites source the potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceRegion {
    /// Finite-volume restriction of the potential: sites strictly inside
    /// the open box (the operator itself may live on a larger buffered box).
    InsideBox { center: Vec<f64>, side: f64 },
    /// Restriction of the full operator to a box: every site whose unit
    /// cube meets the box contributes.
    TouchingBox { center: Vec<f64>, side: f64 },
}

impl SourceRegion {
    pub fn sites(&self) -> Vec<Vec<i64>> {
        match self {
            SourceRegion::InsideBox { center, side } => {
                LatticeDomain::sites_inside(center, *side)
            }
            SourceRegion::TouchingBox { center, side } => {
                LatticeDomain::sites_touching(center, *side)
            }
        }
    }
}

/// Assembled sparse operator with its provenance.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub matrix: SymCsr,
    pub domain: LatticeDomain,
    pub params: ModelParams,
    pub sources: SourceRegion,
    pub master_seed: u64,
    pub realization: u64,
    /// Potential values at the grid nodes, in flat-index order.
    pub potential: Vec<f64>,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.n
    }

    pub fn spatial_dim(&self) -> usize {
        self.domain.dim
    }

    pub fn min_potential(&self) -> f64 {
        self.potential.iter().cloned().fold(0.0, f64::min)
    }
}

/// Assemble `-Δ + V` for one disorder realization.
///
/// The field must cover every site of `sources`; a site missing from the
/// field is rejected rather than silently treated as empty.
pub fn assemble_hamiltonian(
    params: &ModelParams,
    domain: &LatticeDomain,
    field: &DisorderField,
    u: &SingleSitePotential,
    sources: &SourceRegion,
) -> Result<HamiltonianMatrix> {
    let dim = domain.dim;
    let h = domain.spacing;
    let inv_h2 = 1.0 / (h * h);

    let mut coupling: HashMap<&[i64], f64> = HashMap::with_capacity(field.len());
    for (site, w) in field.iter() {
        coupling.insert(site.as_slice(), w);
    }
    let source_sites = sources.sites();
    for site in &source_sites {
        if !coupling.contains_key(site.as_slice()) {
            return Err(EnvlocError::MissingDisorderSite { site: site.clone() });
        }
    }
    let active: std::collections::HashSet<&[i64]> =
        source_sites.iter().map(|s| s.as_slice()).collect();

    let n = domain.node_count();
    let mut strides = vec![1usize; dim];
    for k in (0..dim.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * domain.shape[k + 1];
    }

    let mut potential = vec![0.0f64; n];
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut idx = vec![0usize; dim];
    for flat in 0..n {
        let x = domain.coordinate(&idx);
        params.envelope.check_witness_at(&x)?;

        let site = LatticeDomain::owning_site(&x);
        let mut v = 0.0;
        if active.contains(site.as_slice()) {
            let offset: Vec<f64> = x.iter().zip(&site).map(|(&c, &s)| c - s as f64).collect();
            let bump = u.value(&offset);
            if bump != 0.0 {
                let w = coupling[site.as_slice()];
                v = -params.lambda * params.envelope.value(&x) * w * bump;
            }
        }
        potential[flat] = v;

        let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * dim + 1);
        let mut neighbor_count = 0usize;
        // lower neighbors, descending stride keeps columns sorted
        for k in 0..dim {
            if idx[k] > 0 {
                row.push((flat - strides[k], -inv_h2));
                neighbor_count += 1;
            }
        }
        let diag_kinetic = match domain.bc {
            BoundaryCondition::Dirichlet => 2.0 * dim as f64 * inv_h2,
            BoundaryCondition::Neumann => {
                let upper = (0..dim).filter(|&k| idx[k] + 1 < domain.shape[k]).count();
                (neighbor_count + upper) as f64 * inv_h2
            }
        };
        row.push((flat, diag_kinetic + v));
        for k in (0..dim).rev() {
            if idx[k] + 1 < domain.shape[k] {
                row.push((flat + strides[k], -inv_h2));
            }
        }
        rows.push(row);

        // advance multi-index, row-major
        for k in (0..dim).rev() {
            idx[k] += 1;
            if idx[k] < domain.shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }

    Ok(HamiltonianMatrix {
        matrix: SymCsr::from_rows(rows),
        domain: domain.clone(),
        params: params.clone(),
        sources: sources.clone(),
        master_seed: field.master_seed,
        realization: field.realization,
        potential,
    })
}

/// Full model description: everything needed to rebuild any realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub dim: usize,
    pub lambda: f64,
    pub envelope: EnvelopeSpec,
    pub u: SingleSitePotential,
    pub disorder: DisorderSpec,
    pub spacing: f64,
}

impl ModelSpec {
    /// Same model with a rescaled coupling constant.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        let mut m = self.clone();
        m.lambda = lambda;
        m
    }

    /// Same model with a different envelope exponent.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        let mut m = self.clone();
        m.envelope = EnvelopeSpec::power_law(alpha);
        m
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            lambda: self.lambda,
            envelope: self.envelope.clone(),
        }
    }

    pub fn origin(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }

    /// Finite-volume operator: potential from sites inside `Λ_side(center)`,
    /// assembled on the buffered Dirichlet box `Λ_{side+2 buffer}(center)`.
    pub fn finite_volume(
        &self,
        center: &[f64],
        side: f64,
        buffer: f64,
        realization: u64,
    ) -> Result<HamiltonianMatrix> {
        let domain = LatticeDomain::build(
            self.dim,
            center,
            side + 2.0 * buffer,
            self.spacing,
            BoundaryCondition::Dirichlet,
        )?;
        let sources = SourceRegion::InsideBox {
            center: center.to_vec(),
            side,
        };
        let field = sample_disorder(&self.disorder, &sources.sites(), realization);
        assemble_hamiltonian(&self.params(), &domain, &field, &self.u, &sources)
    }

    /// Box restriction of the operator with the given boundary condition
    /// (the construction behind density-of-states estimates).
    pub fn restriction(
        &self,
        center: &[f64],
        side: f64,
        bc: BoundaryCondition,
        realization: u64,
    ) -> Result<HamiltonianMatrix> {
        let domain = LatticeDomain::build(self.dim, center, side, self.spacing, bc)?;
        let sources = SourceRegion::TouchingBox {
            center: center.to_vec(),
            side,
        };
        let field = sample_disorder(&self.disorder, &sources.sites(), realization);
        assemble_hamiltonian(&self.params(), &domain, &field, &self.u, &sources)
    }
}

/// Serializable handle from which any realization of any assembled operator
/// can be reconstructed bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorDescriptor {
    pub model: ModelSpec,
    pub volume: VolumeSpec,
    pub realization: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeSpec {
    FiniteVolume {
        center: Vec<f64>,
        side: f64,
        buffer: f64,
    },
    Restriction {
        center: Vec<f64>,
        side: f64,
        bc: BoundaryCondition,
    },
}

impl OperatorDescriptor {
    pub fn assemble(&self) -> Result<HamiltonianMatrix> {
        match &self.volume {
            VolumeSpec::FiniteVolume {
                center,
                side,
                buffer,
            } => self
                .model
                .finite_volume(center, *side, *buffer, self.realization),
            VolumeSpec::Restriction { center, side, bc } => {
                self.model.restriction(center, *side, *bc, self.realization)
            }
        }
    }
}
