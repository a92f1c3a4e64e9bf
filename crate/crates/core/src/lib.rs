//! A numerical laboratory for lattice Schrödinger operators with
//! envelope-decaying random potentials.
//!
//! The library assembles finite-difference operators `-Δ + V` whose random
//! potential `V(x) = -λ γ(x) Σ_i ω_i u(x - i)` is moderated by a decaying
//! envelope `γ`, and provides exact eigenvalue counting below a threshold
//! (matrix inertia), integrated-density-of-states estimation, eigenfunction
//! localization analysis, and reproducible Monte Carlo campaigns over the
//! disorder.

pub mod error;
pub mod experiments;
pub mod harness;
pub mod ids;
pub mod lattice;
pub mod localization;
pub mod rng;
pub mod sparse;
pub mod spectral;

pub use error::{EnvlocError, Result};
pub use lattice::{
    BoundaryCondition, DisorderSpec, Distribution, EnvelopeSpec, HamiltonianMatrix, LatticeDomain,
    ModelSpec, SingleSitePotential,
};
pub use spectral::{count_below, lowest_eigenpairs, spectrum_distance, SpectralSummary};

/// Version string recorded in run manifests.
pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}
