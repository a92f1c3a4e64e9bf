//! Spectral core: inertia-based eigenvalue counting, low-lying eigenpairs,
//! and spectrum-distance queries.

pub mod count;
pub mod eigen;
pub mod sturm;

pub use count::{count_below, count_below_with, CountMethod, CountOptions, CountResult, Slicer};
pub use eigen::{
    lowest_eigenpairs, lowest_eigenpairs_of, read_vectors_sidecar, spectrum_distance,
    spectrum_distance_of, spectrum_distance_sliced, write_vectors_sidecar, EigenRequest,
    SpectralSummary,
};
