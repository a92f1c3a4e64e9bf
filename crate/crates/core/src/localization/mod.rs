//! Eigenfunction localization: centers, exponential decay masses,
//! SULE-form checks, and dynamical-localization surrogates.

pub mod dynamics;
pub mod predict;
pub mod profile;

pub use dynamics::{dynamics_moment, eigenfunction_correlator, origin_packet, DynamicsReport};
pub use predict::{center_radius_prediction, center_radius_prediction_with, RadiusConstants};
pub use profile::{
    analyze_eigenfunction, cube_masses, decay_mass_fit, default_fit_window, localization_center,
    sule_violations, CubeProfile, DecayFit, FitWindow, LocalizationProfile, SULE_MASS_SLACK,
};
