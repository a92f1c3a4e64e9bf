//! Theorem-level studies over the disorder: counting asymptotics in the
//! envelope exponent, trial-function certificates, and the Wegner scan.

pub mod count_alpha;
pub mod localize;
pub mod trial;
pub mod wegner;

pub use count_alpha::{align_side, count_vs_alpha, CountVsAlphaConfig, CountVsAlphaRecord};
pub use localize::{
    dynamics_cell, localize_cell, negative_window, DynamicsCellResult, EigenfunctionReport,
    LocalizeCellResult, LocalizeConfig,
};
pub use trial::{
    build_trial_set, infinitude_growth, interior_sites, negative_threshold, shell_cubes,
    trial_certificate, GrowthRow, PlateauCube, TrialCertificateRecord, TrialConfig,
    TrialFunctionSet, TrialRealization,
};
pub use wegner::{
    far_center_distance, wegner_aggregate, wegner_cell, wegner_centers, wegner_scan, CenterClass,
    WegnerCell, WegnerCellData, WegnerConfig, WegnerScanRecord,
};
