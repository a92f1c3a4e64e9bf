//! Predicted scale of localization-center distances from the origin.

use serde::{Deserialize, Serialize};

/// Exposed proportionality constants of the two branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusConstants {
    /// Multiplies the envelope branch `(2 lambda u0 / |E|)^(1/alpha)`.
    pub envelope_branch: f64,
    /// Multiplies the kinetic branch `|E|^(-1)`.
    pub kinetic_branch: f64,
}

impl Default for RadiusConstants {
    fn default() -> Self {
        Self {
            envelope_branch: 1.0,
            kinetic_branch: 1.0,
        }
    }
}

/// Predicted center radius `L_E = max(1, (2 lambda u0 / |E|)^(1/alpha))`.
///
/// For `|E| < 2 lambda u0` and `0 < alpha <= 1` the envelope sets the
/// scale. For `|E| >= 2 lambda u0` (or `alpha > 1`) the kinetic scale
/// `max(1, |E|^(-1))` applies. At `alpha = 0` with `|E| < 2 lambda u0` the
/// envelope never suppresses the potential below `|E|/2`, the limit of
/// `(2 lambda u0/|E|)^(1/alpha)` diverges, and no radius bound exists:
/// the prediction is infinite (the ergodic model localizes anywhere).
pub fn center_radius_prediction(alpha: f64, lambda: f64, u0: f64, e: f64) -> f64 {
    center_radius_prediction_with(alpha, lambda, u0, e, RadiusConstants::default())
}

pub fn center_radius_prediction_with(
    alpha: f64,
    lambda: f64,
    u0: f64,
    e: f64,
    consts: RadiusConstants,
) -> f64 {
    assert!(e < 0.0, "prediction defined for E < 0");
    assert!(alpha >= 0.0);
    let depth = 2.0 * lambda * u0;
    if e.abs() >= depth || alpha > 1.0 {
        (consts.kinetic_branch / e.abs()).max(1.0)
    } else if alpha > 0.0 {
        (consts.envelope_branch * (depth / e.abs()).powf(1.0 / alpha)).max(1.0)
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_case_uses_kinetic_branch() {
        // |E| = 2 lambda u0 exactly: max(1, 1) = 1 on the kinetic branch.
        assert_eq!(center_radius_prediction(1.0, 1.0, 1.0, -2.0), 1.0);
    }

    #[test]
    fn envelope_branch_values() {
        assert_eq!(center_radius_prediction(1.0, 1.0, 1.0, -0.5), 4.0);
        assert_eq!(center_radius_prediction(0.5, 1.0, 1.0, -0.5), 16.0);
    }

    #[test]
    fn alpha_zero_below_depth_is_unbounded() {
        assert_eq!(center_radius_prediction(0.0, 4.0, 1.0, -0.25), f64::INFINITY);
    }

    #[test]
    fn deep_energy_uses_kinetic_branch_for_any_alpha() {
        assert_eq!(center_radius_prediction(0.0, 0.1, 1.0, -2.0), 1.0);
        assert_eq!(center_radius_prediction(0.5, 0.1, 1.0, -0.4), (1.0f64 / 0.4).max(1.0));
    }
}
