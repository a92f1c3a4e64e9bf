//! Envelope functions moderating the random potential at large distance.

use serde::{Deserialize, Serialize};

use crate::error::{EnvlocError, Result};

/// `<x> = sqrt(1 + |x|^2)`.
pub fn bracket(x: &[f64]) -> f64 {
    (1.0 + x.iter().map(|c| c * c).sum::<f64>()).sqrt()
}

/// A strictly increasing witness `F` certifying that an envelope decays
/// slowly enough to trap infinitely many bound states: the certificate
/// machinery requires `gamma(x) |x|^2 >= F(|x|)` beyond radius `r0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessFn {
    /// `F(r) = coeff * r^exponent`.
    Power { coeff: f64, exponent: f64 },
}

impl WitnessFn {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            WitnessFn::Power { coeff, exponent } => coeff * r.powf(exponent),
        }
    }

    /// Check that `F` is strictly increasing and unbounded with
    /// `F(r)/r^2 -> 0`. Exact for the power form.
    pub fn validate(&self) -> Result<()> {
        match *self {
            WitnessFn::Power { coeff, exponent } => {
                if !(coeff > 0.0) {
                    return Err(EnvlocError::Witness(format!(
                        "power witness needs a positive coefficient, got {coeff}"
                    )));
                }
                if !(exponent > 0.0 && exponent < 2.0) {
                    return Err(EnvlocError::Witness(format!(
                        "power witness exponent must lie in ]0, 2[ so that F is \
                         unbounded with F(r)/r^2 -> 0, got {exponent}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Witness data attached to a general envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub f: WitnessFn,
    pub r0: f64,
}

/// Deterministic decay profile multiplying the random potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeSpec {
    /// `gamma_alpha(x) = <x>^(-alpha)`.
    PowerLaw { alpha: f64 },
    /// A pointwise profile together with the witness `(F, R0)` it is
    /// claimed to satisfy. The claim is verified on the grid at assembly.
    General { gamma: GammaFn, witness: Witness },
}

/// Pointwise envelope profiles available to the `General` variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaFn {
    PowerLaw { alpha: f64 },
}

impl GammaFn {
    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            GammaFn::PowerLaw { alpha } => power_law(alpha, x),
        }
    }
}

impl EnvelopeSpec {
    pub fn power_law(alpha: f64) -> Self {
        EnvelopeSpec::PowerLaw { alpha }
    }

    /// Envelope value at `x`; always in `]0, 1]`, equal to 1 at the origin.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            EnvelopeSpec::PowerLaw { alpha } => power_law(*alpha, x),
            EnvelopeSpec::General { gamma, .. } => gamma.value(x),
        }
    }

    /// The witness attached to a general envelope, if any.
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            EnvelopeSpec::PowerLaw { .. } => None,
            EnvelopeSpec::General { witness, .. } => Some(witness),
        }
    }

    /// Verify `gamma(x)|x|^2 >= F(|x|)` at one point (used on every grid
    /// node beyond `r0` during assembly).
    pub fn check_witness_at(&self, x: &[f64]) -> Result<()> {
        let Some(w) = self.witness() else {
            return Ok(());
        };
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r <= w.r0 {
            return Ok(());
        }
        let lhs = self.value(x) * r * r;
        let rhs = w.f.value(r);
        if lhs < rhs {
            return Err(EnvlocError::WitnessViolated {
                point: x.to_vec(),
                lhs,
                rhs,
            });
        }
        Ok(())
    }
}

fn power_law(alpha: f64, x: &[f64]) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    let sq = 1.0 + x.iter().map(|c| c * c).sum::<f64>();
    sq.powf(-alpha / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn envelope_is_one_at_origin() {
        for &alpha in &[0.0, 0.3, 1.0, 7.5] {
            let e = EnvelopeSpec::power_law(alpha);
            assert_eq!(e.value(&[0.0, 0.0]), 1.0);
        }
    }

    #[test]
    fn envelope_half_at_bracket_two() {
        // alpha = 1, |x|^2 = 3 => <x> = 2 => gamma = 1/2.
        let e = EnvelopeSpec::power_law(1.0);
        assert_relative_eq!(e.value(&[3f64.sqrt()]), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn zero_exponent_is_identically_one_bitwise() {
        let e = EnvelopeSpec::power_law(0.0);
        for x in [-25.0, -0.125, 0.375, 1e6] {
            assert_eq!(e.value(&[x]).to_bits(), 1f64.to_bits());
        }
    }

    #[test]
    fn monotone_in_alpha_and_radius() {
        let x = [2.0, 1.0];
        let mut prev = f64::INFINITY;
        for &alpha in &[0.1, 0.5, 1.0, 2.0] {
            let v = EnvelopeSpec::power_law(alpha).value(&x);
            assert!(v < prev);
            prev = v;
        }
        let e = EnvelopeSpec::power_law(0.7);
        assert!(e.value(&[1.0]) > e.value(&[2.0]));
    }

    #[test]
    fn witness_validation() {
        assert!(WitnessFn::Power { coeff: 1.0, exponent: 0.5 }.validate().is_ok());
        assert!(WitnessFn::Power { coeff: 1.0, exponent: 2.0 }.validate().is_err());
        assert!(WitnessFn::Power { coeff: -1.0, exponent: 0.5 }.validate().is_err());
    }

    #[test]
    fn witness_check_flags_fast_decay() {
        // gamma = <x>^{-2.5} decays faster than |x|^{-2}; sqrt witness fails.
        let env = EnvelopeSpec::General {
            gamma: GammaFn::PowerLaw { alpha: 2.5 },
            witness: Witness {
                f: WitnessFn::Power { coeff: 1.0, exponent: 0.5 },
                r0: 2.0,
            },
        };
        assert!(env.check_witness_at(&[50.0]).is_err());
        assert!(env.check_witness_at(&[1.0]).is_ok()); // inside r0: not checked
    }
}
