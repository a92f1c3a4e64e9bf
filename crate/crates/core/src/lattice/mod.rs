//! Lattice model: discretized boxes, envelopes, single-site potentials,
//! disorder fields, and Hamiltonian assembly.

pub mod assemble;
pub mod disorder;
pub mod domain;
pub mod envelope;
pub mod single_site;

pub use assemble::{
    assemble_hamiltonian, HamiltonianMatrix, ModelParams, ModelSpec, OperatorDescriptor,
    SourceRegion, VolumeSpec,
};
pub use disorder::{sample_disorder, DisorderField, DisorderSpec, Distribution};
pub use domain::{BoundaryCondition, LatticeDomain};
pub use envelope::{bracket, EnvelopeSpec, GammaFn, Witness, WitnessFn};
pub use single_site::SingleSitePotential;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn chain_model(lambda: f64, alpha: f64, dist: Distribution, seed: u64) -> ModelSpec {
        ModelSpec {
            dim: 1,
            lambda,
            envelope: EnvelopeSpec::power_law(alpha),
            u: SingleSitePotential::cube(1.0, 1.0).unwrap(),
            disorder: DisorderSpec::new(dist, seed),
            spacing: 1.0,
        }
    }

    #[test]
    fn free_chain_has_dst_eigenvalues() {
        // omega = 0, d = 1, h = 1, L = 4, Dirichlet: eigenvalues
        // 2 - 2 cos(k pi / 5), k = 1..4.
        let m = chain_model(1.0, 0.0, Distribution::Bernoulli { p: 0.0 }, 0);
        let ham = m
            .restriction(&[0.0], 4.0, BoundaryCondition::Dirichlet, 0)
            .unwrap();
        let eig = ham.matrix.to_dense().symmetric_eigen();
        let mut got: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        got.sort_by(f64::total_cmp);
        for (k, &e) in got.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k as f64 + 1.0) * std::f64::consts::PI / 5.0).cos();
            assert_relative_eq!(e, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn full_coupling_diagonal() {
        // alpha = 0, lambda = 1, Bernoulli(1), u = chi cube: every diagonal
        // entry equals 2d/h^2 - 1.
        let m = chain_model(1.0, 0.0, Distribution::Bernoulli { p: 1.0 }, 0);
        let ham = m
            .restriction(&[0.0], 8.0, BoundaryCondition::Dirichlet, 0)
            .unwrap();
        for d in ham.matrix.diagonal() {
            assert_eq!(d, 2.0 - 1.0);
        }
        assert!(ham.potential.iter().all(|&v| v == -1.0));
    }

    #[test]
    fn assembly_is_bit_deterministic() {
        let m = chain_model(4.0, 0.7, Distribution::Uniform01, 42);
        let a = m.finite_volume(&[0.0], 16.0, 4.0, 3).unwrap();
        let b = m.finite_volume(&[0.0], 16.0, 4.0, 3).unwrap();
        assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn matrix_is_symmetric_and_stencil_exact() {
        let m = ModelSpec {
            dim: 2,
            lambda: 3.0,
            envelope: EnvelopeSpec::power_law(0.5),
            u: SingleSitePotential::cube(1.0, 1.0).unwrap(),
            disorder: DisorderSpec::new(Distribution::Uniform01, 5),
            spacing: 0.5,
        };
        let ham = m
            .restriction(&[0.0, 0.0], 6.0, BoundaryCondition::Dirichlet, 1)
            .unwrap();
        assert!(ham.matrix.is_symmetric());
        let inv_h2 = 1.0 / (0.5 * 0.5);
        for i in 0..ham.matrix.n {
            for (j, v) in ham.matrix.row(i) {
                if j != i {
                    assert_eq!(v, -inv_h2);
                }
            }
        }
        // Dirichlet diagonal bound: >= 2d/h^2 - lambda * U0.
        let floor = 2.0 * 2.0 * inv_h2 - 3.0 * ham.params.envelope.value(&[0.0, 0.0]);
        for d in ham.matrix.diagonal() {
            assert!(d >= floor - 1e-12);
        }
    }

    #[test]
    fn potential_bounded_by_lambda_u0() {
        let m = chain_model(4.0, 0.3, Distribution::Uniform01, 9);
        let ham = m.finite_volume(&[0.0], 24.0, 4.0, 7).unwrap();
        assert!(ham.min_potential() >= -4.0 - 1e-12);
        assert!(ham.potential.iter().all(|&v| v <= 0.0));
    }

    #[test]
    fn alpha_zero_reduces_to_unit_envelope_bitwise() {
        let m = chain_model(4.0, 0.0, Distribution::Uniform01, 21);
        let ham = m.finite_volume(&[0.0], 12.0, 2.0, 0).unwrap();
        // Reassemble the potential by hand without the envelope factor.
        for (flat, x) in ham.domain.nodes() {
            let site = LatticeDomain::owning_site(&x);
            let inside = site[0].unsigned_abs() as f64 <= 5.0 && site[0].abs() < 6;
            let expect = if inside {
                -4.0 * m.disorder.coupling(0, &site)
            } else {
                0.0
            };
            assert_eq!(ham.potential[flat].to_bits(), expect.to_bits());
        }
    }

    #[test]
    fn missing_disorder_site_rejected() {
        let m = chain_model(2.0, 0.0, Distribution::Uniform01, 1);
        let domain =
            LatticeDomain::build(1, &[0.0], 8.0, 1.0, BoundaryCondition::Dirichlet).unwrap();
        let sources = SourceRegion::TouchingBox {
            center: vec![0.0],
            side: 8.0,
        };
        // Sample a field on too few sites.
        let short_sites: Vec<Vec<i64>> = (-2..=2).map(|j| vec![j]).collect();
        let field = sample_disorder(&m.disorder, &short_sites, 0);
        let err = assemble_hamiltonian(&m.params(), &domain, &field, &m.u, &sources);
        assert!(matches!(
            err,
            Err(crate::error::EnvlocError::MissingDisorderSite { .. })
        ));
    }

    #[test]
    fn envelope_monotonicity_in_operator_order() {
        // For alpha' >= alpha the potential is shallower, so H_{alpha'} -
        // H_{alpha} is positive semidefinite; probe with random vectors.
        let base = chain_model(4.0, 0.2, Distribution::Uniform01, 12);
        let a = base.finite_volume(&[0.0], 16.0, 2.0, 4).unwrap();
        let b = base
            .with_alpha(0.9)
            .finite_volume(&[0.0], 16.0, 2.0, 4)
            .unwrap();
        let mut rng = crate::rng::SplitMix64::new(77);
        for _ in 0..20 {
            let x: Vec<f64> = (0..a.matrix.n).map(|_| rng.symmetric()).collect();
            let qa = a.matrix.quadratic_form(&x);
            let qb = b.matrix.quadratic_form(&x);
            assert!(qb >= qa - 1e-9 * qa.abs().max(1.0));
        }
    }

    #[test]
    fn descriptor_roundtrip_reconstructs() {
        let m = chain_model(4.0, 0.5, Distribution::Uniform01, 33);
        let desc = OperatorDescriptor {
            model: m,
            volume: VolumeSpec::FiniteVolume {
                center: vec![0.0],
                side: 12.0,
                buffer: 2.0,
            },
            realization: 6,
        };
        let json = serde_json::to_string(&desc).unwrap();
        let back: OperatorDescriptor = serde_json::from_str(&json).unwrap();
        let a = desc.assemble().unwrap();
        let b = back.assemble().unwrap();
        assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn ground_energy_stable_under_mesh_refinement() {
        // omega = 1, alpha = 0 constant-potential box: ground energy moves
        // by under 5% when h is halved.
        let coarse = ModelSpec {
            spacing: 0.5,
            ..chain_model(2.0, 0.0, Distribution::Bernoulli { p: 1.0 }, 0)
        };
        let fine = ModelSpec {
            spacing: 0.25,
            ..coarse.clone()
        };
        let ground = |m: &ModelSpec| {
            let ham = m
                .restriction(&[0.0], 8.0, BoundaryCondition::Dirichlet, 0)
                .unwrap();
            ham.matrix
                .to_dense()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min)
        };
        let g0 = ground(&coarse);
        let g1 = ground(&fine);
        assert!(
            (g0 - g1).abs() <= 0.05 * g0.abs(),
            "coarse {g0} vs fine {g1}"
        );
    }
}
