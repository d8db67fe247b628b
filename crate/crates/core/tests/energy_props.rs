use hencky_core::convexity::{line_second_difference, scalar_r, scalar_rhat, volumetric_threshold};
use hencky_core::energy::{energy_eh, energy_from_stretches, piola_stress, psi, psi_hat};
use hencky_core::tensor::{principal_stretches, right_stretch, spd_log, sym_exp};
use hencky_core::{rng, Mat, MaterialParams};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = MaterialParams> {
    (0.1f64..5.0, 0.1f64..5.0, 0.05f64..2.0, 0.125f64..1.0, 2u32..=3)
        .prop_map(|(mu, kappa, k, khat, m)| MaterialParams::new(mu, kappa, k, khat, m).unwrap())
}

fn deformation(dim: usize) -> impl Strategy<Value = Mat> {
    (any::<u64>(), prop::collection::vec(-1.2f64..1.2, dim)).prop_map(|(seed, logs)| {
        let s: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
        rng::deformation_with_stretches(&mut rng::stream(seed, 0), &s)
    })
}

const RANK_ONE_TOL: f64 = 1e-10;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn frame_indifferent_and_isotropic(p in params(), f in deformation(3), seed in any::<u64>()) {
        let mut r = rng::stream(seed, 1);
        let q = rng::rotation(&mut r, 3);
        let q2 = rng::rotation(&mut r, 3);
        let w = energy_eh(&f, &p).value;
        prop_assert!(rel(energy_eh(&(q * f), &p).value, w) < 1e-10);
        prop_assert!(rel(energy_eh(&(f * q2), &p).value, w) < 1e-10);
    }

    #[test]
    fn minimal_at_rotations(p in params(), f in deformation(2)) {
        // with odd m the volumetric term dips below its reference value for det F < 1
        let p = MaterialParams { m: 2, ..p };
        prop_assert!(energy_eh(&f, &p).value >= p.reference_energy() * (1.0 - 1e-14));
    }

    #[test]
    fn matches_stretch_formula(p in params(), f in deformation(3)) {
        let s = principal_stretches(&f).unwrap();
        prop_assert!(rel(energy_eh(&f, &p).value, energy_from_stretches(&s, &p)) < 1e-10);
    }

    #[test]
    fn kirchhoff_stress_symmetric(p in params(), f in deformation(2)) {
        let m = MaterialParams { m: 2, ..p };
        let s = piola_stress(&f, &m).unwrap();
        let tau = s * f.transpose();
        let scale = 1.0 + tau.norm();
        prop_assert!((tau.get(0, 1) - tau.get(1, 0)).abs() / scale < 1e-10);
    }

    #[test]
    fn log_exp_round_trip(f in deformation(3)) {
        let u = right_stretch(&f).unwrap();
        let back = sym_exp(&spd_log(&u).unwrap());
        prop_assert!((*back.as_mat() - *u.as_mat()).norm() < 1e-10 * (1.0 + u.norm()));
    }

    #[test]
    fn psi_agrees_with_psi_hat(i1 in 0.1f64..10.0, z in 0.05f64..0.99, k in 0.05f64..3.0) {
        let i2 = i1 * i1 * (1.0 - z * z) / 4.0;
        let a = psi(i1, i2, k).unwrap();
        prop_assert!(rel(a, psi_hat(i1, i2, k)) < 1e-9);
    }

    #[test]
    fn scalar_r_nonnegative_above_threshold(t in 1e-3f64..1e3, k in 0.25f64..4.0) {
        // k t² − t + 1 has no real roots once 1 − 4k ≤ 0
        prop_assert!(scalar_r(t, k).unwrap() >= -1e-12);
    }

    #[test]
    fn scalar_rhat_nonnegative_above_threshold(t in 1e-3f64..1e3, k in 1.0f64 / 3.0..4.0) {
        prop_assert!(scalar_rhat(t, k).unwrap() >= -1e-12);
    }

    #[test]
    fn planar_rank_one_convex(f in deformation(2), seed in any::<u64>()) {
        let p = MaterialParams::default();
        let mut r = rng::stream(seed, 2);
        let xi = rng::unit_vector(&mut r, 2);
        let eta = rng::unit_vector(&mut r, 2);
        let e = |g: &Mat| energy_eh(g, &p).value;
        if let Some((d2, margin)) = line_second_difference(&e, &f, &xi, &eta) {
            prop_assert!(margin >= -RANK_ONE_TOL, "d2 = {d2}, margin = {margin}");
        }
    }
}

#[test]
fn volumetric_threshold_for_square() {
    assert_eq!(volumetric_threshold(2), 0.125);
}
