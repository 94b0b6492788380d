//! Property tests for the algebraic identities and monotonicities that
//! hold over the whole input domain.

use donorspin::compare;
use donorspin::kondo;
use donorspin::lindblad;
use donorspin::params::SystemParams;
use donorspin::rates;
use donorspin::units;
use donorspin::edmr;

use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;

proptest! {
    /// The sensitivity threshold is exactly the shot-noise floor evaluated
    /// at the driven spin-flip time.
    #[test]
    fn threshold_is_shot_noise_identity(
        log_i in -9.0..-3.0f64,
        log_wp in 3.0..8.0f64,
        log_a in 7.0..10.0f64,
        ratio in 10.0..1.0e4f64,
    ) {
        let current = 10f64.powf(log_i);
        let omega_perp = 10f64.powf(log_wp);
        let a = 10f64.powf(log_a);
        let omega_e = a * ratio;
        let threshold = edmr::sensitivity_threshold(current, omega_perp, a, omega_e);
        let t1n = 2.0 * (omega_e / a).powi(2) / omega_perp;
        let shot = edmr::shot_noise_relative(current, t1n);
        prop_assert!((threshold - shot).abs() / shot < 1e-12);
    }

    /// Threshold monotonicity: down in current and Zeeman frequency, up in
    /// drive and coupling.
    #[test]
    fn threshold_monotonicities(
        current in 1.0e-9..1.0e-3f64,
        omega_perp in 1.0e3..1.0e8f64,
        a in 1.0e7..1.0e10f64,
        scale in 1.01..10.0f64,
    ) {
        let omega_e = a * 100.0;
        let base = edmr::sensitivity_threshold(current, omega_perp, a, omega_e);
        prop_assert!(edmr::sensitivity_threshold(current * scale, omega_perp, a, omega_e) < base);
        prop_assert!(edmr::sensitivity_threshold(current, omega_perp, a, omega_e * scale) < base);
        prop_assert!(edmr::sensitivity_threshold(current, omega_perp * scale, a, omega_e) > base);
        prop_assert!(edmr::sensitivity_threshold(current, omega_perp, a * scale, omega_e) > base);
    }

    /// The renormalized coupling shrinks strictly with the temperature
    /// ratio.
    #[test]
    fn coupling_strictly_decreasing(
        ratio1 in 1.0001..1.0e6f64,
        factor in 1.001..100.0f64,
    ) {
        let j1 = kondo::jeff_nu_squared(ratio1, 1.0).unwrap();
        let j2 = kondo::jeff_nu_squared(ratio1 * factor, 1.0).unwrap();
        prop_assert!(j2 < j1);
    }

    /// Adding flip-flop frequency mismatch only suppresses the spin-flip
    /// rate.
    #[test]
    fn mismatch_suppresses_flips(
        gamma in 1.0e-3..1.0e4f64,
        a in 0.1..10.0f64,
        b_tilde in 0.0..1.0e4f64,
    ) {
        prop_assert!(
            rates::inv_t1n_analytic(gamma, a, b_tilde)
                <= rates::inv_t1n_analytic(gamma, a, 0.0)
        );
    }

    /// Equilibrium electron polarization is strictly monotone in
    /// temperature and confined to (-1, 0).
    #[test]
    fn polarization_monotone(
        t1 in 1.0e-3..1.0e3f64,
        factor in 1.001..100.0f64,
        b in 0.01..10.0f64,
    ) {
        let a = units::to_angular(120.0e6);
        let p1 = SystemParams::physical(a, b, t1).build().unwrap().p_e();
        let p2 = SystemParams::physical(a, b, t1 * factor).build().unwrap().p_e();
        prop_assert!((-1.0..=0.0).contains(&p1));
        prop_assert!(p2 > p1);
    }

    /// Unit conversions round-trip to machine precision (the conversion
    /// factors are not powers of two, so bit-exactness is one ulp away).
    #[test]
    fn unit_roundtrips(x in -1.0e12..1.0e12f64) {
        let angular = units::to_angular(x) / std::f64::consts::TAU;
        prop_assert!((angular - x).abs() <= 2.0 * f64::EPSILON * x.abs());
        let gauss = units::gauss_to_tesla(x) * 1.0e4;
        prop_assert!((gauss - x).abs() <= 2.0 * f64::EPSILON * x.abs());
    }

    /// Contrast is a probability (it may underflow to exactly zero for
    /// extreme rate ratios).
    #[test]
    fn contrast_is_a_probability(
        inv_t2n in 1.0e-6..1.0e6f64,
        inv_t1n in 1.0e-6..1.0e6f64,
        t_edmr in 0.0..1.0e3f64,
    ) {
        let c = rates::readout_contrast(inv_t2n, inv_t1n, t_edmr);
        prop_assert!(c.is_finite() && (0.0..=1.0).contains(&c));
    }

    /// Random sampled states are realizable and the expectation map
    /// round-trips through the density matrix.
    #[test]
    fn expectation_roundtrip(seed in 0u64..1u64 << 48) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rho = compare::random_density_matrix(&mut rng);
        let state = lindblad::expectations(&rho);
        prop_assert!(state.within_bounds(1e-12));
        let back = lindblad::density_from_expectations(&state).unwrap();
        let dev = (rho.matrix() - back.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        prop_assert!(dev < 1e-12);
    }
}
