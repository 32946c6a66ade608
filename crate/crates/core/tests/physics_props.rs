//! Property tests over the physics operations.

use causalman::physics::*;
use proptest::prelude::*;

fn small_real() -> impl Strategy<Value = f64> {
    -1.0..1.0f64
}

fn positive() -> impl Strategy<Value = f64> {
    1e-3..1e6f64
}

proptest! {
    #[test]
    fn leak_area_monotone_in_diameter_gaps(
        dd_max in small_real(),
        dd_min in small_real(),
        bump in 0.0..0.5f64,
        tol in 0.0..0.5f64,
        beta in 0.0..=1.0f64,
    ) {
        let base = leak_area_pf(dd_max, dd_min, tol, beta).unwrap();
        let more_max = leak_area_pf(dd_max + bump, dd_min, tol, beta).unwrap();
        let more_min = leak_area_pf(dd_max, dd_min + bump, tol, beta).unwrap();
        prop_assert!(more_max >= base);
        prop_assert!(more_min >= base);
        let tighter = leak_area_pf(dd_max, dd_min, tol + bump, beta).unwrap();
        prop_assert!(tighter <= base);
        prop_assert!(base >= 0.0);
    }

    #[test]
    fn harmonic_combinations_are_symmetric_and_dominated(a in positive(), b in positive()) {
        let e1 = effective_elasticity(a, b).unwrap();
        let e2 = effective_elasticity(b, a).unwrap();
        prop_assert!((e1 - e2).abs() <= 1e-12 * e1.abs().max(1.0));
        prop_assert!(e1 < a && e1 < b);

        let k1 = total_stiffness(a, b).unwrap();
        let k2 = total_stiffness(b, a).unwrap();
        prop_assert!((k1 - k2).abs() <= 1e-12 * k1.abs().max(1.0));
        prop_assert!(k1 < a && k1 < b);
    }

    #[test]
    fn relu_outputs_are_non_negative(x in -1e9..1e9f64) {
        prop_assert!(a_leak_mv(x).unwrap() >= 0.0);
        prop_assert!(delta_force_relu(x, 0.0).unwrap() >= 0.0);
    }

    #[test]
    fn overshoot_is_zero_iff_under_limit(f in -1e6..1e6f64, lim in -1e6..1e6f64) {
        let relu = delta_force_relu(f, lim).unwrap();
        prop_assert_eq!(relu == 0.0, f <= lim);
    }

    #[test]
    fn delta_d_mean_is_a_convex_combination(
        dd_max in small_real(),
        delta in 0.0..1.0f64,
        beta in 0.0..=1.0f64,
    ) {
        let dd_min = dd_max - delta;
        let mean = delta_d_mean(dd_max, dd_min, beta).unwrap();
        prop_assert!(mean >= dd_min - 1e-12 && mean <= dd_max + 1e-12);
    }

    #[test]
    fn leak_sums_dominate_summands(a in 0.0..10.0f64, b in 0.0..10.0f64, c in 0.0..10.0f64) {
        let total = a_leak_total(&[a, b, c]).unwrap();
        prop_assert!(total >= a && total >= b && total >= c);
        prop_assert!((total - (a + b + c)).abs() < 1e-12);
    }
}
