use proptest::prelude::*;

use bbm_core::analytic::{gauss_tail_bounds, gauss_tail_exact};
use bbm_core::estimators::{exponent_fit, pair_sum};
use bbm_core::observables::cohort_count;
use bbm_core::{Population, SimConfig};

fn design() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.0..5.0f64, -10.0..10.0f64, 0.1..3.0f64), 3..12).prop_filter("two distinct x", |pts| {
        pts.iter().any(|p| (p.0 - pts[0].0).abs() > 1e-3)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fit_is_affine_equivariant(pts in design(), c in 0.1..5.0f64, d in -3.0..3.0f64) {
        let base = exponent_fit(&pts).unwrap();
        let moved: Vec<_> = pts.iter().map(|&(x, y, w)| (x, c * y + d, w)).collect();
        let fit = exponent_fit(&moved).unwrap();
        prop_assert!((fit.slope - c * base.slope).abs() <= 1e-9 * (1.0 + (c * base.slope).abs()));
    }

    #[test]
    fn fit_ignores_input_order(pts in design(), rot in 0usize..12) {
        let mut shuffled = pts.clone();
        shuffled.reverse();
        let r = rot % shuffled.len();
        shuffled.rotate_left(r);
        prop_assert_eq!(exponent_fit(&pts).unwrap(), exponent_fit(&shuffled).unwrap());
    }

    #[test]
    fn full_window_pair_sum_is_translation_invariant(xs in prop::collection::vec(-3.0..3.0f64, 1..20), c in -2.0..2.0f64) {
        let full = (f64::NEG_INFINITY, f64::INFINITY);
        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        let (a, b) = (pair_sum(&xs, 1.0, full), pair_sum(&shifted, 1.0, full));
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn gaussian_tail_sits_between_its_bounds(s in 1.0..20.0f64, r in 1.0..8.0f64) {
        let a = r * s.sqrt();
        let (lo, hi) = gauss_tail_bounds(s, a).unwrap();
        let exact = gauss_tail_exact(s, a).unwrap();
        prop_assert!(lo <= exact * (1.0 + 1e-12) && exact <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn events_add_one_particle_and_extrema_stay_exact(seed in any::<u64>(), t in 0.1..4.0f64) {
        let mut pop = Population::new(SimConfig::with_seed(seed)).unwrap();
        pop.advance_to(t).unwrap();
        prop_assert_eq!(pop.len() as u64, pop.event_count() + 1);
        let snap = pop.snapshot();
        let max = snap.iter().map(|e| e.position).fold(f64::MIN, f64::max);
        let min = snap.iter().map(|e| e.position).fold(f64::MAX, f64::min);
        prop_assert_eq!(pop.rightmost().position, max);
        prop_assert_eq!(pop.leftmost().position, min);
    }

    #[test]
    fn cohort_shrinks_as_slope_grows(seed in any::<u64>(), a in 0.0..1.5f64, da in 0.0..1.0f64) {
        let mut pop = Population::new(SimConfig::with_seed(seed)).unwrap();
        pop.advance_to(3.0).unwrap();
        prop_assert!(cohort_count(&pop, a + da).count <= cohort_count(&pop, a).count);
    }
}
