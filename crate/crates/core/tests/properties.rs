mod common;

use common::{kind_of, random_fan_problem, v};
use proptest::prelude::*;
use setinc_core::analysis::{estimate_erbom, tangent_test, Polyhedron, TangentVerdict};
use setinc_core::merit::default_t_schedule;
use setinc_core::prederivative::{banach_constants, bconst, gaussian_matrix, DualRestriction, OperatorFan};
use setinc_core::{instances, ConvexSet, Mode, Vector};

fn point(xs: &[f64], n: usize) -> Vector {
    Vector::from_iterator(n, xs.iter().copied().take(n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn merit_is_convex(
        seed in 0u64..1_000_000, n in 1usize..=4, m in 1usize..=4, k in 1usize..=5, kind in 0usize..3,
        a in prop::collection::vec(-4.0f64..4.0, 4), b in prop::collection::vec(-4.0f64..4.0, 4), t in 0.0f64..=1.0,
    ) {
        let p = random_fan_problem(seed, n, m, k, kind_of(kind));
        let (x1, x2) = (point(&a, n), point(&b, n));
        let mid = &x1 * t + &x2 * (1.0 - t);
        let lhs = p.value(&mid).unwrap();
        let rhs = t * p.value(&x1).unwrap() + (1.0 - t) * p.value(&x2).unwrap();
        prop_assert!(lhs <= rhs + 1e-9, "{lhs} > {rhs}");
    }

    #[test]
    fn cone_merit_is_homogeneous(
        seed in 0u64..1_000_000, n in 1usize..=4, m in 1usize..=4, k in 1usize..=5,
        a in prop::collection::vec(-4.0f64..4.0, 4), lambda in 0.0f64..20.0,
    ) {
        let p = random_fan_problem(seed, n, m, k, common::TargetKind::Orthant);
        prop_assert_eq!(p.mode(), Mode::Cone);
        let x = point(&a, n);
        let lhs = p.value(&(&x * lambda)).unwrap();
        let rhs = lambda * p.value(&x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn dual_sampling_never_exceeds_merit(
        seed in 0u64..1_000_000, n in 1usize..=3, m in 1usize..=3, k in 1usize..=4, kind in 0usize..3,
        a in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        let p = random_fan_problem(seed, n, m, k, kind_of(kind));
        let x = point(&a, n);
        let sampled = p.merit_dual_sampled(&x, 500, seed).unwrap();
        prop_assert!(sampled <= p.value(&x).unwrap() + 1e-9);
    }

    #[test]
    fn normalize_is_idempotent(seed in 0u64..1_000_000, n in 1usize..=3, m in 1usize..=3, k in 1usize..=4) {
        let p = random_fan_problem(seed, n, m, k, common::TargetKind::Ball);
        let once = p.map().normalize();
        prop_assert_eq!(once.normalize(), once);
    }

    #[test]
    fn polyhedron_projection_is_feasible_and_closest(
        x in prop::collection::vec(-5.0f64..5.0, 2), y in prop::collection::vec(-1.0f64..1.0, 2),
    ) {
        let solv = instances::i3().solution_set.unwrap();
        let x = v(&x);
        let p = solv.project(&x).unwrap();
        prop_assert!(solv.contains(&p, 1e-9));
        // any feasible point is at least as far
        let y = v(&y) * 0.6;
        prop_assert!(solv.contains(&y, 0.0));
        prop_assert!((&x - &p).norm() <= (&x - &y).norm() + 1e-12);
    }

    #[test]
    fn tau_hat_is_nonincreasing_in_sample_count(seed in 0u64..10_000, small in 5usize..40, extra in 1usize..40) {
        let p = instances::i3().problem;
        let lo = Vector::from_element(2, -3.0);
        let hi = Vector::from_element(2, 3.0);
        let a = estimate_erbom(&p, &lo, &hi, small, seed, &[]);
        let b = estimate_erbom(&p, &lo, &hi, small + extra, seed, &[]).unwrap();
        if let Ok(a) = a {
            prop_assert!(b.tau_hat <= a.tau_hat);
        }
    }

    #[test]
    fn full_sphere_bconst_is_nonpositive(seed in 0u64..1_000_000, n in 1usize..=3, m in 1usize..=3, k in 1usize..=4) {
        let ops = (0..k).map(|i| gaussian_matrix(m, n, seed * 8 + i as u64)).collect();
        let fan = OperatorFan::new(ops).unwrap();
        let b = bconst(&fan, &DualRestriction::Full, 64, 30, seed).unwrap();
        prop_assert!(b.value <= 1e-9);
    }

    #[test]
    fn cone_bconst_is_positively_homogeneous_in_the_fan(seed in 0u64..1_000_000, scale in 0.1f64..10.0) {
        let fan = OperatorFan::new((0..3).map(|i| gaussian_matrix(2, 2, seed * 4 + i)).collect()).unwrap();
        let r = DualRestriction::cone(&ConvexSet::nonpositive_orthant(2).unwrap()).unwrap();
        let base = bconst(&fan, &r, 64, 60, 1).unwrap().value;
        let scaled = bconst(&fan.scaled(scale), &r, 64, 60, 1).unwrap().value;
        prop_assert!((scaled - scale * base).abs() <= 1e-6 * (1.0 + scale * base.abs()));
    }

    #[test]
    fn banach_product_is_one(seed in 0u64..1_000_000, m in 1usize..=3, extra in 0usize..=2) {
        let a = gaussian_matrix(m, m + extra, seed);
        let b = banach_constants(&a).unwrap();
        prop_assert!((b.c_dual * b.c_primal - 1.0).abs() <= 1e-12);
        prop_assert_eq!(b.sur, b.c_dual);
    }

    #[test]
    fn tangent_directions_are_closed_under_convex_combinations(
        a in prop::collection::vec(-1.0f64..1.0, 2), b in prop::collection::vec(-1.0f64..1.0, 2), t in 0.0f64..=1.0,
    ) {
        let p = instances::i3_cone().problem;
        let ts = default_t_schedule();
        let origin = Vector::zeros(2);
        let (u, w) = (v(&a), v(&b));
        let inside = |d: &Vector| matches!(tangent_test(&p, &origin, d, &ts, 1e-9).unwrap(), TangentVerdict::InCone { .. });
        if inside(&u) && inside(&w) {
            prop_assert!(inside(&(&u * t + &w * (1.0 - t))));
        }
    }
}

#[test]
fn polyhedron_rejects_empty_description() {
    assert!(Polyhedron::new(vec![], vec![]).is_err());
}
