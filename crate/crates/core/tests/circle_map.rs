use critcircle::circle_map::{closest_returns, rotation_number, standard_for, standard_map, Lift};
use critcircle::number_theory::{continued_fraction, RotationNumber};
use proptest::prelude::*;

proptest! {
    // irrational targets: random parameters of a critical family are almost surely locked
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn closest_return_structure(prefix in prop::collection::vec(1u64..=5, 4)) {
        let target = RotationNumber::eventually_periodic(&prefix, &[1], 60).unwrap();
        let f = standard_for(&target);
        let orbit = closest_returns(&f, 12, 1e-11).unwrap();
        let top = orbit.max_level();
        prop_assert!(top >= 8);
        for m in 0..top {
            prop_assert!(orbit.delta[m] * orbit.delta[m + 1] < 0.0, "sides at level {}", m);
        }
        // cyclic order only compares returns on the same side of 0
        for m in 1..top {
            prop_assert!(orbit.len(m + 1) < orbit.len(m - 1));
        }
        // integer recursion against the expansion of the measured rotation number
        let rho = rotation_number(&f, 2_000_000, 1e-13).unwrap();
        let cf = continued_fraction(rho, top).unwrap();
        for m in 1..top.min(cf.quotients.len()) {
            if cf.q[m + 1] > 100_000 {
                break;
            }
            prop_assert_eq!(orbit.q[m + 1], cf.quotients[m] * orbit.q[m] + orbit.q[m - 1]);
        }
    }

    #[test]
    fn lift_commutes_with_unit_translation(theta in 0.0f64..1.0, x in -3.0f64..3.0) {
        let f = standard_map(theta);
        prop_assert!((f.lift(x + 1.0) - f.lift(x) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn golden_lengths_shrink_every_level() {
    let orbit = closest_returns(&critcircle::circle_map::golden_standard(), 20, 1e-11).unwrap();
    assert!((0..20).all(|m| orbit.len(m + 1) < orbit.len(m)));
}

#[test]
fn large_quotient_breaks_cross_side_shrinking() {
    let t = RotationNumber::eventually_periodic(&[1, 1, 1, 4], &[1], 60).unwrap();
    let orbit = closest_returns(&standard_for(&t), 6, 1e-11).unwrap();
    assert_eq!(orbit.q[4], 14);
    assert!(orbit.len(4) > orbit.len(3));
}
