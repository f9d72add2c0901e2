use critcircle::circle_map::{golden_standard, standard_for};
use critcircle::number_theory::{continued_fraction, RotationNumber};
use critcircle::renorm::{pair_from_map, renormalize, rotation_number_of_pair};
use proptest::prelude::*;

proptest! {
    // each case solves for a map parameter by bisection
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn renormalization_shifts_quotients(prefix in prop::collection::vec(1u64..=4, 5)) {
        let rho = RotationNumber::eventually_periodic(&prefix, &[1], 60).unwrap();
        let pair = pair_from_map(&standard_for(&rho), 0).unwrap();
        let next = renormalize(&pair).unwrap();
        prop_assert!((next.i_eta().len() - 1.0).abs() < 1e-12);
        let a = continued_fraction(rotation_number_of_pair(&pair, 400_000).unwrap(), 5).unwrap();
        let b = continued_fraction(rotation_number_of_pair(&next, 400_000).unwrap(), 4).unwrap();
        prop_assert_eq!(&b.quotients[..], &a.quotients[1..5]);
        prop_assert_eq!(&a.quotients[..], &prefix[1..].iter().chain(&[1]).cloned().collect::<Vec<_>>()[..]);
    }
}

#[test]
fn commutation_residual_stays_bounded() {
    let f = golden_standard();
    for m in 2..6 {
        let p = pair_from_map(&f, m).unwrap();
        let r = renormalize(&p).unwrap();
        let (a, b) = (p.commutation_residual(200), r.commutation_residual(200));
        assert!(b <= 10.0 * a.max(1e-15), "m = {m}: {a:e} -> {b:e}");
    }
}
