use critcircle::number_theory::{continued_fraction, gauss, gauss_map, RotationNumber};
use proptest::prelude::*;

/// `[r_0..r_{d-1}]` folded from the tail as an exact fraction `num/den`.
fn fold_from_tail(quotients: &[u64]) -> (u128, u128) {
    let (mut num, mut den) = (0u128, 1u128);
    for &r in quotients.iter().rev() {
        // 1 / (r + num/den) = den / (r den + num)
        let d = r as u128 * den + num;
        num = den;
        den = d;
    }
    (num, den)
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #[test]
    fn convergents_match_tail_folding(q in prop::collection::vec(1u64..50, 1..12)) {
        let rho = RotationNumber::from_quotients(&q).unwrap();
        let (num, den) = fold_from_tail(&q);
        let d = q.len();
        prop_assert_eq!(gcd(num, den), 1);
        prop_assert_eq!((num, den), (rho.p[d] as u128, rho.q[d] as u128));
    }

    #[test]
    fn gauss_shift_matches_analytic_map(
        prefix in prop::collection::vec(1u64..8, 1..6),
        x in 0.05f64..0.95,
    ) {
        // irrational-looking values: a random prefix on a golden tail
        let rho = RotationNumber::eventually_periodic(&prefix, &[1], 40).unwrap();
        let y = rho.value * 0.5 + 0.25 * x;
        let cf = continued_fraction(y, 12).unwrap();
        prop_assume!(!cf.numerically_rational && y > 0.01);
        let shifted = gauss_map(&cf).unwrap();
        prop_assert!((shifted.value - gauss(y)).abs() < 1e-10);
        prop_assert_eq!(&shifted.quotients[..], &cf.quotients[1..]);
    }
}

#[test]
fn golden_denominators_are_fibonacci() {
    let rho = RotationNumber::golden(40);
    let mut fib = vec![1u64, 1];
    while fib.len() < rho.q.len() {
        fib.push(fib[fib.len() - 1] + fib[fib.len() - 2]);
    }
    assert_eq!(rho.q, fib);
}
