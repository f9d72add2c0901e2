use std::f64::consts::TAU;
use std::sync::OnceLock;

use critcircle::circle_map::{closest_returns, rotation_number};
use critcircle::exec::Exec;
use critcircle::number_theory::RotationNumber;
use critcircle::siegel::curves::{drop_w, winding_number};
use critcircle::siegel::{
    build_puzzle, density_probe, render, solve_tau, symmetry_audit, BlaschkeMap, PuzzleConfig, RasterSpec,
};
use critcircle::Complex64;
use proptest::prelude::*;

fn golden() -> &'static BlaschkeMap {
    static F: OnceLock<BlaschkeMap> = OnceLock::new();
    F.get_or_init(|| solve_tau(&RotationNumber::golden(60), 200_000).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn circle_is_invariant(t in 0.0f64..1.0) {
        let z = Complex64::from_polar(1.0, TAU * t);
        prop_assert!((golden().eval(z).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reflection_commutes(r in 0.2f64..5.0, t in 0.0f64..1.0) {
        let z = Complex64::from_polar(r, TAU * t);
        prop_assume!((z - 1.0 / 3.0).norm() > 0.05 && (z - 3.0).norm() > 0.05);
        let f = golden();
        let a = f.eval(z.conj().inv());
        let b = f.eval(z).conj().inv();
        prop_assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()));
    }
}

#[test]
fn criticality_at_one() {
    let f = golden();
    let one = Complex64::new(1.0, 0.0);
    assert!(f.deriv(one).norm() < 1e-10);
    assert!(f.deriv2(one).norm() < 1e-8);
    assert!(f.deriv3(one).norm() > 0.1);
}

#[test]
fn rotation_number_with_doubled_budget() {
    let f = golden();
    let rho = rotation_number(&f.circle(), 4_000_000, 0.0).unwrap();
    assert!((rho - f.theta).abs() < 1e-10, "{rho} vs {}", f.theta);
}

#[test]
fn traces_alternate_and_never_nest() {
    let f = golden();
    let puzzle = build_puzzle(f, 5, &PuzzleConfig::default(), Exec::Parallel).unwrap();
    let orbit = closest_returns(&f.circle(), 8, 1e-15).unwrap();
    for w in puzzle.pieces[1..].windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert!(a.trace_end * b.trace_end < 0.0, "traces of P_{} and P_{} on one side", a.n, b.n);
        // same computation path as the circle orbit
        assert_eq!(b.q, orbit.q[b.n]);
    }
    let ratio: Vec<f64> = puzzle.pieces[2..=5].iter().map(|p| p.inscribed_radius / p.diameter).collect();
    let (lo, hi) = ratio.iter().fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(*r), h.max(*r)));
    assert!(lo > 0.0 && hi / lo <= 2.0, "{ratio:?}");
}

fn segment_distance(poly: &[Complex64], z: Complex64) -> f64 {
    poly.windows(2)
        .map(|s| {
            let d = s[1] - s[0];
            let t = (((z - s[0]) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
            (s[0] + d * t - z).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn drop_interior_maps_into_disc() {
    let f = golden();
    let w = drop_w(f, 600).unwrap();
    let (lo, hi) = w.boundary.iter().fold(
        (Complex64::new(f64::INFINITY, f64::INFINITY), Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(l, h), z| (Complex64::new(l.re.min(z.re), l.im.min(z.im)), Complex64::new(h.re.max(z.re), h.im.max(z.im))),
    );
    let resolution = w
        .boundary
        .windows(2)
        .map(|s| (s[1] - s[0]).norm())
        .fold(0.0, f64::max);
    let mut inside = 0;
    for i in 1..40 {
        for j in 1..40 {
            let z = Complex64::new(
                lo.re + (hi.re - lo.re) * i as f64 / 40.0,
                lo.im + (hi.im - lo.im) * j as f64 / 40.0,
            );
            // only points resolved by the sampled boundary
            let clear = segment_distance(&w.boundary, z) > resolution;
            if clear && winding_number(&w.boundary, z) != 0 {
                inside += 1;
                assert!(f.eval(z).norm() < 1.0, "{z}");
            }
        }
    }
    assert!(inside > 100);
}

#[test]
fn raster_mirror_symmetry() {
    let f = golden();
    let raster = render(f, &RasterSpec::default(), Exec::Parallel);
    let audit = symmetry_audit(f, &raster, Exec::Parallel);
    assert!(audit.disagreement() <= 0.005, "{audit:?}");
}

#[test]
fn critical_point_hit_at_most_once() {
    let f = golden();
    let puzzle = build_puzzle(f, 4, &PuzzleConfig::default(), Exec::Parallel).unwrap();
    let spec = RasterSpec {
        resolution: 512,
        ..RasterSpec::default()
    };
    let raster = render(f, &spec, Exec::Parallel);
    let report = density_probe(f, &raster, &puzzle.pieces[3], 50, 4, Exec::Parallel).unwrap();
    assert!(report.samples.len() >= 50);
    assert!(report.samples.iter().all(|s| s.critical_hits <= 1));
}
