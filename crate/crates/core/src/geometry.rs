//! Slit-plane geometry: the neighborhoods `D_theta(J)`, the angle between a
//! point and an interval, commensurability, and sampled checks of the
//! Schwarz, good-angle and cube-root lemmas.

use crate::{LabError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Margins smaller than this are rounding noise of the boundary samples.
pub const MARGIN_FLOOR: f64 = 1e-11;
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 512;

/// Closed real interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    /// Interval spanned by two endpoints given in either order.
    pub fn new(x: f64, y: f64) -> Self {
        Interval {
            a: x.min(y),
            b: x.max(y),
        }
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.a <= other.a && other.b <= self.b
    }

    /// Euclidean distance from `z` to the segment.
    pub fn dist(&self, z: Complex64) -> f64 {
        let x = z.re.clamp(self.a, self.b);
        (z - Complex64::new(x, 0.0)).norm()
    }
}

/// `|arg((z-a)/(z-b))|`: the angle under which `J` is seen from `z`.
pub fn subtended_angle(z: Complex64, j: &Interval) -> f64 {
    let za = z - j.a;
    let zb = z - j.b;
    // arg(za / zb) without forming the quotient
    let cross = za.im * zb.re - za.re * zb.im;
    let dot = za.re * zb.re + za.im * zb.im;
    cross.atan2(dot).abs()
}

/// The angle between `z` and `J`: least of the angles that `[a,z]` makes with
/// the ray `(-inf, a]` and `[b,z]` with `[b, +inf)`.
pub fn angle_to_interval(z: Complex64, j: &Interval) -> Result<f64> {
    if z == Complex64::new(j.a, 0.0) || z == Complex64::new(j.b, 0.0) {
        return Err(LabError::Domain("angle undefined at an endpoint".into()));
    }
    let at_a = PI - (z - j.a).arg().abs();
    let at_b = (z - j.b).arg().abs();
    Ok(at_a.min(at_b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicNeighborhood {
    pub j: Interval,
    pub theta: f64,
}

impl GeodesicNeighborhood {
    pub fn new(j: Interval, theta: f64) -> Self {
        GeodesicNeighborhood { j, theta }
    }

    pub fn disc(j: Interval) -> Self {
        Self::new(j, PI / 2.0)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        in_geodesic_nbhd(z, self)
    }

    /// Positive when `w` lies outside, in radians of subtended angle.
    pub fn margin(&self, w: Complex64) -> f64 {
        (PI - self.theta) - subtended_angle(w, &self.j)
    }

    /// `n` boundary points, half on each arc, cosine-clustered toward the
    /// endpoints of `J`.
    pub fn boundary_samples(&self, n: usize) -> Vec<Complex64> {
        let half = n.div_ceil(2);
        let alpha = PI - self.theta;
        let l = 0.5 * self.j.len();
        let h = l / alpha.tan();
        let r = l / alpha.sin();
        let c = Complex64::new(self.j.mid(), h);
        let (p0, p1) = (alpha - PI / 2.0, 1.5 * PI - alpha);
        let mut out = Vec::with_capacity(2 * half);
        for k in 1..=half {
            let s = 0.5 * (1.0 - (PI * k as f64 / (half + 1) as f64).cos());
            let phi = p0 + (p1 - p0) * s;
            out.push(c + Complex64::from_polar(r, phi));
        }
        let upper: Vec<Complex64> = out.clone();
        out.extend(upper.iter().map(|z| z.conj()));
        out.truncate(n.max(1));
        out
    }
}

pub fn in_geodesic_nbhd(z: Complex64, d: &GeodesicNeighborhood) -> bool {
    if z.im == 0.0 {
        return d.j.a < z.re && z.re < d.j.b;
    }
    subtended_angle(z, &d.j) > PI - d.theta
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchwarzReport {
    pub max_margin: f64,
    pub samples: usize,
}

impl SchwarzReport {
    pub fn held(&self) -> bool {
        self.max_margin <= 0.0
    }
}

/// Maps boundary samples of `D_theta(J)` through `branch` and reports how far
/// the images stray outside `D_theta(J2)`.
pub fn schwarz_sample_check<F>(branch: F, j: Interval, j2: Interval, theta: f64, n: usize) -> Result<SchwarzReport>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let d = GeodesicNeighborhood::new(j, theta);
    let d2 = GeodesicNeighborhood::new(j2, theta);
    let mut worst = f64::NEG_INFINITY;
    let samples = d.boundary_samples(n);
    for z in &samples {
        let w = branch(*z)?;
        let mut m = d2.margin(w);
        if m.abs() < MARGIN_FLOOR {
            m = 0.0;
        }
        worst = worst.max(m);
    }
    Ok(SchwarzReport {
        max_margin: worst,
        samples: samples.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationReport {
    pub points: Vec<f64>,
    pub k: f64,
}

/// Smallest `K` making every pair of intervals between the points
/// `K`-commensurable: longest interval over shortest.
pub fn commensurability(points: &[f64]) -> Result<ConfigurationReport> {
    if points.len() < 3 {
        return Err(LabError::Domain("need at least three points".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut min_gap = f64::INFINITY;
    for w in sorted.windows(2) {
        let g = w[1] - w[0];
        if g == 0.0 {
            return Err(LabError::Domain(format!("duplicate point {}", w[0])));
        }
        min_gap = min_gap.min(g);
    }
    let diam = sorted[sorted.len() - 1] - sorted[0];
    Ok(ConfigurationReport {
        points: points.to_vec(),
        k: diam / min_gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodAngleReport {
    pub c: f64,
    pub used: usize,
    /// Indices of samples violating the precondition.
    pub skipped: Vec<usize>,
}

/// Fits the smallest `C` with
/// `dist(branch(z), J2)/|J2| <= C dist(z, J)/|J|` over admissible samples.
pub fn good_angle_check<F>(branch: F, j: Interval, j2: Interval, eps: f64, samples: &[Complex64]) -> Result<GoodAngleReport>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut c = 0.0f64;
    let mut used = 0;
    let mut skipped = Vec::new();
    for (i, z) in samples.iter().enumerate() {
        let d = j.dist(*z);
        let ok = d >= j.len() && angle_to_interval(*z, &j).map(|a| a >= eps).unwrap_or(false);
        if !ok {
            skipped.push(i);
            continue;
        }
        let w = branch(*z)?;
        let ratio = (j2.dist(w) / j2.len()) / (d / j.len());
        c = c.max(ratio);
        used += 1;
    }
    Ok(GoodAngleReport { c, used, skipped })
}

/// Principal cube root, mapping `C \ R_-` onto `|arg| < pi/3`.
pub fn principal_cbrt(z: Complex64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    Complex64::from_polar(z.norm().cbrt(), z.arg() / 3.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeRootHull {
    pub a: f64,
    pub theta: f64,
    pub theta2: f64,
    /// Angle of the neighborhood of `[b,1]` in the cover, `(theta2 + pi)/2`.
    pub gamma: f64,
    pub b: f64,
    pub c: f64,
    pub sigma: f64,
    /// Commensurability constant of the configuration `0, b, c, 1`.
    pub k_config: f64,
}

/// Samples of `phi(D_theta(T))` for `T = [-a, 1]`: boundary arcs, both banks
/// of the cut along `(-a, 0)`, and an interior grid.
fn cube_root_image_samples(a: f64, theta: f64, n: usize) -> Vec<Complex64> {
    let t = Interval::new(-a, 1.0);
    let d = GeodesicNeighborhood::new(t, theta);
    let mut pts: Vec<Complex64> = d.boundary_samples(n);
    let nb = (n / 4).max(8);
    for k in 1..nb {
        let x = -a * k as f64 / nb as f64;
        pts.push(Complex64::new(x, 1e-300));
        pts.push(Complex64::new(x, -1e-300));
    }
    // interior: shrink boundary samples toward interval points
    let bnd = d.boundary_samples(n / 4 + 8);
    for z in &bnd {
        let base = Complex64::new(z.re.clamp(t.a, t.b), 0.0);
        for s in [0.25, 0.5, 0.75] {
            let w = base + (z - base) * s;
            if w.im != 0.0 {
                pts.push(w);
            }
        }
    }
    pts.iter().map(|z| principal_cbrt(*z)).collect()
}

/// Cube-root lemma, first two parts: the smallest `theta2` with
/// `phi(D_theta(T)) subset D_theta2([0,1])` on samples, and a cover by
/// `D_gamma([b,1])` and `D_sigma([0,c])` minimizing `sigma`.
pub fn cube_root_hull(a: f64, theta: f64, n: usize) -> Result<CubeRootHull> {
    if a <= 0.0 {
        return Err(LabError::Domain("a must be positive".into()));
    }
    let unit = Interval::new(0.0, 1.0);
    let img = cube_root_image_samples(a, theta, n);
    let mut theta2 = 0.0f64;
    for w in &img {
        if *w == Complex64::new(1.0, 0.0) || *w == Complex64::new(0.0, 0.0) {
            continue;
        }
        if w.im == 0.0 && unit.contains(w.re) {
            continue;
        }
        theta2 = theta2.max(PI - subtended_angle(*w, &unit));
    }
    // keep the cover strictly inside: nudge above the sampled supremum
    let theta2 = (theta2 + 1e-12).min(PI);
    let gamma = 0.5 * (theta2 + PI);
    let grid = 40;
    let mut best: Option<(f64, f64, f64)> = None;
    for ib in 1..grid {
        let b = ib as f64 / grid as f64;
        let big = GeodesicNeighborhood::new(Interval::new(b, 1.0), gamma);
        let uncovered: Vec<Complex64> = img
            .iter()
            .copied()
            .filter(|w| !(big.contains(*w) || (w.im.abs() < 1e-200 && w.re >= b && w.re <= 1.0)))
            .collect();
        for ic in (ib + 1)..=grid {
            let c = ic as f64 / grid as f64;
            let small = Interval::new(0.0, c);
            let mut sigma = 0.0f64;
            for w in &uncovered {
                if w.norm() == 0.0 || (w.im.abs() < 1e-200 && w.re > 0.0 && w.re < c) {
                    continue;
                }
                sigma = sigma.max(PI - subtended_angle(*w, &small));
            }
            if best.is_none_or(|(_, _, s)| sigma < s - 1e-12) {
                best = Some((b, c, sigma));
            }
        }
    }
    let (b, c, sigma) = best.expect("grid is nonempty");
    let k_config = if c < 1.0 {
        commensurability(&[0.0, b, c, 1.0])?.k
    } else {
        commensurability(&[0.0, b, 1.0])?.k
    };
    Ok(CubeRootHull {
        a,
        theta,
        theta2,
        gamma,
        b,
        c,
        sigma,
        k_config,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeRootThird {
    pub delta: f64,
    pub count: usize,
    pub min_angle: f64,
    pub min_dist: f64,
    pub max_dist: f64,
    /// `max(1/min_dist, max_dist)`.
    pub c: f64,
}

/// Cube-root lemma, third part: points of `phi(D(T))` outside
/// `D([-delta, 1+delta])` see `[0,1]` at a definite angle and distance.
pub fn cube_root_third(a: f64, delta: f64, n: usize) -> Result<CubeRootThird> {
    let unit = Interval::new(0.0, 1.0);
    let avoid = GeodesicNeighborhood::disc(Interval::new(-delta, 1.0 + delta));
    let img = cube_root_image_samples(a, PI / 2.0, n);
    let mut out = CubeRootThird {
        delta,
        count: 0,
        min_angle: PI,
        min_dist: f64::INFINITY,
        max_dist: 0.0,
        c: 0.0,
    };
    for w in img {
        if avoid.contains(w) || (w.im.abs() < 1e-200 && w.re > -delta && w.re < 1.0 + delta) {
            continue;
        }
        out.count += 1;
        out.min_angle = out.min_angle.min(angle_to_interval(w, &unit)?);
        let d = unit.dist(w);
        out.min_dist = out.min_dist.min(d);
        out.max_dist = out.max_dist.max(d);
    }
    if out.count == 0 {
        return Err(LabError::NotFound("no samples outside the avoided disc".into()));
    }
    out.c = (1.0 / out.min_dist).max(out.max_dist);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn angle_examples() {
        let j = Interval::new(0.0, 1.0);
        assert_eq!(angle_to_interval(c(2.0, 0.0), &j).unwrap(), 0.0);
        assert!((angle_to_interval(c(1.0, 1.0), &j).unwrap() - PI / 2.0).abs() < 1e-15);
        // oracle: atan2 by hand, both endpoint angles are 135 degrees
        let expect = PI - (0.5f64).atan2(0.5);
        assert!((angle_to_interval(c(0.5, 0.5), &j).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 0.75 * PI).abs() < 1e-15);
        assert!(angle_to_interval(c(0.0, 0.0), &j).is_err());
    }

    #[test]
    fn membership_examples() {
        let j = Interval::new(0.0, 1.0);
        let d = GeodesicNeighborhood::disc(j);
        assert!(d.contains(c(0.5, 0.49)));
        assert!(!d.contains(c(0.5, 0.51)));
        for th in [0.1, 1.0, 2.0, 3.0] {
            assert!(GeodesicNeighborhood::new(j, th).contains(c(0.3, 0.0)));
        }
        let wide = GeodesicNeighborhood::new(j, 0.75 * PI);
        let z = c(0.5, 0.9);
        // arg((z-0)/(z-1)) by hand
        let ang = ((z / (z - 1.0)).arg()).abs();
        assert!(ang > PI - 0.75 * PI);
        assert!(wide.contains(z));
    }

    #[test]
    fn boundary_samples_lie_on_boundary() {
        let d = GeodesicNeighborhood::new(Interval::new(-0.3, 2.0), 1.1);
        for z in d.boundary_samples(64) {
            assert!(d.margin(z).abs() < 1e-12);
        }
    }

    #[test]
    fn schwarz_trivial_branches() {
        let j = Interval::new(0.0, 1.0);
        let r = schwarz_sample_check(Ok, j, j, PI / 2.0, 512).unwrap();
        assert!(r.max_margin <= 0.0, "{}", r.max_margin);
        let r = schwarz_sample_check(|z| Ok(z / 2.0), j, Interval::new(0.0, 0.5), 2.0, 512).unwrap();
        assert!(r.held());
    }

    #[test]
    fn commensurability_examples() {
        assert_eq!(commensurability(&[0.0, 1.0, 2.0, 3.0]).unwrap().k, 3.0);
        let k1 = commensurability(&[0.0, 1.0, 2.0]).unwrap().k;
        let k2 = commensurability(&[0.0, 10.0, 20.0]).unwrap().k;
        assert_eq!(k1, k2);
        assert!(commensurability(&[0.0, 1.0, 1.0]).is_err());
        assert!(commensurability(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn good_angle_trivial() {
        let j = Interval::new(0.0, 1.0);
        let samples: Vec<Complex64> = (0..40)
            .map(|k| Complex64::from_polar(1.5 + 0.1 * k as f64, 0.4 + 0.05 * k as f64) + 0.5)
            .collect();
        let r = good_angle_check(Ok, j, j, 0.3, &samples).unwrap();
        assert!(r.c <= 1.0 && r.used > 0);
        let r = good_angle_check(|z| Ok(z / 2.0), j, Interval::new(0.0, 0.5), 0.3, &samples).unwrap();
        assert_eq!(r.c, 1.0);
    }

    #[test]
    fn cube_root_examples() {
        assert_eq!(principal_cbrt(c(1.0, 0.0)), c(1.0, 0.0));
        let h = cube_root_hull(1.0, PI / 2.0, 512).unwrap();
        assert!(h.theta2 < PI && h.theta2 > 0.0);
        assert!(h.sigma < PI / 2.0, "sigma = {}", h.sigma);
        let unit = GeodesicNeighborhood::new(Interval::new(0.0, 1.0), h.theta2);
        for w in cube_root_image_samples(1.0, PI / 2.0, 512) {
            if w.im != 0.0 && w.norm() > 0.0 {
                assert!(unit.contains(w));
            }
        }
        let t = cube_root_third(1.0, 0.1, 512).unwrap();
        assert!(t.min_angle > 0.0 && t.c.is_finite());
    }
}
