//! Drops, the external ray of argument 0, the equipotential, and the
//! closed domain `P_0` they cut out.

use super::blaschke::{circle_point, BlaschkeMap};
use crate::circle_map;
use crate::{Complex64, LabError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const TAU: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    /// Vertices on the boundary of `W`.
    pub drop_resolution: usize,
    /// Equipotential level of `E`.
    pub level: f64,
    /// Curves stop once their drops come this close to `beta`.
    pub beta_tol: f64,
    /// Vertices per band of the ray.
    pub ray_band: usize,
    /// Iteration budget of the Green's function.
    pub green_budget: usize,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig {
            drop_resolution: 1200,
            level: 1.0,
            beta_tol: 1e-4,
            ray_band: 300,
            green_budget: 400,
        }
    }
}

/// A component of `f^{-i}(W)` given as a closed polyline starting and
/// ending at its root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropRegion {
    pub root: Complex64,
    pub depth: usize,
    pub boundary: Vec<Complex64>,
    /// Index of the vertex over the tip `w_1` of `W` (the preimage of 1).
    pub tip: usize,
}

impl DropRegion {
    pub fn tip_point(&self) -> Complex64 {
        self.boundary[self.tip]
    }

    pub fn diameter(&self) -> f64 {
        polyline_diameter(&self.boundary)
    }

    /// Largest `|f^{depth+1}(z)| - 1` over the boundary, which should vanish.
    pub fn boundary_residual(&self, f: &BlaschkeMap) -> f64 {
        self.boundary
            .iter()
            .map(|&z| (f.iterate(z, self.depth as u64 + 1).norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Pullback rooted at a preimage `root` of this drop's root.
    pub fn pull(&self, f: &BlaschkeMap, root: Complex64) -> Result<DropRegion> {
        if (f.eval(root) - self.root).norm() > 1e-9 * self.root.norm().max(1.0) {
            return Err(LabError::Precondition("root does not map to the drop root".into()));
        }
        let boundary = f.pull_polyline(&self.boundary, root)?;
        Ok(DropRegion {
            root,
            depth: self.depth + 1,
            boundary,
            tip: self.tip,
        })
    }
}

/// Point of `dW` at parameter `psi`: the largest root of
/// `z^3 - 3z^2 + 3e z - e`, `e = e^{i psi}`, which solves `g(z) = e^{i psi}`
/// for the Blaschke factor `g(z) = z^2 (z-3)/(1-3z)`.
pub fn w_boundary(psi: f64) -> Complex64 {
    let e = Complex64::from_polar(1.0, psi);
    let one = Complex64::new(1.0, 0.0);
    let roots = super::blaschke::cubic_roots(one, -one * 3.0, e * 3.0, -e);
    *roots.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap()
}

/// `W` itself, with its tip `w_1` (where `f(w_1) = 1`) as an exact vertex.
pub fn drop_w(f: &BlaschkeMap, resolution: usize) -> Result<DropRegion> {
    if resolution < 16 {
        return Err(LabError::Domain("drop resolution below 16".into()));
    }
    // f = c g, so f(z) = 1 exactly when g(z) = e^{-2 pi i tau}
    let psi_tip = (-TAU * f.tau).rem_euclid(TAU);
    let mut psis: Vec<f64> = (0..=resolution).map(|k| TAU * k as f64 / resolution as f64).collect();
    let pos = psis.partition_point(|&p| p < psi_tip);
    if (psis[pos] - psi_tip).abs() < 1e-12 {
        psis[pos] = psi_tip;
    } else {
        psis.insert(pos, psi_tip);
    }
    let n = psis.len();
    let boundary = psis
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            if k == 0 || k == n - 1 {
                Complex64::new(1.0, 0.0)
            } else {
                w_boundary(p)
            }
        })
        .collect();
    Ok(DropRegion {
        root: Complex64::new(1.0, 0.0),
        depth: 0,
        boundary,
        tip: pos,
    })
}

/// `W, W(w_1), W(w_2), ...`, each rooted at the tip of the previous one,
/// until a tip comes within `tol` of `beta`.
pub fn drop_chain(f: &BlaschkeMap, resolution: usize, tol: f64, max: usize) -> Result<Vec<DropRegion>> {
    let beta = f.fixed_point_beta()?;
    let mut chain = vec![drop_w(f, resolution)?];
    loop {
        let last = chain.last().unwrap();
        if (last.tip_point() - beta).norm() < tol {
            return Ok(chain);
        }
        if chain.len() > max {
            return Err(LabError::NoConvergence(format!(
                "drop tips still {:.2e} from beta after {max} pullbacks",
                (last.tip_point() - beta).norm()
            )));
        }
        let next = last.pull(f, last.tip_point())?;
        chain.push(next);
    }
}

fn dedupe(pts: Vec<Complex64>) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(pts.len());
    for z in pts {
        if out.last().is_none_or(|w| (z - w).norm() > 1e-13) {
            out.push(z);
        }
    }
    out
}

/// Far piece of the ray of argument 0: `e^g / a` for `g` from `2 g0` down to `g0`.
fn far_segment(f: &BlaschkeMap, g0: f64, n: usize) -> Vec<Complex64> {
    let a = f.leading();
    (0..n)
        .map(|k| {
            let g = 2.0 * g0 - g0 * k as f64 / (n - 1) as f64;
            Complex64::new(g.exp(), 0.0) / a
        })
        .collect()
}

const RAY_DEPTH: u32 = 6;

/// External ray of argument 0 from Green level `2 level` (`outer`) or
/// `level` down to its landing point, by repeated pullback of a far band.
/// The ray is fixed by `f`, so each band's inner end seeds the next.
pub fn ray_zero(f: &BlaschkeMap, level: f64, band: usize, outer: bool) -> Result<Vec<Complex64>> {
    let beta = f.fixed_point_beta()?;
    let g0 = level * 2f64.powi(RAY_DEPTH as i32);
    let mut seg = far_segment(f, g0, band);
    let mut ray = Vec::new();
    let first = if outer { RAY_DEPTH - 1 } else { RAY_DEPTH };
    for k in 0..400u32 {
        let seed = *seg.last().unwrap();
        seg = f.pull_polyline(&seg, seed)?;
        if k + 1 > first {
            ray.extend_from_slice(&seg);
        }
        let end = *seg.last().unwrap();
        if (end - beta).norm() < 1e-9 {
            return Ok(dedupe(ray));
        }
    }
    let end = *seg.last().unwrap();
    Err(LabError::RayStall { re: end.re, im: end.im })
}

/// Point of `{G = level}` on the ray from 0 at angle `phi`, by bisection
/// in the radius.
pub fn equipotential_point(f: &BlaschkeMap, level: f64, phi: f64, budget: usize) -> Result<Complex64> {
    let dir = Complex64::from_polar(1.0, phi);
    let (mut lo, mut hi) = (2.0f64, 40.0f64);
    if f.green(dir * lo, budget) >= level || f.green(dir * hi, budget) <= level {
        return Err(LabError::NotFound(format!("equipotential {level} not bracketed at angle {phi}")));
    }
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if f.green(dir * m, budget) < level {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(dir * (0.5 * (lo + hi)))
}

/// Closed equipotential, sampled at `n` angles.
pub fn equipotential(f: &BlaschkeMap, level: f64, n: usize, budget: usize) -> Result<Vec<Complex64>> {
    (0..n)
        .map(|k| equipotential_point(f, level, TAU * k as f64 / n as f64, budget))
        .collect()
}

/// Winding number of a closed polyline around `z`.
pub fn winding_number(poly: &[Complex64], z: Complex64) -> i64 {
    let mut total = 0.0;
    for k in 0..poly.len() {
        let a = poly[k] - z;
        let b = poly[(k + 1) % poly.len()] - z;
        total += (b / a).arg();
    }
    (total / TAU).round() as i64
}

pub fn polyline_diameter(pts: &[Complex64]) -> f64 {
    let hull = convex_hull(pts);
    let mut d: f64 = 0.0;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            d = d.max((hull[i] - hull[j]).norm());
        }
    }
    d
}

/// Andrew's monotone chain.
pub fn convex_hull(pts: &[Complex64]) -> Vec<Complex64> {
    let mut p: Vec<Complex64> = pts.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: Complex64, a: Complex64, b: Complex64| (a - o).re * (b - o).im - (a - o).im * (b - o).re;
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Complex64>> =
            if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &z in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], z) <= 0.0 {
                hull.pop();
            }
            hull.push(z);
        }
        hull.pop();
    }
    hull
}

/// The curves bounding `P_0`, kept for inspection and plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceZero {
    pub beta: Complex64,
    /// Upper sides of the drop chain, from 1 to `beta`.
    pub gamma: Vec<Complex64>,
    /// Lower sides, from 1 to `beta`.
    pub gamma_prime: Vec<Complex64>,
    /// Preimage of `gamma_prime` starting at `u = f^{-1}(1)` on the circle.
    pub gamma_hat: Vec<Complex64>,
    /// Ray of argument 0 from the equipotential to `beta`.
    pub ray: Vec<Complex64>,
    /// Preimage ray from the equipotential to the end of `gamma_hat`.
    pub ray_prime: Vec<Complex64>,
    pub equipotential_arc: Vec<Complex64>,
    /// `u` in turns, with `u - 1` the far end of the circle trace.
    pub u_turns: f64,
    /// Closed boundary of `P_0`.
    pub polygon: Vec<Complex64>,
    pub drops: usize,
}

fn densify(pts: &[Complex64], h: f64) -> Vec<Complex64> {
    let mut out = vec![pts[0]];
    for w in pts.windows(2) {
        let n = ((w[1] - w[0]).norm() / h).ceil().max(1.0) as usize;
        for k in 1..=n {
            out.push(w[0] + (w[1] - w[0]) * (k as f64 / n as f64));
        }
    }
    out
}

/// Builds `P_0`: the domain bounded by an arc of `E`, the ray `R`, the
/// curve `Gamma`, the circle arc `[f^{-1}(1), 1]`, `Gamma-hat` and `R'`.
pub fn piece_zero(f: &BlaschkeMap, cfg: &CurveConfig) -> Result<PieceZero> {
    let beta = f.fixed_point_beta()?;
    let chain = drop_chain(f, cfg.drop_resolution, cfg.beta_tol, 200)?;
    let mut gamma = Vec::new();
    let mut gamma_prime = Vec::new();
    for d in &chain {
        gamma.extend(d.boundary[d.tip..].iter().rev());
        gamma_prime.extend_from_slice(&d.boundary[..=d.tip]);
    }
    gamma.push(beta);
    gamma_prime.push(beta);
    let gamma = dedupe(gamma);
    let gamma_prime = dedupe(gamma_prime);

    let ray = ray_zero(f, cfg.level, cfg.ray_band, false)?;
    let ray_outer = ray_zero(f, cfg.level, cfg.ray_band, true)?;

    let u_turns = circle_map::lift_inverse(&f.circle(), 1.0);
    let u = circle_point(u_turns);
    let gamma_hat = f.pull_polyline(&densify(&gamma_prime, 0.02), u)?;
    let nu_hat = *gamma_hat.last().unwrap();
    let rev: Vec<Complex64> = ray_outer.iter().rev().copied().collect();
    let mut ray_prime = f.pull_polyline(&rev, nu_hat)?;
    ray_prime.reverse();

    let e0 = ray[0].arg();
    let e1 = ray_prime[0].arg();
    let t1 = if e0 < e1 { e0 + TAU } else { e0 };
    let arc_n = 400;
    let equipotential_arc = (0..arc_n)
        .map(|k| {
            let phi = e1 + (t1 - e1) * k as f64 / (arc_n - 1) as f64;
            equipotential_point(f, cfg.level, phi, cfg.green_budget)
        })
        .collect::<Result<Vec<_>>>()?;

    let circ_n = 600;
    let circle_arc: Vec<Complex64> = (0..circ_n)
        .map(|k| circle_point((u_turns - 1.0) * k as f64 / (circ_n - 1) as f64))
        .collect();

    let mut polygon = equipotential_arc.clone();
    polygon.extend_from_slice(&ray);
    polygon.extend(gamma.iter().rev());
    polygon.extend_from_slice(&circle_arc);
    polygon.extend_from_slice(&gamma_hat);
    polygon.extend(ray_prime.iter().rev());
    let polygon = dedupe(polygon);

    for (z, want) in [(Complex64::new(2.0, 0.0), 1), (Complex64::new(0.0, -2.0), 1), (Complex64::new(0.0, 0.0), 0)] {
        let w = winding_number(&polygon, z);
        if w.abs() != want {
            return Err(LabError::Precondition(format!("P_0 winds {w} times around {z}")));
        }
    }
    Ok(PieceZero {
        beta,
        gamma,
        gamma_prime,
        gamma_hat,
        ray,
        ray_prime,
        equipotential_arc,
        u_turns,
        polygon,
        drops: chain.len(),
    })
}
