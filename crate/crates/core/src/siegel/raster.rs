//! Escape-time rasters of the Blaschke model and of the Siegel quadratic,
//! with the symmetry audit and the empty-space density probe.

use super::blaschke::{circle_point, BlaschkeMap};
use super::puzzle::{Grid, PuzzlePiece};
use crate::exec::{self, Exec};
use crate::{Complex64, LabError, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum PixelClass {
    Infinity = 0,
    Zero = 1,
    JCandidate = 2,
    Disc = 3,
    Drop = 4,
    Siegel = 5,
}

impl PixelClass {
    pub fn name(self) -> &'static str {
        match self {
            PixelClass::Infinity => "basin-of-infinity",
            PixelClass::Zero => "basin-of-0",
            PixelClass::JCandidate => "J-candidate",
            PixelClass::Disc => "disc",
            PixelClass::Drop => "drop",
            PixelClass::Siegel => "siegel-disc",
        }
    }

    pub const ALL: [PixelClass; 6] = [
        PixelClass::Infinity,
        PixelClass::Zero,
        PixelClass::JCandidate,
        PixelClass::Disc,
        PixelClass::Drop,
        PixelClass::Siegel,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterSpec {
    pub center: Complex64,
    pub half_width: f64,
    pub resolution: usize,
    pub budget: usize,
    pub escape_radius: f64,
    pub trap_radius: f64,
}

impl Default for RasterSpec {
    fn default() -> Self {
        RasterSpec {
            center: Complex64::new(0.0, 0.0),
            half_width: 3.0,
            resolution: 1024,
            budget: 2000,
            escape_radius: 100.0,
            trap_radius: 1e-3,
        }
    }
}

impl RasterSpec {
    pub fn grid(&self) -> Grid {
        let h = 2.0 * self.half_width / self.resolution as f64;
        let origin = self.center - Complex64::new(self.half_width - 0.5 * h, self.half_width - 0.5 * h);
        Grid {
            origin,
            h,
            nx: self.resolution,
            ny: self.resolution,
        }
    }

    pub fn with_resolution(&self, resolution: usize) -> RasterSpec {
        RasterSpec { resolution, ..*self }
    }
}

/// Per-pixel classification. `dynamic` follows the raw orbit of `f`
/// (infinity, 0, or neither); `region` marks the disc and its pullbacks
/// (`JCandidate` there means neither);
/// `combined` is the classification relative to `J_theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JuliaRaster {
    pub spec: RasterSpec,
    pub grid: Grid,
    pub dynamic: Vec<PixelClass>,
    pub region: Vec<PixelClass>,
    pub combined: Vec<PixelClass>,
}

impl JuliaRaster {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> PixelClass {
        self.combined[j * self.grid.nx + i]
    }

    pub fn count(&self, class: PixelClass) -> usize {
        self.combined.iter().filter(|&&c| c == class).count()
    }

    /// Binary PPM: red = dynamic class, green = region, blue = combined.
    pub fn to_ppm(&self) -> Vec<u8> {
        let g = self.grid;
        let mut out = format!("P6\n{} {}\n255\n", g.nx, g.ny).into_bytes();
        let shade = |c: PixelClass| (c as u8) * 50;
        for j in (0..g.ny).rev() {
            for i in 0..g.nx {
                let k = j * g.nx + i;
                out.extend_from_slice(&[shade(self.dynamic[k]), shade(self.region[k]), shade(self.combined[k])]);
            }
        }
        out
    }
}

/// Classes of a single point under the Blaschke map:
/// `(dynamic, region, combined)`.
pub fn classify_point(f: &BlaschkeMap, z: Complex64, spec: &RasterSpec) -> (PixelClass, PixelClass, PixelClass) {
    let mut region = if z.norm() <= 1.0 { PixelClass::Disc } else { PixelClass::JCandidate };
    let mut combined = if region == PixelClass::Disc { Some(PixelClass::Disc) } else { None };
    let mut w = z;
    let mut dynamic = PixelClass::JCandidate;
    for k in 0..=spec.budget {
        let r = w.norm();
        if k > 0 && combined.is_none() && r < 1.0 {
            // first entry into the disc: the pixel lies in a pullback of D
            if r < spec.trap_radius {
                combined = Some(PixelClass::Zero);
            } else {
                combined = Some(PixelClass::Drop);
                region = PixelClass::Drop;
            }
        }
        if r > spec.escape_radius {
            dynamic = PixelClass::Infinity;
            break;
        }
        if r < spec.trap_radius {
            dynamic = PixelClass::Zero;
            break;
        }
        if k < spec.budget {
            w = f.eval(w);
        }
    }
    (dynamic, region, combined.unwrap_or(dynamic))
}

pub fn render(f: &BlaschkeMap, spec: &RasterSpec, exec: Exec) -> JuliaRaster {
    let grid = spec.grid();
    let rows = exec::map_range(exec, grid.ny, |j| {
        (0..grid.nx)
            .map(|i| classify_point(f, grid.point(i, j), spec))
            .collect::<Vec<_>>()
    });
    let mut dynamic = Vec::with_capacity(grid.len());
    let mut region = Vec::with_capacity(grid.len());
    let mut combined = Vec::with_capacity(grid.len());
    for row in rows {
        for (d, r, c) in row {
            dynamic.push(d);
            region.push(r);
            combined.push(c);
        }
    }
    JuliaRaster {
        spec: *spec,
        grid,
        dynamic,
        region,
        combined,
    }
}

/// Siegel quadratic `P(z) = e^{2 pi i theta} z + z^2`. Non-escaping pixels
/// whose orbit over the last quarter of the budget has diameter below
/// `orbit_diameter` are marked as the Siegel-disc region.
pub fn render_quadratic(theta: f64, spec: &RasterSpec, orbit_diameter: f64, exec: Exec) -> JuliaRaster {
    let lam = circle_point(theta);
    let grid = spec.grid();
    let tail = spec.budget - spec.budget / 4;
    let rows = exec::map_range(exec, grid.ny, |j| {
        (0..grid.nx)
            .map(|i| {
                let mut w = grid.point(i, j);
                let (mut lo, mut hi) = (Complex64::new(f64::MAX, f64::MAX), Complex64::new(f64::MIN, f64::MIN));
                for k in 0..spec.budget {
                    if w.norm() > spec.escape_radius {
                        return PixelClass::Infinity;
                    }
                    if k >= tail {
                        lo = Complex64::new(lo.re.min(w.re), lo.im.min(w.im));
                        hi = Complex64::new(hi.re.max(w.re), hi.im.max(w.im));
                    }
                    w = lam * w + w * w;
                }
                if (hi - lo).norm() < orbit_diameter {
                    PixelClass::Siegel
                } else {
                    PixelClass::JCandidate
                }
            })
            .collect::<Vec<_>>()
    });
    let combined: Vec<PixelClass> = rows.concat();
    JuliaRaster {
        spec: *spec,
        grid,
        dynamic: combined.clone(),
        region: vec![PixelClass::JCandidate; combined.len()],
        combined,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryAudit {
    pub compared: usize,
    /// Pixels where exactly one of `z`, `1/conj(z)` is in the non-escaping
    /// layer, both classified at the exact point.
    pub mismatched: usize,
    /// Pixels where either side is in the layer.
    pub layer: usize,
    /// Same count when the mirror is read off the nearest raster pixel.
    /// Reflection is far from isometric, so this mixes in resampling of a
    /// thin set and is reported for information only.
    pub nearest_pixel_mismatched: usize,
    pub nearest_pixel_compared: usize,
}

impl SymmetryAudit {
    pub fn disagreement(&self) -> f64 {
        self.mismatched as f64 / self.compared.max(1) as f64
    }

    pub fn layer_disagreement(&self) -> f64 {
        self.mismatched as f64 / self.layer.max(1) as f64
    }

    pub fn nearest_pixel_disagreement(&self) -> f64 {
        self.nearest_pixel_mismatched as f64 / self.nearest_pixel_compared.max(1) as f64
    }
}

/// Compares the non-escaping layer of the raw dynamics at each pixel with
/// the layer at the pixel's mirror image `1/conj(z)`.
pub fn symmetry_audit(f: &BlaschkeMap, r: &JuliaRaster, exec: Exec) -> SymmetryAudit {
    let g = r.grid;
    let rows = exec::map_range(exec, g.ny, |j| {
        let mut acc = [0usize; 5];
        for i in 0..g.nx {
            let z = g.point(i, j);
            if z.norm() < 1e-12 {
                continue;
            }
            let x = r.dynamic[j * g.nx + i] == PixelClass::JCandidate;
            let zs = z.conj().inv();
            let y = classify_point(f, zs, &r.spec).0 == PixelClass::JCandidate;
            acc[0] += 1;
            acc[1] += (x != y) as usize;
            acc[2] += (x || y) as usize;
            if let Some((ii, jj)) = g.locate(zs) {
                let yp = r.dynamic[jj * g.nx + ii] == PixelClass::JCandidate;
                acc[3] += (x != yp) as usize;
                acc[4] += 1;
            }
        }
        acc
    });
    let mut t = [0usize; 5];
    for a in rows {
        for k in 0..5 {
            t[k] += a[k];
        }
    }
    SymmetryAudit {
        compared: t[0],
        mismatched: t[1],
        layer: t[2],
        nearest_pixel_mismatched: t[3],
        nearest_pixel_compared: t[4],
    }
}

/// Pulled-back piece scale at one sampled point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensitySample {
    pub z: Complex64,
    /// First `k` with `f^k(z)` in `P_n` or its mirror.
    pub entry: usize,
    /// `|(f^k)'(z)|`
    pub expansion: f64,
    /// `diam P_n / |(f^k)'(z)|`
    pub radius: f64,
    pub radius_px: f64,
    /// Share of non-`J` pixels in the ball.
    pub fraction: f64,
    /// Pullback steps whose region reaches the critical point 1.
    pub critical_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub n: usize,
    pub samples: Vec<DensitySample>,
    pub min_fraction: f64,
    pub mean_fraction: f64,
    pub skipped_no_entry: usize,
    pub skipped_small: usize,
    pub skipped_edge: usize,
}

/// Minimum ball radius in pixels for a meaningful fraction.
pub const MIN_BALL_PX: f64 = 8.0;

impl PuzzlePiece {
    /// Membership in `Q_n = P_n u P_n'`, including the shared circle arc.
    pub fn in_q(&self, w: Complex64) -> bool {
        if (w.norm() - 1.0).abs() < 1e-12 {
            let (a, b) = self.trace();
            let mid = 0.5 * (a + b);
            let t = mid + (super::blaschke::turns(w) - mid + 0.5).rem_euclid(1.0) - 0.5;
            return t >= a && t <= b;
        }
        self.contains_symmetric(w)
    }
}

/// Fraction of pixels in the disc of radius `r` about `z` that are not
/// `J`-candidates. `None` when the disc leaves the raster.
pub fn ball_fraction(raster: &JuliaRaster, z: Complex64, r: f64) -> Option<f64> {
    let g = raster.grid;
    let (ci, cj) = g.locate(z)?;
    let rp = r / g.h;
    let reach = rp.ceil() as i64;
    if ci as i64 - reach < 0 || cj as i64 - reach < 0 || ci as i64 + reach >= g.nx as i64 || cj as i64 + reach >= g.ny as i64 {
        return None;
    }
    let (mut total, mut empty) = (0usize, 0usize);
    for dj in -reach..=reach {
        for di in -reach..=reach {
            let i = (ci as i64 + di) as usize;
            let j = (cj as i64 + dj) as usize;
            if (g.point(i, j) - z).norm() > r {
                continue;
            }
            total += 1;
            if raster.at(i, j) != PixelClass::JCandidate {
                empty += 1;
            }
        }
    }
    Some(empty as f64 / total.max(1) as f64)
}

enum Probe {
    Ok(DensitySample),
    NoEntry,
    Small,
    Edge,
}

fn probe_point(f: &BlaschkeMap, raster: &JuliaRaster, piece: &PuzzlePiece, z: Complex64, budget: usize) -> Probe {
    let mut orbit = vec![z];
    let mut logd = vec![0.0f64];
    let mut w = z;
    let mut entry = None;
    for k in 0..=budget {
        if piece.in_q(w) {
            entry = Some(k);
            break;
        }
        if k == budget {
            break;
        }
        let d = f.deriv(w).norm();
        w = f.eval(w);
        logd.push(logd[k] + d.ln());
        orbit.push(w);
    }
    let Some(k) = entry else {
        return Probe::NoEntry;
    };
    let expansion = logd[k].exp();
    let radius = piece.diameter / expansion;
    let radius_px = radius / raster.grid.h;
    if radius_px < MIN_BALL_PX {
        return Probe::Small;
    }
    let Some(fraction) = ball_fraction(raster, z, radius) else {
        return Probe::Edge;
    };
    Probe::Ok(DensitySample {
        z,
        entry: k,
        expansion,
        radius,
        radius_px,
        fraction,
        critical_hits: critical_hits(f, piece, &orbit, &logd, k),
    })
}

/// Counts `j` in `1..=k` for which the pullback of `Q_n` along the orbit
/// reaches 1: `f^j(1)` lies in `Q_n` and the segment from `z_{k-j}` to 1
/// stays in `f^{-j}(Q_n)`. Steps where 1 is far outside the expected
/// size of the pullback are skipped.
fn critical_hits(f: &BlaschkeMap, piece: &PuzzlePiece, orbit: &[Complex64], logd: &[f64], k: usize) -> usize {
    let one = Complex64::new(1.0, 0.0);
    let mut img = one;
    let mut hits = 0;
    for j in 1..=k {
        img = f.eval(img);
        let x = orbit[k - j];
        let scale = piece.diameter * 2.0 / (logd[k] - logd[k - j]).exp();
        if (x - one).norm() > 10.0 * scale || !piece.in_q(img) {
            continue;
        }
        let inside = (1..=32).all(|s| {
            let y = x + (one - x) * (s as f64 / 32.0);
            piece.in_q(f.iterate(y, j as u64))
        });
        if inside {
            hits += 1;
        }
    }
    hits
}

/// Samples `J`-candidate pixels and measures empty space at the scale of
/// the pulled-back piece `Q_n(z)`.
pub fn density_probe(f: &BlaschkeMap, raster: &JuliaRaster, piece: &PuzzlePiece, samples: usize, seed: u64, exec: Exec) -> Result<DensityReport> {
    let g = raster.grid;
    let mut cands: Vec<usize> = (0..g.len()).filter(|&k| raster.combined[k] == PixelClass::JCandidate).collect();
    if cands.is_empty() {
        return Err(LabError::NotFound("no J-candidate pixels".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cands.shuffle(&mut rng);
    let mut rep = DensityReport {
        n: piece.n,
        samples: Vec::new(),
        min_fraction: f64::NAN,
        mean_fraction: f64::NAN,
        skipped_no_entry: 0,
        skipped_small: 0,
        skipped_edge: 0,
    };
    for chunk in cands.chunks(256) {
        let res = exec::map(exec, chunk, |&k| {
            let z = g.point(k % g.nx, k / g.nx);
            probe_point(f, raster, piece, z, raster.spec.budget)
        });
        for r in res {
            if rep.samples.len() == samples {
                break;
            }
            match r {
                Probe::Ok(s) => rep.samples.push(s),
                Probe::NoEntry => rep.skipped_no_entry += 1,
                Probe::Small => rep.skipped_small += 1,
                Probe::Edge => rep.skipped_edge += 1,
            }
        }
        if rep.samples.len() == samples {
            break;
        }
    }
    if rep.samples.len() < samples {
        return Err(LabError::Resolution(format!(
            "only {} of {samples} samples have balls of at least {MIN_BALL_PX} pixels",
            rep.samples.len()
        )));
    }
    summarize(&mut rep);
    Ok(rep)
}

fn summarize(rep: &mut DensityReport) {
    let fr: Vec<f64> = rep.samples.iter().map(|s| s.fraction).collect();
    rep.min_fraction = fr.iter().copied().fold(f64::INFINITY, f64::min);
    rep.mean_fraction = fr.iter().sum::<f64>() / fr.len().max(1) as f64;
}

/// Re-measures the same sample balls on another raster of the same region.
pub fn remeasure(report: &DensityReport, raster: &JuliaRaster) -> Result<DensityReport> {
    let mut out = report.clone();
    for s in out.samples.iter_mut() {
        s.fraction = ball_fraction(raster, s.z, s.radius)
            .ok_or_else(|| LabError::Resolution("sample ball leaves the raster".into()))?;
        s.radius_px = s.radius / raster.grid.h;
    }
    summarize(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::siegel::blaschke::golden;

    #[test]
    fn trivial_classifications() {
        let f = golden();
        let spec = RasterSpec::default();
        assert_eq!(classify_point(&f, Complex64::new(3.0, 0.0), &spec).2, PixelClass::Zero);
        let s5 = RasterSpec { budget: 5, ..spec };
        assert_eq!(classify_point(&f, Complex64::new(10.0, 0.0), &s5).2, PixelClass::Infinity);
        assert_eq!(classify_point(&f, Complex64::new(0.2, 0.1), &spec).2, PixelClass::Disc);
    }

    #[test]
    fn ball_in_disc_is_empty() {
        let f = golden();
        let spec = RasterSpec {
            resolution: 128,
            budget: 200,
            ..RasterSpec::default()
        };
        let r = render(&f, &spec, Exec::Parallel);
        assert_eq!(ball_fraction(&r, Complex64::new(0.0, 0.0), 0.5), Some(1.0));
        assert_eq!(ball_fraction(&r, Complex64::new(2.9, 0.0), 0.5), None);
    }

    #[test]
    fn render_is_deterministic_across_modes() {
        let f = golden();
        let spec = RasterSpec {
            resolution: 64,
            budget: 300,
            ..RasterSpec::default()
        };
        let a = render(&f, &spec, Exec::Parallel);
        let b = render(&f, &spec, Exec::Sequential);
        assert_eq!(a, b);
        assert!(a.count(PixelClass::Drop) > 0);
    }

    #[test]
    fn quadratic_has_a_siegel_region() {
        let gold = (5f64.sqrt() - 1.0) / 2.0;
        let spec = RasterSpec {
            half_width: 1.5,
            resolution: 64,
            budget: 400,
            ..RasterSpec::default()
        };
        let r = render_quadratic(gold, &spec, 1.0, Exec::Parallel);
        let g = r.grid;
        let (i, j) = g.locate(Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(r.at(i, j), PixelClass::Siegel);
        assert_eq!(r.at(0, 0), PixelClass::Infinity);
    }
}
