//! Puzzle pieces `P_n` on local rasters.
//!
//! `P_n` is the component of `f^{-q_n}(P_{n-1})` whose closure contains the
//! circle arc `[f^{-q_n}(1), 1]`. Membership of a pixel is decided forward
//! (`f^{q_n}(z)` looked up in `P_{n-1}`) and the component is found by flood
//! fill from a point just outside the arc. Inside the circle trace the
//! piece is bounded by the unit circle itself, so lookups near the trace
//! use `|w| > 1` exactly; this keeps the cube-root corner at 1 sharp.

use super::blaschke::{circle_point, turns, BlaschkeMap};
use super::curves::{convex_hull, piece_zero, CurveConfig, PieceZero};
use crate::circle_map::{self, closest_returns, CriticalOrbit};
use crate::exec::{self, Exec};
use crate::{Complex64, LabError, Result};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::PI;

const TAU: f64 = 2.0 * PI;

/// Pixel grid; pixel `(i, j)` is centered at `origin + h (i + i j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: Complex64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    /// Grid covering `[lo, hi]` with `long` pixels along the longer side.
    pub fn covering(lo: Complex64, hi: Complex64, long: usize) -> Grid {
        let w = (hi.re - lo.re).max(1e-300);
        let ht = (hi.im - lo.im).max(1e-300);
        let h = w.max(ht) / long as f64;
        let nx = (w / h).ceil() as usize + 1;
        let ny = (ht / h).ceil() as usize + 1;
        Grid {
            origin: lo,
            h,
            nx,
            ny,
        }
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        self.origin + Complex64::new(i as f64 * self.h, j as f64 * self.h)
    }

    #[inline]
    pub fn locate(&self, z: Complex64) -> Option<(usize, usize)> {
        let x = ((z.re - self.origin.re) / self.h).round();
        let y = ((z.im - self.origin.im) / self.h).round();
        if x >= 0.0 && y >= 0.0 && (x as usize) < self.nx && (y as usize) < self.ny {
            Some((x as usize, y as usize))
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mask {
    pub grid: Option<Grid>,
    pub bits: Vec<bool>,
}

impl Mask {
    fn new(grid: Grid, bits: Vec<bool>) -> Mask {
        Mask {
            grid: Some(grid),
            bits,
        }
    }

    fn g(&self) -> &Grid {
        self.grid.as_ref().expect("empty mask")
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[j * self.g().nx + i]
    }

    pub fn lookup(&self, z: Complex64) -> bool {
        match self.g().locate(z) {
            Some((i, j)) => self.get(i, j),
            None => false,
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn touches_border(&self) -> bool {
        let g = self.g();
        (0..g.nx).any(|i| self.get(i, 0) || self.get(i, g.ny - 1))
            || (0..g.ny).any(|j| self.get(0, j) || self.get(g.nx - 1, j))
    }

    /// Bounding box of set pixels, in the plane.
    pub fn bbox(&self) -> Option<(Complex64, Complex64)> {
        let g = self.g();
        let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
        for j in 0..g.ny {
            for i in 0..g.nx {
                if self.get(i, j) {
                    i0 = i0.min(i);
                    i1 = i1.max(i);
                    j0 = j0.min(j);
                    j1 = j1.max(j);
                }
            }
        }
        if i0 == usize::MAX {
            return None;
        }
        Some((g.point(i0, j0), g.point(i1, j1)))
    }

    /// Centers of set pixels with an unset 4-neighbour.
    pub fn edge_points(&self) -> Vec<Complex64> {
        let g = self.g();
        let mut out = Vec::new();
        for j in 0..g.ny {
            for i in 0..g.nx {
                if !self.get(i, j) {
                    continue;
                }
                let edge = i == 0
                    || j == 0
                    || i + 1 == g.nx
                    || j + 1 == g.ny
                    || !self.get(i - 1, j)
                    || !self.get(i + 1, j)
                    || !self.get(i, j - 1)
                    || !self.get(i, j + 1);
                if edge {
                    out.push(g.point(i, j));
                }
            }
        }
        out
    }
}

/// Even-odd fill of a closed polygon, one scanline per pixel row.
pub fn rasterize_polygon(poly: &[Complex64], grid: Grid) -> Mask {
    let n = poly.len();
    let rows = exec::map_range(Exec::Parallel, grid.ny, |j| {
        let y = grid.origin.im + j as f64 * grid.h;
        let mut xs = Vec::new();
        for k in 0..n {
            let a = poly[k];
            let b = poly[(k + 1) % n];
            if (a.im <= y) != (b.im <= y) {
                xs.push(a.re + (y - a.im) / (b.im - a.im) * (b.re - a.re));
            }
        }
        xs.sort_by(f64::total_cmp);
        let mut row = vec![false; grid.nx];
        for pair in xs.chunks_exact(2) {
            let lo = ((pair[0] - grid.origin.re) / grid.h).ceil().max(0.0) as usize;
            let hi = ((pair[1] - grid.origin.re) / grid.h).floor();
            if hi < 0.0 {
                continue;
            }
            let hi = (hi as usize).min(grid.nx - 1);
            for cell in row.iter_mut().take(hi + 1).skip(lo) {
                *cell = true;
            }
        }
        row
    });
    Mask::new(grid, rows.concat())
}

/// Euclidean distance (in pixels) from each set pixel to the nearest unset
/// one, by the separable lower-envelope transform; pixels beyond the grid
/// count as unset.
pub fn distance_transform(mask: &Mask) -> Vec<f64> {
    let g = *mask.g();
    let (nx, ny) = (g.nx + 2, g.ny + 2);
    let inf = 1e20;
    let mut d = vec![0.0f64; nx * ny];
    for j in 0..g.ny {
        for i in 0..g.nx {
            if mask.get(i, j) {
                d[(j + 1) * nx + i + 1] = inf;
            }
        }
    }
    let mut buf = vec![0.0; nx.max(ny)];
    for j in 0..ny {
        for i in 0..nx {
            buf[i] = d[j * nx + i];
        }
        let out = edt_1d(&buf[..nx]);
        d[j * nx..(j + 1) * nx].copy_from_slice(&out);
    }
    for i in 0..nx {
        for j in 0..ny {
            buf[j] = d[j * nx + i];
        }
        let out = edt_1d(&buf[..ny]);
        for j in 0..ny {
            d[j * nx + i] = out[j];
        }
    }
    let mut res = vec![0.0; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            res[j * g.nx + i] = d[(j + 1) * nx + i + 1].sqrt();
        }
    }
    res
}

/// Squared distance transform of a sampled function (Felzenszwalb and
/// Huttenlocher).
fn edt_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let meet = |q: usize, p: usize| ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
    for q in 1..n {
        let mut s = meet(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = meet(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut out = vec![0.0; n];
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        *o = (q as f64 - p as f64).powi(2) + f[p];
    }
    out
}

/// Radius of the largest disc inside the set, from the distance transform.
pub fn inscribed_radius(mask: &Mask) -> f64 {
    let d = distance_transform(mask);
    let m = d.iter().copied().fold(0.0, f64::max);
    ((m - 0.5) * mask.g().h).max(0.0)
}

/// Outer boundary of the 4-connected set containing the lowest set pixel,
/// as the closed polyline through midpoints of its boundary edges.
pub fn outer_boundary(mask: &Mask) -> Vec<Complex64> {
    let g = *mask.g();
    let inside = |x: i64, y: i64| x >= 0 && y >= 0 && (x as usize) < g.nx && (y as usize) < g.ny && mask.get(x as usize, y as usize);
    let start = (0..g.ny)
        .flat_map(|j| (0..g.nx).map(move |i| (i, j)))
        .find(|&(i, j)| mask.get(i, j));
    let Some((si, sj)) = start else {
        return Vec::new();
    };
    // walk along pixel edges with the set on the left
    let (sx, sy) = (si as i64, sj as i64);
    let (mut x, mut y, mut dx, mut dy) = (sx, sy, 1i64, 0i64);
    let corner = |x: i64, y: i64| {
        g.origin + Complex64::new((x as f64 - 0.5) * g.h, (y as f64 - 0.5) * g.h)
    };
    let mut out = Vec::new();
    let limit = 4 * (g.nx + 2) * (g.ny + 2);
    for _ in 0..limit {
        out.push((corner(x, y) + corner(x + dx, y + dy)) * 0.5);
        x += dx;
        y += dy;
        let (lx, ly) = (-dy, dx);
        let fl = inside(x + ((dx + lx - 1) / 2), y + ((dy + ly - 1) / 2));
        let fr = inside(x + ((dx - lx - 1) / 2), y + ((dy - ly - 1) / 2));
        if !fl {
            let t = dx;
            dx = -dy;
            dy = t;
        } else if fr {
            let t = dx;
            dx = dy;
            dy = -t;
        }
        if x == sx && y == sy && dx == 1 && dy == 0 {
            break;
        }
    }
    out
}

/// True when no two non-adjacent edges of the closed polyline meet.
pub fn is_simple(poly: &[Complex64]) -> bool {
    let n = poly.len();
    if n < 4 {
        return n == 3;
    }
    let seg = |k: usize| (poly[k], poly[(k + 1) % n]);
    let orient = |a: Complex64, b: Complex64, c: Complex64| {
        let v = (b - a).re * (c - a).im - (b - a).im * (c - a).re;
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    };
    // bucket segments on a coarse grid to keep the check near-linear
    let (mut lo, mut hi) = (poly[0], poly[0]);
    for z in poly {
        lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let cells = ((n as f64).sqrt().ceil() as usize).max(1);
    let cw = ((hi.re - lo.re).max(hi.im - lo.im) / cells as f64).max(1e-300);
    let cell_of = |z: Complex64| {
        (
            (((z.re - lo.re) / cw) as usize).min(cells - 1),
            (((z.im - lo.im) / cw) as usize).min(cells - 1),
        )
    };
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    for k in 0..n {
        let (a, b) = seg(k);
        let (i0, j0) = cell_of(Complex64::new(a.re.min(b.re), a.im.min(b.im)));
        let (i1, j1) = cell_of(Complex64::new(a.re.max(b.re), a.im.max(b.im)));
        for j in j0..=j1 {
            for i in i0..=i1 {
                buckets[j * cells + i].push(k);
            }
        }
    }
    for bucket in &buckets {
        for (x, &k) in bucket.iter().enumerate() {
            for &l in &bucket[x + 1..] {
                if (k + 1) % n == l || (l + 1) % n == k || k == l {
                    continue;
                }
                let (a, b) = seg(k);
                let (c, d) = seg(l);
                let o1 = orient(a, b, c);
                let o2 = orient(a, b, d);
                let o3 = orient(c, d, a);
                let o4 = orient(c, d, b);
                if o1 != o2 && o3 != o4 && o1 * o2 <= 0 && o3 * o4 <= 0 {
                    return false;
                }
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PuzzleConfig {
    pub curves: CurveConfig,
    /// Pixels along the longer side of the `P_0` raster.
    pub base_resolution: usize,
    /// Pixels along the longer side of each `P_n` raster.
    pub resolution: usize,
    /// Coarse pass used to locate each piece.
    pub coarse_resolution: usize,
    /// Pixels around the critical point 1 kept out of the flood fill, so
    /// the fill cannot leak between the corners that meet there.
    pub apex_guard: f64,
    /// Width of the band around the trace where membership is `|w| > 1`.
    pub band: f64,
}

impl Default for PuzzleConfig {
    fn default() -> Self {
        PuzzleConfig {
            curves: CurveConfig::default(),
            base_resolution: 2048,
            resolution: 1024,
            coarse_resolution: 256,
            apex_guard: 4.0,
            band: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuzzlePiece {
    pub n: usize,
    pub q: u64,
    pub p: u64,
    /// Far end of the circle trace, `F^{-q_n}(0) + p_n` on the lift.
    pub trace_end: f64,
    /// `|f^{q_n}(e^{2 pi i trace_end}) - 1|`
    pub trace_residual: f64,
    /// Share of points just outside the trace arc that lie in the piece.
    pub trace_coverage: f64,
    /// Share of points just beyond the trace ends that lie in the piece.
    pub trace_spill: f64,
    pub diameter: f64,
    pub inscribed_radius: f64,
    pub pixels: usize,
    pub boundary: Vec<Complex64>,
    #[serde(skip)]
    pub mask: Mask,
    band: f64,
}

impl PuzzlePiece {
    /// Trace as a sorted pair on the lift; one end is 0.
    pub fn trace(&self) -> (f64, f64) {
        (self.trace_end.min(0.0), self.trace_end.max(0.0))
    }

    /// Euclidean length of the chord `[f^{-q_n}(1), 1]`.
    pub fn trace_chord(&self) -> f64 {
        (circle_point(self.trace_end) - 1.0).norm()
    }

    pub fn trace_length(&self) -> f64 {
        TAU * self.trace_end.abs()
    }

    pub fn grid(&self) -> Grid {
        *self.mask.g()
    }

    pub fn contains(&self, w: Complex64) -> bool {
        let r = w.norm();
        if (r - 1.0).abs() < self.band {
            let (a, b) = self.trace();
            let mid = 0.5 * (a + b);
            let t = mid + (turns(w) - mid + 0.5).rem_euclid(1.0) - 0.5;
            let m = 2.0 * self.band / TAU;
            if t > a + m && t < b - m {
                return r > 1.0;
            }
        }
        self.mask.lookup(w)
    }

    /// Membership in `P_n` or its mirror image in the circle.
    pub fn contains_symmetric(&self, w: Complex64) -> bool {
        if w.norm() >= 1.0 {
            self.contains(w)
        } else {
            w.norm() > 0.0 && self.contains(w.conj().inv())
        }
    }

    fn audit_trace(&mut self, f: &BlaschkeMap) {
        let h = self.grid().h;
        let e = circle_point(self.trace_end);
        self.trace_residual = (f.iterate(e, self.q) - 1.0).norm();
        let (a, b) = self.trace();
        let margin = 8.0 * h / TAU;
        let inner = |s: f64| circle_point(s) * (1.0 + 2.0 * h);
        let k = 200;
        let hits = (0..k)
            .filter(|&i| {
                let s = a + margin + (b - a - 2.0 * margin) * (i as f64 + 0.5) / k as f64;
                self.mask.lookup(inner(s))
            })
            .count();
        self.trace_coverage = hits as f64 / k as f64;
        let spill = [a - margin, b + margin]
            .iter()
            .flat_map(|&s| [1.0 + 2.0 * h, 1.0 + 4.0 * h].map(|r| circle_point(s) * r))
            .filter(|&z| self.mask.lookup(z))
            .count();
        self.trace_spill = spill as f64 / 4.0;
    }
}

fn finish_piece(f: &BlaschkeMap, n: usize, q: u64, p: u64, trace_end: f64, mask: Mask, band: f64, extra: &[Complex64]) -> PuzzlePiece {
    let mut pts = mask.edge_points();
    pts.extend_from_slice(extra);
    let hull = convex_hull(&pts);
    let mut diameter: f64 = 0.0;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            diameter = diameter.max((hull[i] - hull[j]).norm());
        }
    }
    let boundary = outer_boundary(&mask);
    let mut piece = PuzzlePiece {
        n,
        q,
        p,
        trace_end,
        trace_residual: 0.0,
        trace_coverage: 0.0,
        trace_spill: 0.0,
        diameter,
        inscribed_radius: inscribed_radius(&mask),
        pixels: mask.count(),
        boundary,
        band: band * mask.g().h,
        mask,
    };
    piece.audit_trace(f);
    piece
}

/// `P_0` as a raster piece.
pub fn raster_zero(f: &BlaschkeMap, zero: &PieceZero, cfg: &PuzzleConfig) -> PuzzlePiece {
    let hull = convex_hull(&zero.polygon);
    let (mut lo, mut hi) = (hull[0], hull[0]);
    for z in &hull {
        lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let pad = Complex64::new(1.0, 1.0) * 0.02 * (hi - lo).norm();
    let grid = Grid::covering(lo - pad, hi + pad, cfg.base_resolution);
    let mask = rasterize_polygon(&zero.polygon, grid);
    let mut piece = finish_piece(f, 0, 1, 0, zero.u_turns - 1.0, mask, cfg.band, &zero.polygon);
    piece.boundary = zero.polygon.clone();
    piece
}

/// Component of `{z : f^q(z) in prev}` containing `seed`, with a guard
/// disc around 1 removed from the fill.
fn component(f: &BlaschkeMap, prev: &PuzzlePiece, q: u64, grid: Grid, seed: Complex64, guard: f64, exec: Exec) -> Option<Mask> {
    let rows = exec::map_range(exec, grid.ny, |j| {
        (0..grid.nx)
            .map(|i| {
                let z = grid.point(i, j);
                let mut w = z;
                for _ in 0..q {
                    w = f.eval(w);
                    if !(w.norm() < 1e6) {
                        return false;
                    }
                }
                prev.contains(w)
            })
            .collect::<Vec<bool>>()
    });
    let set = rows.concat();
    let (si, sj) = grid.locate(seed)?;
    if !set[sj * grid.nx + si] {
        return None;
    }
    let one = Complex64::new(1.0, 0.0);
    let guard2 = (guard * grid.h).powi(2);
    let blocked = |i: usize, j: usize| (grid.point(i, j) - one).norm_sqr() < guard2;
    let mut bits = vec![false; grid.len()];
    let mut queue = VecDeque::new();
    bits[sj * grid.nx + si] = true;
    queue.push_back((si, sj));
    while let Some((i, j)) = queue.pop_front() {
        let mut nb = [None; 4];
        if i > 0 {
            nb[0] = Some((i - 1, j));
        }
        if i + 1 < grid.nx {
            nb[1] = Some((i + 1, j));
        }
        if j > 0 {
            nb[2] = Some((i, j - 1));
        }
        if j + 1 < grid.ny {
            nb[3] = Some((i, j + 1));
        }
        for (a, b) in nb.into_iter().flatten() {
            let k = b * grid.nx + a;
            if set[k] && !bits[k] && !blocked(a, b) {
                bits[k] = true;
                queue.push_back((a, b));
            }
        }
    }
    Some(Mask::new(grid, bits))
}

fn square_grid(center: Complex64, half: f64, long: usize) -> Grid {
    let d = Complex64::new(half, half);
    Grid::covering(center - d, center + d, long)
}

/// `P_n` from `P_{n-1}`.
pub fn pull_piece(f: &BlaschkeMap, prev: &PuzzlePiece, orbit: &CriticalOrbit, n: usize, cfg: &PuzzleConfig, exec: Exec) -> Result<PuzzlePiece> {
    if n == 0 || n > orbit.max_level() {
        return Err(LabError::InsufficientDepth(format!("level {n} needs more closest returns")));
    }
    let (q, p) = (orbit.q[n], orbit.p[n]);
    let g = f.circle();
    let mut x = 0.0;
    for _ in 0..q {
        x = circle_map::lift_inverse(&g, x);
    }
    let trace_end = x + p as f64;
    if (trace_end < 0.0) == (prev.trace_end < 0.0) {
        return Err(LabError::Precondition(format!("trace of P_{n} on the same side as P_{}", n - 1)));
    }
    let (a, b) = prev.trace();
    let delta = orbit.delta[n];
    if !(delta > a && delta < b) {
        return Err(LabError::Precondition(format!("f^q_{n}(1) outside the trace of P_{}", n - 1)));
    }
    let chord = (circle_point(trace_end) - 1.0).norm();
    let mid_dir = circle_point(0.5 * trace_end);
    let ratio = (prev.diameter / prev.trace_chord()).max(1.0);
    let mut half = 0.8 * ratio * chord;
    let mut center = mid_dir * (1.0 + 0.3 * chord);

    let try_seed = |grid: &Grid| -> Option<Mask> {
        for s in [0.05, 0.02, 0.1, 0.2] {
            let seed = mid_dir * (1.0 + s * chord);
            if let Some(m) = component(f, prev, q, *grid, seed, cfg.apex_guard, exec) {
                return Some(m);
            }
        }
        None
    };

    let mut coarse = None;
    for _ in 0..10 {
        let grid = square_grid(center, half, cfg.coarse_resolution);
        match try_seed(&grid) {
            Some(m) if !m.touches_border() => {
                coarse = Some(m);
                break;
            }
            Some(_) => half *= 1.6,
            None => return Err(LabError::NotFound(format!("no seed pixel for P_{n}"))),
        }
    }
    let coarse = coarse.ok_or_else(|| LabError::DomainExhausted(format!("P_{n} outgrew its window")))?;
    let (lo, hi) = coarse.bbox().expect("seeded component");
    let h0 = coarse.g().h;
    let mut pad = 0.05 * (hi - lo).norm() + 3.0 * h0;
    center = (lo + hi) * 0.5;
    let mut span = Complex64::new((hi.re - lo.re) * 0.5, (hi.im - lo.im) * 0.5);
    for _ in 0..6 {
        let d = span + Complex64::new(pad, pad);
        let grid = Grid::covering(center - d, center + d, cfg.resolution);
        let mask = try_seed(&grid).ok_or_else(|| LabError::NotFound(format!("no seed pixel for P_{n}")))?;
        if mask.touches_border() {
            span *= 1.3;
            pad *= 1.3;
            continue;
        }
        let ends = [Complex64::new(1.0, 0.0), circle_point(trace_end)];
        let piece = finish_piece(f, n, q, p, trace_end, mask, cfg.band, &ends);
        if !is_simple(&piece.boundary) {
            return Err(LabError::SelfIntersection(format!("boundary of P_{n}")));
        }
        return Ok(piece);
    }
    Err(LabError::DomainExhausted(format!("P_{n} outgrew its window")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Puzzle {
    pub map: BlaschkeMap,
    pub zero: PieceZero,
    pub pieces: Vec<PuzzlePiece>,
}

/// `P_0 .. P_max_n` for `f`.
pub fn build_puzzle(f: &BlaschkeMap, max_n: usize, cfg: &PuzzleConfig, exec: Exec) -> Result<Puzzle> {
    let zero = piece_zero(f, &cfg.curves)?;
    let orbit = closest_returns(&f.circle(), max_n + 3, 1e-15)?;
    let mut pieces = vec![raster_zero(f, &zero, cfg)];
    for n in 1..=max_n {
        let next = pull_piece(f, pieces.last().unwrap(), &orbit, n, cfg, exec)?;
        pieces.push(next);
    }
    Ok(Puzzle {
        map: *f,
        zero,
        pieces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(side: f64) -> Vec<Complex64> {
        vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(side, 0.0),
            Complex64::new(side, side),
            Complex64::new(0.0, side),
        ]
    }

    #[test]
    fn unit_square_inscribed_radius() {
        let grid = Grid::covering(Complex64::new(-0.1, -0.1), Complex64::new(1.1, 1.1), 480);
        let mask = rasterize_polygon(&square(1.0), grid);
        let r = inscribed_radius(&mask);
        assert!((r - 0.5).abs() < 2.0 * grid.h, "{r}");
        let area = mask.count() as f64 * grid.h * grid.h;
        assert!((area - 1.0).abs() < 0.02);
    }

    #[test]
    fn edt_matches_brute_force() {
        let grid = Grid::covering(Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0), 24);
        let poly = vec![
            Complex64::new(0.1, 0.1),
            Complex64::new(0.9, 0.2),
            Complex64::new(0.5, 0.95),
        ];
        let mask = rasterize_polygon(&poly, grid);
        let d = distance_transform(&mask);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                if !mask.get(i, j) {
                    continue;
                }
                let mut best = f64::INFINITY;
                for jj in -1..=grid.ny as i64 {
                    for ii in -1..=grid.nx as i64 {
                        let out = ii < 0 || jj < 0 || ii >= grid.nx as i64 || jj >= grid.ny as i64 || !mask.get(ii as usize, jj as usize);
                        if out {
                            best = best.min((((ii - i as i64).pow(2) + (jj - j as i64).pow(2)) as f64).sqrt());
                        }
                    }
                }
                assert!((d[j * grid.nx + i] - best).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn boundary_of_disc_is_simple() {
        let poly: Vec<Complex64> = (0..200).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / 200.0)).collect();
        let grid = Grid::covering(Complex64::new(-1.2, -1.2), Complex64::new(1.2, 1.2), 100);
        let mask = rasterize_polygon(&poly, grid);
        let b = outer_boundary(&mask);
        assert!(is_simple(&b));
        let len: f64 = (0..b.len()).map(|k| (b[(k + 1) % b.len()] - b[k]).norm()).sum();
        // midpoint polyline of a staircase: between the chord length and 4/pi of it
        assert!(len > TAU * 0.95 && len < TAU * 1.3, "{len}");
        let mut bow = poly.clone();
        bow.swap(10, 100);
        assert!(!is_simple(&bow));
    }

    #[test]
    fn pinched_pair_stays_separate() {
        // two pixels touching at a corner form two components
        let grid = Grid {
            origin: Complex64::new(0.0, 0.0),
            h: 1.0,
            nx: 4,
            ny: 4,
        };
        let mut bits = vec![false; 16];
        bits[4 + 1] = true;
        bits[2 * 4 + 2] = true;
        let b = outer_boundary(&Mask::new(grid, bits));
        assert_eq!(b.len(), 4);
    }
}
