//! Backward-orbit instrumentation: the decomposition `f^p = psi_n o f`,
//! classification of returns of a pulled-back point, the linear-growth and
//! cubic envelope fits, and the saddle-node multiplier probe.
//!
//! Complex preimages are found by path continuation. A point `z` is joined to
//! a real reference point by a straight path; along it every inverse branch
//! step is re-solved from the previous solution and rejected if it moves more
//! than half the distance to the nearest critical point.

use crate::circle_map::{closest_returns, inverse_branch, CriticalCircleMap, CriticalOrbit, Lift};
use crate::exec::{self, Exec};
use crate::geometry::{angle_to_interval, GeodesicNeighborhood, Interval};
use crate::{Complex64, LabError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_EPS: f64 = 0.2;
pub const DEFAULT_K_GOOD: f64 = 50.0;
pub const DEFAULT_CUTOFF_B: f64 = 5.0;
/// Forward check: `|f(z_{-i-1}) - z_{-i}|` relative to `|I_1|`.
pub const FORWARD_TOL: f64 = 1e-9;
const NEWTON_TOL: f64 = 1e-13;
const MIN_PATH_STEP: f64 = 1e-9;

/// `f^p = psi_n o f` with `p = q_{n+1}`; holds the real orbit of `I_n`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub map: CriticalCircleMap,
    pub n: usize,
    pub p: usize,
    pub orbit: CriticalOrbit,
    /// `j[k] = F^k(I_n) - s_k` for `k = 0..=p`, reduced near the origin.
    pub j: Vec<Interval>,
    /// Integer translation applied after step `k -> k+1`.
    shifts: Vec<f64>,
    reference: Vec<f64>,
}

/// Points `z_k` of a pulled-back chain for `k = from..=p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub from: usize,
    pub points: Vec<Complex64>,
}

impl Chain {
    pub fn at(&self, k: usize) -> Complex64 {
        self.points[k - self.from]
    }
}

impl Decomposition {
    pub fn new(f: &CriticalCircleMap, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LabError::Domain("level must be >= 1".into()));
        }
        let orbit = closest_returns(f, n + 2, 1e-300)?;
        if orbit.max_level() < n + 1 {
            return Err(LabError::InsufficientDepth(format!("closest returns stop before level {}", n + 1)));
        }
        let p = orbit.q[n + 1] as usize;
        let dn = orbit.delta[n];
        let (mut a, mut b) = (0.0, dn);
        let mut x = 0.5 * dn;
        let mut j = vec![Interval::new(a, b)];
        let mut reference = vec![x];
        let mut shifts = Vec::with_capacity(p);
        for _ in 0..p {
            a = f.lift(a);
            b = f.lift(b);
            x = f.lift(x);
            let s = (0.5 * (a + b)).round();
            a -= s;
            b -= s;
            x -= s;
            shifts.push(s);
            j.push(Interval::new(a, b));
            reference.push(x);
        }
        Ok(Decomposition {
            map: *f,
            n,
            p,
            orbit,
            j,
            shifts,
            reference,
        })
    }

    pub fn i_n(&self) -> Interval {
        self.j[0]
    }

    /// Preimage chain of `z` (a point near `J_p = f^p(I_n)`) down to level
    /// `from`, continuing the branches of the real orbit.
    pub fn pull_back(&self, z: Complex64, from: usize) -> Result<Chain> {
        let p = self.p;
        let base = Complex64::new(self.reference[p], 0.0);
        let mut cur: Vec<Complex64> = self.reference[from..].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let (mut t, mut dt) = (0.0f64, 1.0f64 / 16.0);
        let mut fail_index = 0;
        while t < 1.0 {
            dt = dt.min(1.0 - t);
            let tn = t + dt;
            let mut next = cur.clone();
            next[p - from] = base + (z - base) * tn;
            let mut ok = true;
            for k in (from..p).rev() {
                let target = next[k + 1 - from] + self.shifts[k];
                let seed = cur[k - from];
                let guard = 0.5 * self.map.critical_distance(seed);
                match inverse_branch(&self.map, target, seed, NEWTON_TOL) {
                    Ok(w) if (w - seed).norm() <= guard => next[k - from] = w,
                    _ => {
                        ok = false;
                        fail_index = p - k;
                        break;
                    }
                }
            }
            if ok {
                cur = next;
                t = tn;
                dt *= 1.5;
            } else {
                dt *= 0.5;
                if dt < MIN_PATH_STEP {
                    return Err(LabError::BranchAmbiguity {
                        index: fail_index,
                        detail: format!("continuation stalled at t = {t:.6}"),
                    });
                }
            }
        }
        Ok(Chain { from, points: cur })
    }

    /// `psi_n^{-1}(z)`, landing near `f(I_n)`.
    pub fn psi_inverse(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.pull_back(z, 1)?.at(1))
    }

    /// Largest `|f(z_k) - s_k - z_{k+1}|` along a chain.
    pub fn forward_residual(&self, chain: &Chain) -> f64 {
        let mut worst = 0.0f64;
        for k in chain.from..self.p {
            let w = self.map.eval(chain.at(k)) - self.shifts[k];
            worst = worst.max((w - chain.at(k + 1)).norm());
        }
        worst
    }

    /// `D_m = D([f^{q_{m+1}}(0), f^{q_m - q_{m+1}}(0)])` as its diameter.
    pub fn d_interval(&self, m: usize) -> Result<Interval> {
        d_interval(&self.map, &self.orbit, m)
    }
}

pub fn decompose(f: &CriticalCircleMap, n: usize) -> Result<Decomposition> {
    Decomposition::new(f, n)
}

/// Diameter of `D_m`, reduced to the representative adjacent to 0.
pub fn d_interval(f: &CriticalCircleMap, orbit: &CriticalOrbit, m: usize) -> Result<Interval> {
    if m + 1 > orbit.max_level() {
        return Err(LabError::InsufficientDepth(format!("D_{m} needs level {}", m + 1)));
    }
    let a = orbit.delta[m + 1];
    let mut x = orbit.delta[m];
    for _ in 0..orbit.q[m + 1] {
        x = f.lift_inverse(x);
    }
    x -= x.floor();
    if orbit.delta[m] < 0.0 {
        x -= 1.0;
    }
    Ok(Interval::new(a, x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label", rename_all = "kebab-case")]
pub enum EventLabel {
    Stayed,
    Entered,
    EpsJump { good: bool },
    Unclassified,
}

impl EventLabel {
    pub fn name(&self) -> &'static str {
        match self {
            EventLabel::Stayed => "stayed",
            EventLabel::Entered => "entered",
            EventLabel::EpsJump { good: true } => "eps-jump-good",
            EventLabel::EpsJump { good: false } => "eps-jump-bad",
            EventLabel::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnEvent {
    /// Backward time `i` of `z_{-i}`.
    pub i: usize,
    /// Deepest `m` with `J_{-i}` inside the diameter of `D_m`.
    pub level: usize,
    pub label: EventLabel,
    pub angle: f64,
    /// `dist(z_{-i}, J_{-i}) / |I_level|`.
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceOutcome {
    Containment,
    /// Entry point already at a definite angle and distance from `I_n`.
    Bypass,
    GoodJump,
    BadJump,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitTrace {
    pub n: usize,
    pub p: usize,
    pub eps: f64,
    /// `z_0, z_{-1}, ...` as far as the trace went.
    pub z_orbit: Vec<Complex64>,
    /// `J_0, J_{-1}, ..., J_{-(p-1)}`.
    pub j_orbit: Vec<Interval>,
    pub events: Vec<ReturnEvent>,
    pub outcome: TraceOutcome,
    /// Largest forward-check residual relative to `|I_1|`.
    pub forward_residual: f64,
}

/// Reusable state for tracing many points at one level.
#[derive(Debug, Clone)]
pub struct Tracker {
    pub dec: Decomposition,
    pub eps: f64,
    pub k_good: f64,
    /// `D_1..D_n` as diameters, index `m - 1`.
    pub discs: Vec<Interval>,
    /// Classify entry points far from `I_n` at once instead of tracing them.
    pub bypass: bool,
}

impl Tracker {
    pub fn new(f: &CriticalCircleMap, n: usize, eps: f64, k_good: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < PI) {
            return Err(LabError::Domain(format!("eps = {eps} outside (0, pi)")));
        }
        if k_good < 1.0 {
            return Err(LabError::Domain("K_good must be >= 1".into()));
        }
        let dec = Decomposition::new(f, n)?;
        let discs = (1..=n).map(|m| dec.d_interval(m)).collect::<Result<Vec<_>>>()?;
        Ok(Tracker {
            dec,
            eps,
            k_good,
            discs,
            bypass: true,
        })
    }

    pub fn disc(&self, m: usize) -> GeodesicNeighborhood {
        GeodesicNeighborhood::disc(self.discs[m - 1])
    }

    fn deepest_disc_containing_point(&self, z: Complex64) -> usize {
        (1..=self.dec.n).rev().find(|&m| self.disc(m).contains(z)).unwrap_or(0)
    }

    fn deepest_disc_containing_interval(&self, j: &Interval) -> Option<usize> {
        (1..=self.dec.n).rev().find(|&m| self.discs[m - 1].contains_interval(j))
    }

    pub fn trace(&self, z: Complex64) -> Result<OrbitTrace> {
        let dec = &self.dec;
        let p = dec.p;
        let i1 = dec.orbit.len(1);
        let j_orbit: Vec<Interval> = (0..p).map(|i| dec.j[p - i]).collect();
        let i_n = dec.i_n();
        let mut trace = OrbitTrace {
            n: dec.n,
            p,
            eps: self.eps,
            z_orbit: vec![z],
            j_orbit,
            events: Vec::new(),
            outcome: TraceOutcome::Containment,
            forward_residual: 0.0,
        };
        let entry_angle = angle_to_interval(z, &i_n).unwrap_or(0.0);
        let entry_dist = i_n.dist(z);
        if self.bypass && entry_angle > self.eps && entry_dist >= i_n.len() {
            trace.events.push(ReturnEvent {
                i: 0,
                level: dec.n,
                label: EventLabel::EpsJump { good: true },
                angle: entry_angle,
                distance: entry_dist / i_n.len(),
            });
            trace.outcome = TraceOutcome::Bypass;
            return Ok(trace);
        }
        let chain = dec.pull_back(z, 1)?;
        trace.forward_residual = dec.forward_residual(&chain) / i1;
        let j0 = dec.j[p].len();
        let mut m_cur = self.deepest_disc_containing_point(z);
        for i in 1..p {
            let k = p - i;
            let w = chain.at(k);
            trace.z_orbit.push(w);
            let jm = dec.j[k];
            let Some(lvl) = self.deepest_disc_containing_interval(&jm) else {
                continue;
            };
            let angle = angle_to_interval(w, &jm).unwrap_or(0.0);
            let distance = jm.dist(w) / dec.orbit.len(lvl);
            let label = if self.disc(lvl).contains(w) {
                let l = if lvl > m_cur {
                    EventLabel::Entered
                } else {
                    EventLabel::Stayed
                };
                m_cur = m_cur.max(lvl);
                l
            } else if angle > self.eps {
                let ratio = jm.len() / j0;
                EventLabel::EpsJump {
                    good: ratio >= 1.0 / self.k_good && ratio <= self.k_good,
                }
            } else {
                EventLabel::Unclassified
            };
            trace.events.push(ReturnEvent {
                i,
                level: lvl,
                label,
                angle,
                distance,
            });
            match label {
                EventLabel::EpsJump { good } => {
                    trace.outcome = if good {
                        TraceOutcome::GoodJump
                    } else {
                        TraceOutcome::BadJump
                    };
                    break;
                }
                EventLabel::Unclassified => {
                    trace.outcome = TraceOutcome::Unclassified;
                    break;
                }
                _ => {}
            }
        }
        Ok(trace)
    }
}

pub fn trace_backward(f: &CriticalCircleMap, n: usize, z: Complex64, eps: f64) -> Result<OrbitTrace> {
    Tracker::new(f, n, eps, DEFAULT_K_GOOD)?.trace(z)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub traces: usize,
    pub containment: usize,
    pub bypass: usize,
    pub good_jumps: usize,
    pub bad_jumps: usize,
    pub unclassified: usize,
    pub branch_failures: usize,
    /// Largest normalized distance over good-moment jumps.
    pub max_jump_distance: f64,
    pub max_forward_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub samples: Vec<Complex64>,
    pub traces: Vec<std::result::Result<OrbitTrace, String>>,
    pub summary: CampaignSummary,
}

/// Uniform samples of `D_1` in the upper half-plane, by rejection.
pub fn sample_d1_upper(d1: Interval, count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let disc = GeodesicNeighborhood::disc(d1);
    let r = 0.5 * d1.len();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z = Complex64::new(rng.random_range(d1.a..d1.b), rng.random_range(0.0..r));
        if z.im > 0.0 && disc.contains(z) {
            out.push(z);
        }
    }
    out
}

pub fn tracker_campaign(tracker: &Tracker, samples: &[Complex64], exec: Exec) -> Campaign {
    let traces: Vec<_> = exec::map(exec, samples, |z| tracker.trace(*z).map_err(|e| e.to_string()));
    let mut s = CampaignSummary {
        traces: traces.len(),
        ..Default::default()
    };
    for t in &traces {
        let Ok(t) = t else {
            s.branch_failures += 1;
            continue;
        };
        s.max_forward_residual = s.max_forward_residual.max(t.forward_residual);
        match t.outcome {
            TraceOutcome::Containment => s.containment += 1,
            TraceOutcome::Bypass => s.bypass += 1,
            TraceOutcome::GoodJump => s.good_jumps += 1,
            TraceOutcome::BadJump => s.bad_jumps += 1,
            TraceOutcome::Unclassified => s.unclassified += 1,
        }
        if matches!(t.outcome, TraceOutcome::GoodJump | TraceOutcome::Bypass) {
            if let Some(e) = t.events.last() {
                s.max_jump_distance = s.max_jump_distance.max(e.distance);
            }
        }
    }
    Campaign {
        samples: samples.to_vec(),
        traces,
        summary: s,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radii: usize,
    /// Angles over the full circle; only the upper half is computed.
    pub angles: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { radii: 32, angles: 64 }
    }
}

impl GridSpec {
    fn upper_angles(&self) -> Vec<f64> {
        let na = (self.angles / 2).max(1);
        (0..na).map(|k| PI * (k as f64 + 0.5) / na as f64).collect()
    }
}

/// Sampling domain `D_0` for the linear-growth fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleDomain {
    D1,
    /// `D_alpha([f^{q_2}(0), f^{q_1 - q_2}(0)])`.
    DAlpha(f64),
}

fn ray_exit(d: &GeodesicNeighborhood, dir: Complex64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while d.contains(dir * hi) {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if d.contains(dir * mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearGrowthFit {
    pub n: usize,
    /// `(dist(z, I_n)/|I_n|, dist(psi_n^{-1} z, f(I_n))/|f(I_n)|)`, each
    /// upper-half sample paired with its mirror image.
    pub samples: Vec<(f64, f64)>,
    pub c1: f64,
    pub c2: f64,
    pub d0: GeodesicNeighborhood,
    pub attempted: usize,
    pub failed: usize,
}

/// Upper envelope `y <= C1 x + C2`, not a regression. `C1` is the slope of
/// the last upper-hull edge (growth at the far end of the samples), clamped
/// at 0; `C2` is then the least intercept covering every sample.
pub fn envelope(samples: &[(f64, f64)]) -> (f64, f64) {
    let Some(&far) = samples
        .iter()
        .max_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
    else {
        return (0.0, 0.0);
    };
    let c1 = samples
        .iter()
        .filter(|s| s.0 < far.0)
        .map(|s| (far.1 - s.1) / (far.0 - s.0))
        .fold(f64::INFINITY, f64::min);
    let c1 = if c1.is_finite() { c1.max(0.0) } else { 0.0 };
    let c2 = samples.iter().map(|s| s.1 - c1 * s.0).fold(f64::NEG_INFINITY, f64::max);
    (c1, c2)
}

pub fn fit_linear_growth(
    f: &CriticalCircleMap,
    n: usize,
    grid: GridSpec,
    domain: SampleDomain,
    exec: Exec,
) -> Result<LinearGrowthFit> {
    let dec = Decomposition::new(f, n)?;
    let d1 = dec.d_interval(1)?;
    let d0 = match domain {
        SampleDomain::D1 => GeodesicNeighborhood::disc(d1),
        SampleDomain::DAlpha(alpha) => GeodesicNeighborhood::new(d1, alpha),
    };
    let i_n = dec.i_n();
    let f_i = dec.j[1];
    let mut pts = Vec::new();
    for phi in grid.upper_angles() {
        let dir = Complex64::from_polar(1.0, phi);
        let rmin = 0.25 * i_n.len();
        let rmax = 0.98 * ray_exit(&d0, dir);
        for i in 0..grid.radii {
            let s = if grid.radii > 1 {
                i as f64 / (grid.radii - 1) as f64
            } else {
                0.0
            };
            pts.push(dir * (rmin * (rmax / rmin).powf(s)));
        }
    }
    let res = exec::map(exec, &pts, |z| dec.psi_inverse(*z));
    let mut samples = Vec::new();
    let mut failed = 0;
    for (z, r) in pts.iter().zip(res) {
        match r {
            Ok(w) => {
                let s = (i_n.dist(*z) / i_n.len(), f_i.dist(w) / f_i.len());
                samples.push(s);
                samples.push(s);
            }
            Err(_) => failed += 1,
        }
    }
    check_survival(pts.len(), failed, n)?;
    let (c1, c2) = envelope(&samples);
    Ok(LinearGrowthFit {
        n,
        samples,
        c1,
        c2,
        d0,
        attempted: 2 * pts.len(),
        failed: 2 * failed,
    })
}

fn check_survival(total: usize, failed: usize, n: usize) -> Result<()> {
    if total == 0 || (total - failed) * 10 < total * 9 {
        return Err(LabError::BranchAmbiguity {
            index: n,
            detail: format!("{failed} of {total} samples failed branch tracking"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicFit {
    pub n: usize,
    pub b: f64,
    /// Largest `c` with `|f~^p(z)| >= c |z|^3` on the retained samples.
    pub c: f64,
    pub c_max: f64,
    /// Retained `(|z|, |f~^p(z)|)` in rescaled units.
    pub samples: Vec<(f64, f64)>,
    pub attempted: usize,
    pub failed: usize,
}

/// Key cubic estimate on the rescaled return map. Image points `w` are laid
/// out log-radially between `B` and `0.98 lambda` with `lambda = 1/|I_n|`
/// (the unit disc around the critical point before rescaling) and pulled
/// back through all `p` branches.
pub fn fit_cubic(f: &CriticalCircleMap, n: usize, grid: GridSpec, b_cut: f64, exec: Exec) -> Result<CubicFit> {
    let dec = Decomposition::new(f, n)?;
    let lambda = 1.0 / dec.i_n().len();
    let w_lo = b_cut * 1.0001;
    let w_hi = 0.98 * lambda;
    if w_hi <= w_lo {
        return Err(LabError::NoAdmissibleSamples(n));
    }
    let mut pts = Vec::new();
    for phi in grid.upper_angles() {
        for i in 0..grid.radii {
            let s = if grid.radii > 1 {
                i as f64 / (grid.radii - 1) as f64
            } else {
                0.0
            };
            let w = w_lo * (w_hi / w_lo).powf(s);
            pts.push(Complex64::from_polar(w / lambda, phi));
        }
    }
    let res = exec::map(exec, &pts, |z| dec.pull_back(*z, 0).map(|c| c.at(0)));
    let mut samples = Vec::new();
    let mut failed = 0;
    for (z, r) in pts.iter().zip(res) {
        match r {
            Ok(zeta) => {
                let s = (zeta.norm() * lambda, z.norm() * lambda);
                if s.1 > b_cut {
                    samples.push(s);
                    samples.push(s);
                }
            }
            Err(_) => failed += 1,
        }
    }
    if samples.is_empty() {
        return Err(LabError::NoAdmissibleSamples(n));
    }
    let ratios = samples.iter().map(|(z, w)| w / z.powi(3));
    let (c, c_max) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    Ok(CubicFit {
        n,
        b: b_cut,
        c,
        c_max,
        samples,
        attempted: 2 * pts.len(),
        failed: 2 * failed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleNode {
    pub m: usize,
    pub q: u64,
    pub fixed_point: Complex64,
    pub multiplier: Complex64,
    pub interval: Interval,
}

/// `F^q(z)` and its derivative on the complex lift.
fn iterate_with_derivative(f: &CriticalCircleMap, mut z: Complex64, q: u64) -> (Complex64, Complex64) {
    let mut d = Complex64::new(1.0, 0.0);
    for _ in 0..q {
        d *= f.deriv(z);
        z = f.eval(z);
    }
    (z, d)
}

/// Near-parabolic fixed point behind the return map `f^{q_{m+1}}` on `I_m`.
///
/// Since `f^{q_{m+1}} = f^{q_{m-1}} o (f^{q_m})^{r_m}`, a large ratio
/// `q_{m+1}/q_m` means the orbit crawls through a bottleneck of
/// `f^{q_m} - p_m`; the probe returns the fixed point of that factor nearest
/// to `I_m` and its multiplier. Asymptotically `|mu - 1| ~ 2 pi / r_m`.
pub fn saddle_node_probe(f: &CriticalCircleMap, m: usize) -> Result<SaddleNode> {
    let orbit = closest_returns(f, m + 1, 1e-300)?;
    if orbit.max_level() < m + 1 {
        return Err(LabError::InsufficientDepth(format!("level {} unavailable", m + 1)));
    }
    let (q, p) = (orbit.q[m], orbit.p[m] as f64);
    let (a, b) = orbit.interval(m);
    let im = Interval::new(a, b);
    let mid = im.mid();
    let h = 0.5 * im.len();
    let seeds = [
        Complex64::new(mid, 0.0),
        Complex64::new(mid, h),
        Complex64::new(mid, -h),
    ];
    let mut best: Option<(f64, Complex64, Complex64)> = None;
    for seed in seeds {
        let mut z = seed;
        let mut converged = false;
        for _ in 0..200 {
            let (w, d) = iterate_with_derivative(f, z, q);
            let g = w - z - p;
            let mut step = g / (d - 1.0);
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            if step.norm() > 0.2 {
                step *= 0.2 / step.norm();
            }
            z -= step;
            if g.norm() < 1e-13 * z.norm().max(1.0) || step.norm() < 1e-14 * z.norm().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            continue;
        }
        let (_, mult) = iterate_with_derivative(f, z, q);
        let dist = im.dist(z);
        if best.is_none_or(|(bd, _, _)| dist < bd) {
            best = Some((dist, z, mult));
        }
    }
    let (_, z, mult) = best.ok_or_else(|| LabError::NoConvergence("fixed point Newton from all seeds".into()))?;
    Ok(SaddleNode {
        m,
        q,
        fixed_point: z,
        multiplier: mult,
        interval: im,
    })
}
