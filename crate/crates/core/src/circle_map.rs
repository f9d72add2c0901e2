//! The two built-in critical circle maps, closest returns and rotation numbers.

use crate::number_theory::RotationNumber;
use crate::{LabError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const TAU: f64 = 2.0 * PI;

/// Default floor for |I_m|; below this the endpoints are noise.
pub const DEFAULT_MIN_INTERVAL: f64 = 1e-11;
/// Distance from 0 that counts as an exact return of the critical orbit.
pub const LOCK_DIST: f64 = 1e-14;
/// Hard cap on iterates spent looking for the next closest return.
pub const MAX_RETURN_ITERATES: u64 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `x + theta - sin(2 pi x)/(2 pi)`
    Standard,
    /// Restriction of the Blaschke product to the unit circle, in angle units.
    BlaschkeCircle,
}

/// Anything with a degree-one lift `F(x+1) = F(x) + 1`.
pub trait Lift: Sync {
    fn lift(&self, x: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalCircleMap {
    pub family: Family,
    pub param: f64,
}

impl Lift for CriticalCircleMap {
    #[inline]
    fn lift(&self, x: f64) -> f64 {
        match self.family {
            Family::Standard => x + self.param - (TAU * x).sin() / TAU,
            Family::BlaschkeCircle => {
                let (s, c) = (TAU * x).sin_cos();
                self.param + x + (-s).atan2(3.0 - c) / PI
            }
        }
    }
}

pub fn standard_map(theta: f64) -> CriticalCircleMap {
    CriticalCircleMap {
        family: Family::Standard,
        param: theta,
    }
}

pub fn blaschke_circle(tau: f64) -> CriticalCircleMap {
    CriticalCircleMap {
        family: Family::BlaschkeCircle,
        param: tau,
    }
}

impl CriticalCircleMap {
    pub fn new(family: Family, param: f64) -> Self {
        CriticalCircleMap { family, param }
    }

    /// First three derivatives of the lift.
    pub fn lift_derivs(&self, x: f64) -> [f64; 3] {
        let phi = TAU * x;
        let (s, c) = phi.sin_cos();
        match self.family {
            Family::Standard => [1.0 - c, TAU * s, TAU * TAU * c],
            Family::BlaschkeCircle => {
                let d = 5.0 - 3.0 * c;
                let d1 = 6.0 * (1.0 - c) / d;
                let d2 = 24.0 * PI * s / (d * d);
                let d3 = 24.0 * PI * (TAU * c / (d * d) - 12.0 * PI * s * s / (d * d * d));
                [d1, d2, d3]
            }
        }
    }

    pub fn lift_deriv(&self, x: f64) -> f64 {
        self.lift_derivs(x)[0]
    }

    /// Holomorphic extension of the lift. For the Blaschke family this is
    /// only defined in the strip `|Im w| < ln 3 / (2 pi)`.
    pub fn eval(&self, w: Complex64) -> Complex64 {
        match self.family {
            Family::Standard => w + self.param - (w * TAU).sin() / TAU,
            Family::BlaschkeCircle => {
                let i = Complex64::i();
                let z = (i * TAU * w).exp();
                let a = (Complex64::new(1.0, 0.0) - z / 3.0).ln();
                let b = (Complex64::new(1.0, 0.0) - z.inv() / 3.0).ln();
                w + self.param + (a - b) / (i * TAU)
            }
        }
    }

    pub fn deriv(&self, w: Complex64) -> Complex64 {
        match self.family {
            Family::Standard => Complex64::new(1.0, 0.0) - (w * TAU).cos(),
            Family::BlaschkeCircle => {
                let z = (Complex64::i() * TAU * w).exp();
                let one = Complex64::new(1.0, 0.0);
                one - z / (3.0 - z) - one / (z * 3.0 - 1.0)
            }
        }
    }

    /// Half-width of the strip where `eval` is valid, if bounded.
    pub fn strip_halfwidth(&self) -> Option<f64> {
        match self.family {
            Family::Standard => None,
            Family::BlaschkeCircle => Some(3f64.ln() / TAU),
        }
    }

    /// Distance from `w` to the nearest critical point (the integers).
    pub fn critical_distance(&self, w: Complex64) -> f64 {
        (w - Complex64::new(w.re.round(), 0.0)).norm()
    }

    /// `F^n(x)` on the lift.
    pub fn iterate(&self, x: f64, n: u64) -> f64 {
        iterate_lift(self, x, n)
    }

    /// Inverse of the real lift by bracketed bisection.
    pub fn lift_inverse(&self, y: f64) -> f64 {
        lift_inverse(self, y)
    }
}

/// `F^n(x)` keeping the fractional part small to avoid precision loss.
pub fn iterate_lift<L: Lift + ?Sized>(f: &L, x: f64, n: u64) -> f64 {
    let mut base = x.floor();
    let mut y = x - base;
    for _ in 0..n {
        y = f.lift(y);
        let fl = y.floor();
        y -= fl;
        base += fl;
    }
    y + base
}

/// Inverse of a strictly increasing lift, by bisection to full precision.
pub fn lift_inverse<L: Lift + ?Sized>(f: &L, y: f64) -> f64 {
    let base = y.floor();
    let t = y - base;
    // F(x) - x is 1-periodic and bounded, so F^{-1}(t) lies within a unit of
    // t - (F(0) - 0) after a few expansions.
    let mut lo = t - f.lift(0.0) - 1.0;
    let mut hi = lo + 2.0;
    while f.lift(lo) > t {
        lo -= 1.0;
    }
    while f.lift(hi) < t {
        hi += 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f.lift(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) + base
}

/// Closest returns of the critical orbit. Index `m` runs from 0; level 0 is
/// `q_0 = 1, p_0 = 0, delta_0 = F(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalOrbit {
    pub q: Vec<u64>,
    pub p: Vec<u64>,
    /// Signed `delta_m = F^{q_m}(0) - p_m`, so `I_m = [0, delta_m]`.
    pub delta: Vec<f64>,
}

impl CriticalOrbit {
    /// Deepest level available.
    pub fn max_level(&self) -> usize {
        self.q.len() - 1
    }

    pub fn interval(&self, m: usize) -> (f64, f64) {
        let d = self.delta[m];
        if d < 0.0 {
            (d, 0.0)
        } else {
            (0.0, d)
        }
    }

    pub fn len(&self, m: usize) -> f64 {
        self.delta[m].abs()
    }

    /// Partial quotient `r_m = (q_{m+1} - q_{m-1}) / q_m` for `m >= 1`
    /// (with `q_{-1} = 0` folded into `r_0 = q_1`).
    pub fn quotient(&self, m: usize) -> u64 {
        if m == 0 {
            self.q[1]
        } else {
            (self.q[m + 1] - self.q[m - 1]) / self.q[m]
        }
    }
}

struct Records {
    q: Vec<u64>,
    p: Vec<u64>,
    delta: Vec<f64>,
}

/// Walks the critical orbit and builds the closest returns combinatorially:
/// `q_{m+1} = q_{m-1} + r q_m` with `r` the largest `k` for which
/// `F^{q_{m-1} + k q_m}(0) - (p_{m-1} + k p_m)` stays on the side of
/// `delta_{m-1}`. Starts from `q_{-1} = 0, p_{-1} = 1, delta_{-1} = -1`.
/// Metric records alone are not enough: near the critical point the orbit
/// can approach faster from one side than from the other.
fn scan_returns<L: Lift + ?Sized>(
    f: &L,
    max_level: usize,
    min_interval: f64,
    budget: u64,
) -> std::result::Result<Records, (Records, LabError)> {
    let d0 = f.lift(0.0);
    let mut rec = Records {
        q: vec![1],
        p: vec![0],
        delta: vec![d0],
    };
    if d0.abs() < LOCK_DIST {
        return Err((rec, LabError::RationalLock { n: 1, dist: d0.abs() }));
    }
    let (mut y, mut k, mut n) = (0.0f64, 0i64, 0u64);
    let mut prev = (0u64, 1i64, -1.0f64);
    while rec.q.len() <= max_level {
        let m = rec.q.len() - 1;
        let cur = (rec.q[m], rec.p[m] as i64);
        let mut r = 0u64;
        let mut last = prev.2;
        loop {
            let t = prev.0 + (r + 1) * cur.0;
            if t > budget {
                let e = LabError::InsufficientBudget(format!(
                    "{m} levels found within {budget} iterates"
                ));
                return Err((rec, e));
            }
            while n < t {
                y = f.lift(y);
                let fl = y.floor();
                y -= fl;
                k += fl as i64;
                n += 1;
            }
            let shift = prev.1 + (r as i64 + 1) * cur.1;
            let val = (k - shift) as f64 + y;
            if val.abs() < LOCK_DIST {
                rec.q.push(t);
                rec.p.push(shift.max(0) as u64);
                rec.delta.push(0.0);
                return Err((rec, LabError::RationalLock { n: t, dist: val.abs() }));
            }
            if (val < 0.0) != (prev.2 < 0.0) {
                break;
            }
            r += 1;
            last = val;
        }
        if r == 0 {
            let e = LabError::NoConvergence(format!("orbit order broken at level {}", m + 1));
            return Err((rec, e));
        }
        if last.abs() < min_interval {
            break;
        }
        rec.q.push(prev.0 + r * cur.0);
        rec.p.push((prev.1 + r as i64 * cur.1) as u64);
        rec.delta.push(last);
        prev = (cur.0, cur.1, rec.delta[m]);
    }
    Ok(rec)
}

pub fn closest_returns<L: Lift + ?Sized>(
    f: &L,
    max_level: usize,
    min_interval: f64,
) -> Result<CriticalOrbit> {
    match scan_returns(f, max_level, min_interval, MAX_RETURN_ITERATES) {
        Ok(r) => Ok(CriticalOrbit {
            q: r.q,
            p: r.p,
            delta: r.delta,
        }),
        Err((_, e)) => Err(e),
    }
}

/// Deepest convergent `(p, q)` seen within `budget` iterates, or the exact
/// rational on a lock.
pub fn rotation_convergent<L: Lift + ?Sized>(f: &L, budget: u64, tol: f64) -> Result<(u64, u64)> {
    if budget < 1000 {
        return Err(LabError::Domain("rotation number budget must be >= 1000".into()));
    }
    let rec = match scan_returns(f, usize::MAX, tol.max(0.0), budget) {
        Ok(r) => r,
        Err((r, LabError::RationalLock { .. })) => {
            let (p, q) = (*r.p.last().unwrap(), *r.q.last().unwrap());
            return Ok((p, q));
        }
        Err((r, LabError::InsufficientBudget(_))) => r,
        Err((_, e)) => return Err(e),
    };
    if rec.q.len() < 3 {
        return Err(LabError::InsufficientBudget(
            "no closest return beyond q_1".into(),
        ));
    }
    Ok((*rec.p.last().unwrap(), *rec.q.last().unwrap()))
}

/// Convergent-based rotation number: `p_M / q_M` for the deepest closest
/// return found, so `|rho - estimate| <= 1/q_M^2`.
pub fn rotation_number<L: Lift + ?Sized>(f: &L, budget: u64, tol: f64) -> Result<f64> {
    let (p, q) = rotation_convergent(f, budget, tol)?;
    Ok(p as f64 / q as f64)
}

/// Sign of `rho(f) - target` decided from convergent comparisons.
/// Odd convergents lie above an irrational target, even ones below.
pub fn compare_to_target<L: Lift + ?Sized>(f: &L, target: &RotationNumber, budget: u64) -> i32 {
    let mut y = 0.0f64;
    let mut k: i64 = 0;
    let mut n: u64 = 0;
    for m in 1..target.q.len() {
        let qm = target.q[m];
        if qm > budget {
            break;
        }
        while n < qm {
            y = f.lift(y);
            let fl = y.floor();
            y -= fl;
            k += fl as i64;
            n += 1;
        }
        let val = (y + k as f64) - target.p[m] as f64;
        if m % 2 == 1 {
            if val > 0.0 {
                return 1;
            }
        } else if val < 0.0 {
            return -1;
        }
    }
    0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSolve {
    pub param: f64,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

/// Bisection on the family parameter in `[0,1]` using monotonicity of the
/// rotation number. Stops once the convergent comparisons within `budget`
/// can no longer tell the sides apart.
pub fn solve_parameter(family: Family, target: &RotationNumber, budget: u64) -> Result<ParamSolve> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for steps in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = CriticalCircleMap::new(family, mid);
        match compare_to_target(&f, target, budget) {
            0 => {
                return Ok(ParamSolve {
                    param: mid,
                    lo,
                    hi,
                    steps,
                })
            }
            c if c < 0 => lo = mid,
            _ => hi = mid,
        }
        if hi - lo < 1e-16 {
            return Ok(ParamSolve {
                param: 0.5 * (lo + hi),
                lo,
                hi,
                steps,
            });
        }
    }
    Err(LabError::NoConvergence("parameter bisection".into()))
}

/// Newton inverse of the complex lift, continuing the branch of `seed`.
///
/// Steps are clamped to half the distance from the iterate to the nearest
/// critical point; a tripled step is tried first so that targets at a
/// critical value still converge.
pub fn inverse_branch(
    f: &CriticalCircleMap,
    target: Complex64,
    seed: Complex64,
    tol: f64,
) -> Result<Complex64> {
    let mut w = seed;
    let mut resid = (f.eval(w) - target).norm();
    for _ in 0..60 {
        let d = f.deriv(w);
        if d.norm() == 0.0 {
            if resid < tol {
                return Ok(w);
            }
            return Err(LabError::BranchAmbiguity {
                index: 0,
                detail: "derivative vanished".into(),
            });
        }
        let s = (f.eval(w) - target) / d;
        // 3s bounds the distance to a root of multiplicity up to three
        if resid < tol && 3.0 * s.norm() < tol {
            return Ok(w);
        }
        let w3 = w - s * 3.0;
        let r3 = (f.eval(w3) - target).norm();
        if r3.is_finite() && r3 < 0.1 * resid {
            w = w3;
            resid = r3;
            continue;
        }
        let cap = 0.5 * f.critical_distance(w);
        let step = if s.norm() > cap && cap > 0.0 {
            s * (cap / s.norm())
        } else {
            s
        };
        if !step.re.is_finite() || !step.im.is_finite() || step.norm() > 0.5 {
            return Err(LabError::BranchAmbiguity {
                index: 0,
                detail: format!("Newton step {:.3e} exceeds guard", step.norm()),
            });
        }
        w -= step;
        resid = (f.eval(w) - target).norm();
    }
    if resid < tol {
        return Ok(w);
    }
    Err(LabError::BranchAmbiguity {
        index: 0,
        detail: format!("Newton stalled with residual {resid:.3e}"),
    })
}

/// Golden-mean parameter of the standard family at the default budget.
pub fn golden_standard() -> CriticalCircleMap {
    standard_for(&RotationNumber::golden(60))
}

/// Standard map with the given rotation number (bisection oracle).
pub fn standard_for(rho: &RotationNumber) -> CriticalCircleMap {
    let s = solve_parameter(Family::Standard, rho, 2_000_000).expect("bisection");
    standard_map(s.param)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_evaluations() {
        assert_eq!(standard_map(0.0).lift(0.0), 0.0);
        assert_eq!(standard_map(0.5).lift(0.0), 0.5);
        assert_eq!(rotation_number(&standard_map(0.0), 10_000, 1e-14).unwrap(), 0.0);
    }

    #[test]
    fn periodicity_and_criticality() {
        for f in [standard_map(0.3), blaschke_circle(0.3)] {
            for k in 0..100 {
                let x = k as f64 / 37.0 - 1.3;
                assert!((f.lift(x + 1.0) - f.lift(x) - 1.0).abs() < 1e-12);
                assert!(f.lift_deriv(x) >= 0.0);
            }
            let d = f.lift_derivs(0.0);
            assert!(d[0].abs() < 1e-15 && d[1].abs() < 1e-12 && d[2].abs() > 1.0);
        }
    }

    #[test]
    fn blaschke_derivatives_match_differences() {
        let f = blaschke_circle(0.2);
        let h = 1e-5;
        for &x in &[0.1, 0.37, 0.8] {
            let d = f.lift_derivs(x);
            let fd1 = (f.lift(x + h) - f.lift(x - h)) / (2.0 * h);
            let fd2 = (f.lift_deriv(x + h) - f.lift_deriv(x - h)) / (2.0 * h);
            let fd3 = (f.lift_derivs(x + h)[1] - f.lift_derivs(x - h)[1]) / (2.0 * h);
            assert!((d[0] - fd1).abs() < 1e-8);
            assert!((d[1] - fd2).abs() < 1e-7);
            assert!((d[2] - fd3).abs() < 1e-5);
        }
    }

    #[test]
    fn complex_extension_agrees_on_reals() {
        for f in [standard_map(0.61), blaschke_circle(0.61)] {
            for k in 0..50 {
                let x = k as f64 / 50.0;
                let w = f.eval(Complex64::new(x, 0.0));
                assert!((w.re - f.lift(x)).abs() < 1e-12 && w.im.abs() < 1e-12);
                let h = 1e-6;
                let z = Complex64::new(x, 0.05);
                let fd = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
                assert!((fd - f.deriv(z)).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn inverse_branch_real_and_critical() {
        let f = standard_map(0.6066);
        let x0 = 0.3;
        let w = inverse_branch(&f, Complex64::new(f.lift(x0), 0.0), Complex64::new(x0 + 0.01, 0.0), 1e-13)
            .unwrap();
        assert!((w.re - x0).abs() < 1e-12);
        let w = inverse_branch(&f, Complex64::new(f.lift(0.0), 0.0), Complex64::new(0.05, 0.0), 1e-4)
            .unwrap();
        assert!(w.norm() < 1e-4, "w = {w}");
    }

    #[test]
    fn lift_inverse_roundtrip() {
        let f = blaschke_circle(0.61);
        for k in 0..20 {
            let y = -2.0 + k as f64 * 0.23;
            assert!((f.lift(f.lift_inverse(y)) - y).abs() < 1e-13);
        }
    }
}
