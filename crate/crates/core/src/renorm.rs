//! Critical commuting pairs built from iterates of a circle map, and the
//! renormalization operator acting on them.
//!
//! A pair is stored as two iterate records `(count, shift)` meaning
//! `x -> F^count(x) - shift` on the lift, plus the orientation sign and the
//! rescaling factor. Renormalization only edits the records; everything
//! numerical happens at evaluation time.

use crate::circle_map::{
    closest_returns, iterate_lift, rotation_number, CriticalCircleMap, Lift, DEFAULT_MIN_INTERVAL,
};
use crate::geometry::Interval;
use crate::{LabError, Result};
use serde::{Deserialize, Serialize};

/// Largest `r` accepted when counting `eta` iterates during renormalization.
pub const MAX_FIRST_QUOTIENT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub count: u64,
    pub shift: i64,
}

impl IterateRecord {
    /// Record of `self^r o other`.
    fn power_then(self, r: u64, other: IterateRecord) -> Result<IterateRecord> {
        let count = r
            .checked_mul(self.count)
            .and_then(|v| v.checked_add(other.count))
            .ok_or(LabError::Overflow("iterate count"))?;
        let shift = (r as i64)
            .checked_mul(self.shift)
            .and_then(|v| v.checked_add(other.shift))
            .ok_or(LabError::Overflow("iterate shift"))?;
        Ok(IterateRecord { count, shift })
    }

    fn apply(&self, f: &CriticalCircleMap, x: f64) -> f64 {
        iterate_lift(f, x, self.count) - self.shift as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutingPair {
    pub map: CriticalCircleMap,
    pub eta: IterateRecord,
    pub xi: IterateRecord,
    /// Orientation: raw coordinate `y` corresponds to `sign * lambda * y`.
    pub sign: f64,
    pub lambda: f64,
    /// Closest-return level `m` when the pair came from `(F^{q_{m+1}}, F^{q_m})`.
    pub level: usize,
}

impl CommutingPair {
    fn to_raw(&self, x: f64) -> f64 {
        self.sign * x / self.lambda
    }

    fn from_raw(&self, y: f64) -> f64 {
        self.sign * self.lambda * y
    }

    pub fn eta(&self, x: f64) -> f64 {
        self.from_raw(self.eta.apply(&self.map, self.to_raw(x)))
    }

    pub fn xi(&self, x: f64) -> f64 {
        self.from_raw(self.xi.apply(&self.map, self.to_raw(x)))
    }

    /// `I_eta = [0, xi(0)]`.
    pub fn i_eta(&self) -> Interval {
        Interval::new(0.0, self.xi(0.0))
    }

    /// `I_xi = [eta(0), 0]`.
    pub fn i_xi(&self) -> Interval {
        Interval::new(self.eta(0.0), 0.0)
    }

    /// `max |eta(xi(x)) - xi(eta(x))|` over `n` points of `I_xi u I_eta`,
    /// relative to `|I_eta|`.
    pub fn commutation_residual(&self, n: usize) -> f64 {
        let (lo, hi) = (self.eta(0.0), self.xi(0.0));
        let n = n.max(2);
        let mut worst = 0.0f64;
        for k in 0..n {
            let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            worst = worst.max((self.eta(self.xi(x)) - self.xi(self.eta(x))).abs());
        }
        worst / self.i_eta().len()
    }

    /// `eta(0) < 0 < xi(0)` and `xi(eta(0))` in `I_eta`.
    pub fn is_normalized(&self) -> bool {
        let (e0, x0) = (self.eta(0.0), self.xi(0.0));
        e0 < 0.0 && 0.0 < x0 && self.i_eta().contains(self.xi(e0))
    }
}

/// `(F^{q_{m+1}} | I_m, F^{q_m} | I_{m+1})`, rescaled so that `|I_eta| = 1`.
pub fn pair_from_map(f: &CriticalCircleMap, m: usize) -> Result<CommutingPair> {
    let orbit = closest_returns(f, m + 1, DEFAULT_MIN_INTERVAL)?;
    if orbit.max_level() < m + 1 {
        return Err(LabError::LevelTooDeep {
            level: orbit.max_level() + 1,
            min_interval: DEFAULT_MIN_INTERVAL,
        });
    }
    let dm = orbit.delta[m];
    Ok(CommutingPair {
        map: *f,
        eta: IterateRecord {
            count: orbit.q[m + 1],
            shift: orbit.p[m + 1] as i64,
        },
        xi: IterateRecord {
            count: orbit.q[m],
            shift: orbit.p[m] as i64,
        },
        sign: dm.signum(),
        lambda: 1.0 / dm.abs(),
        level: m,
    })
}

/// Number of `eta` iterates keeping `xi(0)` inside `I_eta`.
pub fn first_quotient(pair: &CommutingPair) -> Result<u64> {
    let mut y = pair.xi(0.0);
    let mut r = 0;
    loop {
        let next = pair.eta(y);
        if next <= 0.0 {
            break;
        }
        y = next;
        r += 1;
        if r > MAX_FIRST_QUOTIENT {
            return Err(LabError::DomainExhausted(format!(
                "eta iterates stay in I_eta beyond {MAX_FIRST_QUOTIENT} steps"
            )));
        }
    }
    if r == 0 {
        return Err(LabError::DomainExhausted("eta(xi(0)) already left I_eta".into()));
    }
    Ok(r)
}

/// `(eta^r o xi | I_xi, eta | [0, eta^r(xi(0))])`, rescaled.
pub fn renormalize(pair: &CommutingPair) -> Result<CommutingPair> {
    let r = first_quotient(pair)?;
    let eta = pair.eta.power_then(r, pair.xi)?;
    let raw_len = pair.eta.apply(&pair.map, 0.0).abs();
    if !(raw_len > 0.0 && raw_len.is_finite()) {
        return Err(LabError::DomainExhausted("degenerate I_xi".into()));
    }
    Ok(CommutingPair {
        map: pair.map,
        eta,
        xi: pair.eta,
        sign: -pair.sign,
        lambda: 1.0 / raw_len,
        level: pair.level + 1,
    })
}

/// Lift of the glued map `f_zeta` in reflected coordinates, so that the
/// leftward motion of the pair becomes an increasing lift `u -> u + rho`.
struct GluedLift<'a> {
    pair: &'a CommutingPair,
    scale: f64,
}

impl Lift for GluedLift<'_> {
    fn lift(&self, u: f64) -> f64 {
        let x = -u;
        let k = x.floor();
        let x0 = (x - k) * self.scale;
        let e = self.pair.eta(x0);
        let g = if e >= 0.0 {
            e
        } else {
            self.pair.xi(e) - self.scale
        };
        -(g / self.scale + k)
    }
}

/// Rotation number of the glued circle map obtained from `I_eta` by
/// identifying `0` with `xi(0)`.
pub fn rotation_number_of_pair(pair: &CommutingPair, budget: u64) -> Result<f64> {
    let glued = GluedLift {
        pair,
        scale: pair.xi(0.0),
    };
    rotation_number(&glued, budget, 1e-13)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsteinDescriptor {
    pub s: f64,
    pub j: Interval,
    pub j_tilde: Interval,
}

impl EpsteinDescriptor {
    /// Margin of `J` inside `J~`; zero when either side is missing.
    pub fn from_intervals(j: Interval, j_tilde: Interval) -> Self {
        let s = if j_tilde.contains_interval(&j) {
            (j.a - j_tilde.a).min(j_tilde.b - j.b) / j.len()
        } else {
            0.0
        };
        EpsteinDescriptor { s, j, j_tilde }
    }
}

/// For `g = F^q` restricted to an interval `I` at the critical point, the
/// inverse of `F^{q-1}` on `J = g(I)` extends until it meets a critical
/// value `F^j(0)`, `1 <= j < q`. Coordinates are raw lift units.
fn extension_margin(f: &CriticalCircleMap, rec: IterateRecord, end: f64) -> EpsteinDescriptor {
    let y0 = rec.apply(f, 0.0);
    let y1 = rec.apply(f, end);
    let j = Interval::new(y0, y1);
    let mut left = 1.0 - j.len();
    let mut right = 1.0 - j.len();
    let mut x = 0.0f64;
    for _ in 1..rec.count {
        x = f.lift(x);
        x -= x.floor();
        let r = (x - j.b).rem_euclid(1.0);
        let l = (j.a - x).rem_euclid(1.0);
        if r + l > 1.0 - j.len() + 1e-9 {
            // the point sits inside J
            return EpsteinDescriptor::from_intervals(j, j);
        }
        right = right.min(r);
        left = left.min(l);
    }
    EpsteinDescriptor::from_intervals(j, Interval::new(j.a - left, j.b + right))
}

/// Certified Epstein margin of a pair: the smaller of the margins of its two
/// maps, each taken on its own interval.
pub fn epstein_check(pair: &CommutingPair) -> EpsteinDescriptor {
    let i_eta = pair.to_raw(pair.xi(0.0));
    let i_xi = pair.to_raw(pair.eta(0.0));
    let a = extension_margin(&pair.map, pair.eta, i_eta);
    let b = extension_margin(&pair.map, pair.xi, i_xi);
    if a.s <= b.s {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle_map::{golden_standard, standard_for};
    use crate::number_theory::{continued_fraction, RotationNumber};

    const GOLD: f64 = 0.618_033_988_749_894_9;

    #[test]
    fn golden_pair_rotation() {
        let f = golden_standard();
        let p = pair_from_map(&f, 3).unwrap();
        assert!(p.is_normalized());
        assert!((p.i_eta().len() - 1.0).abs() < 1e-12);
        let rho = rotation_number_of_pair(&p, 20_000).unwrap();
        assert!((rho - GOLD).abs() < 1e-6, "{rho}");
        let r = renormalize(&p).unwrap();
        let rho2 = rotation_number_of_pair(&r, 20_000).unwrap();
        assert!((rho2 - GOLD).abs() < 1e-6);
    }

    #[test]
    fn two_then_golden_pair() {
        let rho = RotationNumber::eventually_periodic(&[2], &[1], 40).unwrap();
        let f = standard_for(&rho);
        let p = pair_from_map(&f, 1).unwrap();
        let r = rotation_number_of_pair(&p, 20_000).unwrap();
        assert!((r - GOLD).abs() < 1e-6);
    }

    #[test]
    fn quotient_shift() {
        let rho = RotationNumber::eventually_periodic(&[1, 3], &[1], 40).unwrap();
        let f = standard_for(&rho);
        let p = pair_from_map(&f, 0).unwrap();
        assert_eq!(first_quotient(&p).unwrap(), 3);
        let a = rotation_number_of_pair(&p, 50_000).unwrap();
        let cf = continued_fraction(a, 4).unwrap();
        assert_eq!(cf.quotients, vec![3, 1, 1, 1]);
        let b = rotation_number_of_pair(&renormalize(&p).unwrap(), 50_000).unwrap();
        assert!((b - GOLD).abs() < 1e-6);
    }

    #[test]
    fn renormalization_matches_deeper_pair() {
        let f = golden_standard();
        let twice = renormalize(&renormalize(&pair_from_map(&f, 3).unwrap()).unwrap()).unwrap();
        let direct = pair_from_map(&f, 5).unwrap();
        // independent side: ratio from the orbit itself
        let orbit = closest_returns(&f, 7, DEFAULT_MIN_INTERVAL).unwrap();
        let ratio = orbit.len(6) / orbit.len(5);
        assert!((twice.i_xi().len() - ratio).abs() < 1e-5);
        assert!((direct.i_xi().len() - ratio).abs() < 1e-5);
        assert!((twice.i_eta().len() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn commutation_and_epstein() {
        let f = golden_standard();
        let p = pair_from_map(&f, 4).unwrap();
        assert!(p.commutation_residual(100) <= 1e-9);
        let p5 = pair_from_map(&f, 5).unwrap();
        let e5 = epstein_check(&p5);
        assert!(e5.s > 0.0);
        let e6 = epstein_check(&renormalize(&p5).unwrap());
        assert!(e6.s > 0.0 && e5.s / e6.s < 2.0 && e6.s / e5.s < 2.0, "{} {}", e5.s, e6.s);
        let j = Interval::new(0.0, 1.0);
        assert_eq!(EpsteinDescriptor::from_intervals(j, j).s, 0.0);
    }
}
