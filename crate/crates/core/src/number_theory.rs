//! Continued fractions, convergents and the Gauss map.
//!
//! Convention: `x = [r_0, r_1, ...] = 1/(r_0 + 1/(r_1 + ...))`, with
//! `q_0 = 1, q_{-1} = 0` and `p_0 = 0, p_{-1} = 1`.

use crate::{LabError, Result};
use serde::{Deserialize, Serialize};

/// Partial quotients above this are treated as a sign that the input is a
/// rational number at double precision.
pub const QUOTIENT_GUARD: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationNumber {
    pub value: f64,
    pub quotients: Vec<u64>,
    /// `p[m], q[m]` for `m = 0..=quotients.len()`.
    pub p: Vec<u64>,
    pub q: Vec<u64>,
    /// Set when the expansion stopped before the requested depth.
    pub numerically_rational: bool,
}

impl RotationNumber {
    fn build(value: f64, quotients: Vec<u64>, numerically_rational: bool) -> Result<Self> {
        let (p, q) = convergents(&quotients)?;
        Ok(RotationNumber {
            value,
            quotients,
            p,
            q,
            numerically_rational,
        })
    }

    /// Truncated expansion `[r_0..r_{d-1}]` with value taken from the
    /// finite fraction itself.
    pub fn from_quotients(quotients: &[u64]) -> Result<Self> {
        check_quotients(quotients)?;
        let value = eval_cf(quotients, 0.0);
        Self::build(value, quotients.to_vec(), false)
    }

    /// `[prefix, period, period, ...]`, stored to `depth` quotients. The value
    /// is evaluated from enough repetitions to saturate double precision.
    pub fn eventually_periodic(prefix: &[u64], period: &[u64], depth: usize) -> Result<Self> {
        check_quotients(prefix)?;
        check_quotients(period)?;
        if period.is_empty() {
            return Err(LabError::Domain("empty period".into()));
        }
        let mut long = prefix.to_vec();
        while long.len() < prefix.len() + 80 {
            long.extend_from_slice(period);
        }
        let value = eval_cf(&long, 0.0);
        let mut quotients = prefix.to_vec();
        let mut k = 0;
        while quotients.len() < depth {
            quotients.push(period[k % period.len()]);
            k += 1;
        }
        quotients.truncate(depth.max(1));
        Self::build(value, quotients, false)
    }

    pub fn golden(depth: usize) -> Self {
        Self::eventually_periodic(&[], &[1], depth).expect("golden mean expansion")
    }

    pub fn depth(&self) -> usize {
        self.quotients.len()
    }

    /// Convergent `p_m / q_m` as a float.
    pub fn convergent(&self, m: usize) -> f64 {
        self.p[m] as f64 / self.q[m] as f64
    }
}

fn check_quotients(qs: &[u64]) -> Result<()> {
    if qs.iter().any(|&r| r == 0) {
        return Err(LabError::Domain("partial quotients must be >= 1".into()));
    }
    Ok(())
}

/// Evaluates `[r_0..r_{d-1}]` with remainder `tail` in `[0,1)` appended.
pub fn eval_cf(quotients: &[u64], tail: f64) -> f64 {
    let mut y = tail;
    for &r in quotients.iter().rev() {
        y = 1.0 / (r as f64 + y);
    }
    y
}

/// Exact convergents; `p[m]/q[m]` for `m = 0..=d`.
pub fn convergents(quotients: &[u64]) -> Result<(Vec<u64>, Vec<u64>)> {
    let mut p = vec![0u64];
    let mut q = vec![1u64];
    let (mut p_prev, mut q_prev) = (1u64, 0u64);
    for &r in quotients {
        let (pm, qm) = (*p.last().unwrap(), *q.last().unwrap());
        let pn = r
            .checked_mul(pm)
            .and_then(|v| v.checked_add(p_prev))
            .ok_or(LabError::Overflow("convergent numerator"))?;
        let qn = r
            .checked_mul(qm)
            .and_then(|v| v.checked_add(q_prev))
            .ok_or(LabError::Overflow("convergent denominator"))?;
        p_prev = pm;
        q_prev = qm;
        p.push(pn);
        q.push(qn);
    }
    Ok((p, q))
}

pub fn continued_fraction(x: f64, depth: usize) -> Result<RotationNumber> {
    if !(x > 0.0 && x < 1.0) {
        return Err(LabError::Domain(format!("{x} is not in (0,1)")));
    }
    if depth == 0 {
        return Err(LabError::Domain("depth must be positive".into()));
    }
    let mut quotients = Vec::with_capacity(depth);
    let mut y = x;
    let mut rational = false;
    while quotients.len() < depth {
        if y <= 0.0 {
            rational = true;
            break;
        }
        let a = 1.0 / y;
        if !a.is_finite() || a > QUOTIENT_GUARD as f64 + 1.0 {
            rational = true;
            break;
        }
        let r = a.floor();
        quotients.push(r as u64);
        y = a - r;
    }
    if quotients.is_empty() {
        return Err(LabError::Domain(format!("{x} is numerically rational")));
    }
    RotationNumber::build(x, quotients, rational)
}

pub fn gauss_map(rho: &RotationNumber) -> Result<RotationNumber> {
    if rho.quotients.len() < 2 {
        return Err(LabError::InsufficientDepth(
            "gauss map needs at least two quotients".into(),
        ));
    }
    let value = 1.0 / rho.value - rho.quotients[0] as f64;
    RotationNumber::build(value, rho.quotients[1..].to_vec(), rho.numerically_rational)
}

/// Statement about the stored truncation only.
pub fn is_bounded_type(rho: &RotationNumber, bound: u64) -> bool {
    rho.quotients.iter().all(|&r| r <= bound)
}

/// Analytic Gauss map `x -> frac(1/x)`.
pub fn gauss(x: f64) -> f64 {
    let a = 1.0 / x;
    a - a.floor()
}
