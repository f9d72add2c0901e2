use std::path::{Path, PathBuf};

use critcircle::bounds::{GridSpec, DEFAULT_CUTOFF_B, DEFAULT_EPS, DEFAULT_K_GOOD};
use critcircle::circle_map::{solve_parameter, CriticalCircleMap, Family};
use critcircle::number_theory::{continued_fraction, RotationNumber};
use critcircle::siegel::{solve_tau, BlaschkeMap};
use critcircle::{LabError, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Quotient depth used for rotation-number targets.
const TARGET_DEPTH: usize = 60;
const SOLVE_BUDGET: u64 = 2_000_000;

/// Everything that determines the bytes of a run's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub family: Family,
    /// Direct family parameter; takes precedence over `theta`.
    pub param: Option<f64>,
    /// Rotation-number target, see [`parse_theta`].
    pub theta: String,
    pub levels: (usize, usize),
    pub grid: GridSpec,
    pub eps: f64,
    pub cutoff_b: f64,
    pub k_good: f64,
    pub samples: usize,
    pub seed: u64,
    pub res: usize,
    pub budget: usize,
    pub max_n: usize,
    /// Not part of the hash: moving a run elsewhere keeps its identity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            family: Family::Standard,
            param: None,
            theta: "golden".into(),
            levels: (1, 10),
            grid: GridSpec::default(),
            eps: DEFAULT_EPS,
            cutoff_b: DEFAULT_CUTOFF_B,
            k_good: DEFAULT_K_GOOD,
            samples: 100,
            seed: 0,
            res: 1024,
            budget: 2000,
            max_n: 6,
            out: None,
        }
    }
}

impl CampaignConfig {
    /// Sorted-key JSON without the output directory.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let v = serde_json::to_value(&c).expect("config serializes");
        serde_json::to_string(&v).expect("value serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// Overlay the keys present in a JSON file onto `self`.
    pub fn overlay_file(&self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Domain(format!("cannot read {}: {e}", path.display())))?;
        let patch: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| LabError::Domain(format!("bad config JSON: {e}")))?;
        let serde_json::Value::Object(patch) = patch else {
            return Err(LabError::Domain("config file must hold a JSON object".into()));
        };
        let mut base = serde_json::to_value(self).expect("config serializes");
        let obj = base.as_object_mut().expect("object");
        for (k, v) in patch {
            obj.insert(k, v);
        }
        serde_json::from_value(base).map_err(|e| LabError::Domain(format!("bad config: {e}")))
    }

    pub fn level_range(&self) -> Result<std::ops::RangeInclusive<usize>> {
        let (a, b) = self.levels;
        if a > b {
            return Err(LabError::Domain(format!("empty level range {a}..{b}")));
        }
        Ok(a..=b)
    }

    pub fn rotation_target(&self) -> Result<RotationNumber> {
        parse_theta(&self.theta)
    }

    pub fn circle_map(&self) -> Result<CriticalCircleMap> {
        if let Some(p) = self.param {
            check_param(p)?;
            return Ok(CriticalCircleMap::new(self.family, p));
        }
        let target = self.rotation_target()?;
        let s = solve_parameter(self.family, &target, SOLVE_BUDGET)?;
        Ok(CriticalCircleMap::new(self.family, s.param))
    }

    pub fn blaschke(&self) -> Result<BlaschkeMap> {
        if let Some(p) = self.param {
            check_param(p)?;
            return Ok(BlaschkeMap::new(p));
        }
        solve_tau(&self.rotation_target()?, SOLVE_BUDGET)
    }
}

fn check_param(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(LabError::Domain(format!("parameter {p} outside [0,1]")));
    }
    Ok(())
}

/// `golden`, a decimal in (0,1), or quotients `PREFIX;PERIOD` with
/// comma-separated entries (`5;1` is [5,1,1,...], `1,2` is [1,2,1,2,...]).
pub fn parse_theta(s: &str) -> Result<RotationNumber> {
    let s = s.trim();
    if s == "golden" {
        return Ok(RotationNumber::golden(TARGET_DEPTH));
    }
    if s.contains('.') {
        let x: f64 = s.parse().map_err(|_| LabError::Domain(format!("bad theta {s:?}")))?;
        return continued_fraction(x, TARGET_DEPTH);
    }
    let (prefix, period) = match s.split_once(';') {
        Some((a, b)) => (a, b),
        None => ("", s),
    };
    let list = |t: &str| -> Result<Vec<u64>> {
        t.split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| x.trim().parse().map_err(|_| LabError::Domain(format!("bad quotient {x:?}"))))
            .collect()
    };
    RotationNumber::eventually_periodic(&list(prefix)?, &list(period)?, TARGET_DEPTH)
}

pub fn parse_levels(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or("expected a..b")?;
    let a = a.parse().map_err(|_| format!("bad level {a:?}"))?;
    let b = b.parse().map_err(|_| format!("bad level {b:?}"))?;
    Ok((a, b))
}

pub fn parse_grid(s: &str) -> std::result::Result<GridSpec, String> {
    let (r, a) = s.split_once(['x', 'X']).ok_or("expected RxA")?;
    let radii = r.parse().map_err(|_| format!("bad radius count {r:?}"))?;
    let angles = a.parse().map_err(|_| format!("bad angle count {a:?}"))?;
    Ok(GridSpec { radii, angles })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let c = CampaignConfig {
            param: Some(0.25),
            levels: (4, 8),
            ..Default::default()
        };
        let back: CampaignConfig = serde_json::from_str(&c.canonical_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn out_dir_not_hashed() {
        let a = CampaignConfig::default();
        let b = CampaignConfig {
            out: Some("elsewhere".into()),
            ..Default::default()
        };
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn theta_forms() {
        assert_eq!(parse_theta("5;1").unwrap().quotients[..3], [5, 1, 1]);
        assert_eq!(parse_theta("1,2").unwrap().quotients[..4], [1, 2, 1, 2]);
        assert!(parse_theta("1.5").unwrap_err().is_usage());
        assert_eq!(parse_levels("4..8"), Ok((4, 8)));
        assert_eq!(parse_grid("16x32"), Ok(GridSpec { radii: 16, angles: 32 }));
    }
}
