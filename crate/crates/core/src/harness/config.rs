use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{HarnessError, Result};
use crate::arith::gcd;
use crate::exactlin::is_prime;
use crate::modsym::{LevelParams, MAX_LEVEL};

/// Default working precision in p-adic digits.
pub const DEFAULT_PRECISION: u32 = 20;

/// A tower `N p^r`, `r = 1..=r_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instance {
    pub tame: u64,
    pub prime: u64,
    pub r_max: u32,
}

impl Instance {
    pub fn new(tame: u64, prime: u64, r_max: u32) -> Self {
        Self { tame, prime, r_max }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(format!("instance {self}: {msg}")));
        if !is_prime(self.prime) {
            return bad(format!("{} is not prime", self.prime));
        }
        if self.tame == 0 || gcd(self.tame as i64, self.prime as i64) != 1 {
            return bad("tame level must be positive and prime to p".into());
        }
        if self.tame * self.prime <= 4 {
            return bad("need N p > 4".into());
        }
        if self.r_max == 0 {
            return bad("r_max must be at least 1".into());
        }
        let too_big = self.prime.checked_pow(self.r_max).and_then(|q| q.checked_mul(self.tame)).is_none_or(|m| m >= MAX_LEVEL);
        if too_big {
            return bad("level too large".into());
        }
        Ok(())
    }

    pub fn params(&self, r: u32) -> Result<LevelParams> {
        Ok(LevelParams::new(self.tame, self.prime, r)?)
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.tame, self.prime, self.r_max)
    }
}

/// The available checks, by command-line name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    Structure,
    HeckeIdentities,
    Idempotent,
    RankDuality,
    Control,
    Stabilization,
    Oracle,
}

impl CheckName {
    pub const ALL: [CheckName; 7] = [
        CheckName::Structure,
        CheckName::HeckeIdentities,
        CheckName::Idempotent,
        CheckName::RankDuality,
        CheckName::Control,
        CheckName::Stabilization,
        CheckName::Oracle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckName::Structure => "structure",
            CheckName::HeckeIdentities => "hecke-identities",
            CheckName::Idempotent => "idempotent",
            CheckName::RankDuality => "rank-duality",
            CheckName::Control => "control",
            CheckName::Stabilization => "stabilization",
            CheckName::Oracle => "oracle",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown check {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationConfig {
    pub instances: Vec<Instance>,
    #[serde(default = "default_precision")]
    pub precision: u32,
    /// coefficient bound; `None` picks the Sturm bound per level
    #[serde(default)]
    pub n_max: Option<u64>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub oracle: Option<PathBuf>,
    /// empty means every check (the oracle check only with an oracle file)
    #[serde(default)]
    pub checks: Vec<CheckName>,
}

fn default_precision() -> u32 {
    DEFAULT_PRECISION
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            instances: vec![Instance::new(5, 3, 2), Instance::new(1, 11, 1), Instance::new(11, 3, 1)],
            precision: DEFAULT_PRECISION,
            n_max: None,
            cache_dir: None,
            oracle: None,
            checks: Vec::new(),
        }
    }
}

impl VerificationConfig {
    pub fn validate(&self) -> Result<()> {
        for inst in &self.instances {
            inst.validate()?;
            crate::exactlin::ZpRing::new(inst.prime, self.precision)
                .map_err(|e| HarnessError::Config(format!("precision {}: {e}", self.precision)))?;
        }
        if self.precision == 0 {
            return Err(HarnessError::Config("precision must be positive".into()));
        }
        if self.n_max == Some(0) {
            return Err(HarnessError::Config("n_max must be positive".into()));
        }
        if self.checks.contains(&CheckName::Oracle) && self.oracle.is_none() {
            return Err(HarnessError::Config("the oracle check needs an oracle file".into()));
        }
        Ok(())
    }

    /// Checks to run, in a fixed order.
    pub fn selected_checks(&self) -> Vec<CheckName> {
        let mut out: Vec<CheckName> = if self.checks.is_empty() {
            CheckName::ALL.into_iter().filter(|c| *c != CheckName::Oracle || self.oracle.is_some()).collect()
        } else {
            self.checks.clone()
        };
        out.sort();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let c = VerificationConfig::default();
        c.validate().unwrap();
        assert!(!c.selected_checks().contains(&CheckName::Oracle));
    }

    #[test]
    fn small_levels_are_rejected() {
        let mut c = VerificationConfig { instances: vec![Instance::new(1, 3, 1)], ..Default::default() };
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
        c.instances = vec![Instance::new(6, 3, 1)];
        assert!(c.validate().is_err());
        c.instances = vec![Instance::new(5, 4, 1)];
        assert!(c.validate().is_err());
    }

    #[test]
    fn check_names_roundtrip() {
        for c in CheckName::ALL {
            assert_eq!(c.as_str().parse::<CheckName>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.as_str()));
        }
        assert!("nope".parse::<CheckName>().is_err());
    }

    #[test]
    fn config_from_json() {
        let c: VerificationConfig =
            serde_json::from_str(r#"{"instances":[{"tame":5,"prime":3,"r_max":2}],"checks":["control"]}"#).unwrap();
        assert_eq!(c.precision, DEFAULT_PRECISION);
        assert_eq!(c.selected_checks(), vec![CheckName::Control]);
    }
}
