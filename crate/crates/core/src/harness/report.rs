use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{CheckName, Instance};

pub const SCHEMA_VERSION: u32 = 1;

/// One check at one level. `witness` is set on every failure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub check: CheckName,
    pub level: Option<u64>,
    pub passed: bool,
    /// p-adic digits behind every residue in `details` and `witness`
    pub precision: u32,
    pub details: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub instance: Instance,
    pub checks: Vec<CheckEntry>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub precision: u32,
    pub n_max: Option<u64>,
    pub instances: Vec<InstanceReport>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(precision: u32, n_max: Option<u64>, instances: Vec<InstanceReport>) -> Self {
        let passed = instances.iter().all(|i| i.passed);
        Self { schema_version: SCHEMA_VERSION, precision, n_max, instances, passed }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Instance, &CheckEntry)> {
        self.instances.iter().flat_map(|i| i.checks.iter().map(move |c| (&i.instance, c)))
    }

    /// The same report with every timing zeroed, for comparing runs.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        for inst in &mut out.instances {
            for c in &mut inst.checks {
                c.elapsed_ms = 0;
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verification report (schema {}, precision {})", self.schema_version, self.precision);
        for inst in &self.instances {
            let _ = writeln!(out, "instance N={} p={} r_max={}", inst.instance.tame, inst.instance.prime, inst.instance.r_max);
            for c in &inst.checks {
                let level = c.level.map(|l| format!("level {l}")).unwrap_or_else(|| "-".into());
                let mark = if c.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(out, "  {mark} {:<17} {:<10} k={} ({} ms)", c.check.as_str(), level, c.precision, c.elapsed_ms);
                if let Some(w) = &c.witness {
                    let _ = writeln!(out, "       witness: {w}");
                }
            }
        }
        let total = self.entries().count();
        let failed = self.entries().filter(|(_, c)| !c.passed).count();
        let _ = writeln!(out, "{} checks, {} failed: {}", total, failed, if self.passed { "PASS" } else { "FAIL" });
        out
    }
}
