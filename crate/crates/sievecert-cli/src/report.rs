//! JSON verification report.

use crate::config::Config;
use serde::Serialize;
use std::collections::BTreeMap;

pub const PASS: &str = "PASS";
pub const FAIL: &str = "FAIL";
pub const FALSIFICATION_PASSED: &str = "FALSIFICATION-PASSED";

/// Statuses that count as success for the exit code.
pub const PASSING: [&str; 3] = [PASS, "CERTIFIED", FALSIFICATION_PASSED];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimRecord {
    pub id: String,
    #[serde(rename = "paper_anchor")]
    pub anchor: String,
    pub kind: String,
    pub value: Option<f64>,
    pub err: Option<f64>,
    pub bound: Option<f64>,
    pub relation: String,
    pub status: String,
    pub margin: Option<f64>,
}

impl ClaimRecord {
    pub fn passed(&self) -> bool {
        PASSING.contains(&self.status.as_str())
    }
}

/// Keeps non-finite numbers out of the JSON document.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn verdict(ok: bool) -> String {
    if ok { PASS } else { FAIL }.to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub version: String,
    pub timestamp: u64,
    pub command: String,
    pub config: Config,
    pub claims: Vec<ClaimRecord>,
    pub summary: BTreeMap<String, usize>,
}

impl Report {
    pub fn new(command: &str, config: &Config, claims: Vec<ClaimRecord>) -> Report {
        let mut summary = BTreeMap::new();
        for c in &claims {
            *summary.entry(c.status.clone()).or_insert(0) += 1;
        }
        summary.insert("total".to_string(), claims.len());
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            command: command.to_string(),
            config: config.clone(),
            claims,
            summary,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.claims.iter().all(ClaimRecord::passed)
    }

    /// 0 when every claim passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields serialize") + "\n"
    }
}
