//! Machine-readable run reports for the command-line tool.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{DccaError, Result};
use crate::fluctuation::{sign_log, FluctuationSet};
use crate::testkit::{TestConfig, TestOutcome};

/// One row of the per-scale table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub n: usize,
    pub windows: usize,
    pub discarded: usize,
    pub f2_cross: f64,
    pub f2_auto1: f64,
    pub f2_auto2: f64,
    pub rho: f64,
    /// `sign(F²_DCCA) · ln|F²_DCCA|`.
    pub sign_log_cross: f64,
    /// Rejection bound on `ρ` at this scale.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub inputs: Vec<String>,
    pub series_len: usize,
    pub config: TestConfig,
    pub table_checksum: String,
    pub seed: u64,
    pub elapsed_seconds: f64,
    pub scales: Vec<ScaleRow>,
    pub outcome: TestOutcome,
}

impl RunReport {
    pub fn new(
        config: &TestConfig,
        fl: &FluctuationSet,
        outcome: TestOutcome,
        table_checksum: String,
        inputs: Vec<String>,
        elapsed_seconds: f64,
    ) -> Self {
        let scales = outcome
            .scales
            .iter()
            .enumerate()
            .map(|(i, s)| ScaleRow {
                n: s.n,
                windows: s.windows,
                discarded: s.discarded,
                f2_cross: fl.f2_cross[i],
                f2_auto1: fl.f2_auto1[i],
                f2_auto2: fl.f2_auto2[i],
                rho: s.rho,
                sign_log_cross: sign_log(fl.f2_cross[i]),
                bound: s.bound,
            })
            .collect();
        Self {
            version: crate::VERSION.to_string(),
            inputs,
            series_len: fl.scales.series_len(),
            config: config.clone(),
            table_checksum,
            seed: config.seed,
            elapsed_seconds,
            scales,
            outcome,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| DccaError::Internal(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| DccaError::Parse { line: e.line(), msg: e.to_string() })
    }

    /// Per-scale table as CSV.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,windows,discarded,f2_cross,f2_auto1,f2_auto2,rho,sign_log_cross,bound\n");
        for r in &self.scales {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.n, r.windows, r.discarded, r.f2_cross, r.f2_auto1, r.f2_auto2, r.rho, r.sign_log_cross, r.bound
            );
        }
        s
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let o = &self.outcome;
        let p = if o.p_value < 1e-3 { format!("{:.1e}", o.p_value) } else { format!("{:.4}", o.p_value) };
        format!(
            "T = {:.4}, threshold = {:.4}, p = {p} (se {:.1e}), decision: {} at level {}",
            o.statistic,
            o.theta_star,
            o.p_value_stderr,
            if o.reject { "reject independence" } else { "do not reject" },
            o.level
        )
    }
}
