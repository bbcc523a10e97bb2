//! Machine-readable reports: one named check per verified property, with the
//! residual, its tolerance and the worst sample point. The JSON layout is the
//! stable contract; the text table is for humans.

use serde::Serialize;

use crate::dkp::DkpCheck;
use crate::holonomy::HolonomyReport;

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub seed: u64,
    pub version: String,
    pub command: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    pub worst_point: [f64; 3],
}

impl CheckResult {
    pub fn new(name: impl Into<String>, residual: f64, tol: f64, worst_point: [f64; 3]) -> Self {
        CheckResult {
            name: name.into(),
            residual,
            tol,
            pass: residual <= tol,
            worst_point,
        }
    }

    /// A boolean condition rendered as a 0/1 residual against tolerance 1/2.
    pub fn flag(name: impl Into<String>, ok: bool, worst_point: [f64; 3]) -> Self {
        CheckResult {
            name: name.into(),
            residual: if ok { 0.0 } else { 1.0 },
            tol: 0.5,
            pass: ok,
            worst_point,
        }
    }
}

/// Tracks the worst residual over a stream of (value, point) observations.
#[derive(Debug, Clone, Copy)]
pub struct Worst {
    pub residual: f64,
    pub point: [f64; 3],
}

impl Worst {
    pub fn new() -> Worst {
        Worst {
            residual: 0.0,
            point: [0.0; 3],
        }
    }

    pub fn update(&mut self, residual: f64, point: [f64; 3]) {
        if residual > self.residual {
            self.residual = residual;
            self.point = point;
        }
    }

    pub fn into_check(self, name: impl Into<String>, tol: f64) -> CheckResult {
        CheckResult::new(name, self.residual, tol, self.point)
    }
}

impl Default for Worst {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub meta: Meta,
    pub checks: Vec<CheckResult>,
    pub verdict: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<HolonomyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dkp: Option<DkpCheck>,
    pub wall_time_ms: u64,
}

impl Report {
    pub fn new(meta: Meta) -> Report {
        Report {
            meta,
            checks: Vec::new(),
            verdict: "pass".into(),
            notes: Vec::new(),
            classification: None,
            dkp: None,
            wall_time_ms: 0,
        }
    }

    pub fn push(&mut self, check: CheckResult) {
        if !check.pass {
            self.verdict = "fail".into();
        }
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: Vec<CheckResult>) {
        for check in checks {
            self.push(check);
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width table for terminal output.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<44} {:>10} {:>9} {:>5}  worst point\n",
            "check", "residual", "tol", "pass"
        ));
        out.push_str(&format!("{}\n", "-".repeat(96)));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<44} {:>10.3e} {:>9.1e} {:>5}  ({:+.3}, {:+.3}, {:+.3})\n",
                c.name,
                c.residual,
                c.tol,
                if c.pass { "PASS" } else { "FAIL" },
                c.worst_point[0],
                c.worst_point[1],
                c.worst_point[2]
            ));
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out.push_str(&format!(
            "verdict: {} ({} checks, {} ms)\n",
            self.verdict,
            self.checks.len(),
            self.wall_time_ms
        ));
        out
    }
}
