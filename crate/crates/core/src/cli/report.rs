//! Machine-readable reports. Every numeric comparison is a [`Comparison`];
//! complex numbers serialize as `{re, im}`.

use serde::Serialize;

use crate::real::rel_err;
use crate::Scalar;

use super::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<Scalar> for Cx {
    fn from(z: Scalar) -> Self {
        Cx { re: z.re, im: z.im }
    }
}

impl From<f64> for Cx {
    fn from(x: f64) -> Self {
        Cx { re: x, im: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub name: String,
    pub lhs: Cx,
    pub rhs: Cx,
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Comparison {
    /// `|lhs − rhs| / max(|lhs|, |rhs|)` against `tol`.
    pub fn relative(name: impl Into<String>, lhs: Scalar, rhs: Scalar, tol: f64) -> Self {
        let e = rel_err(lhs, rhs, 1e-300);
        Comparison { name: name.into(), lhs: lhs.into(), rhs: rhs.into(), rel_err: e, tol, pass: e < tol }
    }

    /// A residual that should vanish: `lhs = residual`, `rhs = 0`.
    pub fn residual(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Comparison {
            name: name.into(),
            lhs: residual.into(),
            rhs: 0.0.into(),
            rel_err: residual,
            tol,
            pass: residual < tol,
        }
    }

    /// Exact equality of two counts.
    pub fn count(name: impl Into<String>, lhs: usize, rhs: usize) -> Self {
        let (l, r) = (lhs as f64, rhs as f64);
        let e = (l - r).abs();
        Comparison { name: name.into(), lhs: l.into(), rhs: r.into(), rel_err: e, tol: 0.5, pass: lhs == rhs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Value {
    pub name: String,
    pub value: Cx,
}

impl Value {
    pub fn new(name: impl Into<String>, value: impl Into<Cx>) -> Self {
        Value { name: name.into(), value: value.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Section {
    pub name: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<Value>,
    pub comparisons: Vec<Comparison>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Section { name: name.into(), values: Vec::new(), comparisons: Vec::new() }
    }

    pub fn pass(&self) -> bool {
        self.comparisons.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub sections: Vec<Section>,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, sections: Vec<Section>) -> Self {
        let all = sections.iter().flat_map(|s| &s.comparisons);
        let passed = all.clone().filter(|c| c.pass).count();
        let failed = all.filter(|c| !c.pass).count();
        Report { command: command.into(), config: config.clone(), sections, passed, failed, pass: failed == 0 }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Plain-text rendering: one line per value and comparison.
    pub fn to_table(&self) -> String {
        let mut out = format!("{} — {} passed, {} failed\n", self.command, self.passed, self.failed);
        for s in &self.sections {
            out.push_str(&format!("\n[{}]\n", s.name));
            for v in &s.values {
                out.push_str(&format!("  {:<52} {:>24.16e} {:>+24.16e}i\n", v.name, v.value.re, v.value.im));
            }
            for c in &s.comparisons {
                out.push_str(&format!(
                    "  {:<52} rel_err {:>10.3e}  tol {:>8.1e}  {}\n",
                    c.name,
                    c.rel_err,
                    c.tol,
                    if c.pass { "PASS" } else { "FAIL" }
                ));
            }
        }
        out
    }
}

/// Error payload printed on failure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub error: ErrorBody,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}

impl ErrorReport {
    pub fn new(kind: impl Into<String>, message: impl Into<String>) -> Self {
        ErrorReport { error: ErrorBody { kind: kind.into(), message: message.into() } }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("error serializes") + "\n"
    }
}
