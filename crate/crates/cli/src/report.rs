//! The `RunReport` every command produces, and its three renderings.
//!
//! JSON (one object per line, `schema: 1`):
//!
//! ```text
//! {"schema":1,"command":"exact","params":{...},"results":[{"label":"s","exact":"142/1","decimal":142.0}],
//!  "checks":[],"estimate":null,"passed":true,"elapsed_ms":3}
//! ```
//!
//! `estimate` is filled only by `simulate`; `elapsed_ms` is `null` under
//! `--no-timing`.

use std::collections::BTreeMap;
use std::io::{self, Write};

use ehrenfest::scalar::{to_exact_string, to_f64};
use ehrenfest::simulator::HittingEstimate;
use ehrenfest::verify::CheckOutcome;
use ehrenfest::ExactScalar;
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

pub const SIMULATE_CSV_HEADER: [&str; 7] = ["mean", "std_error", "reps", "truncated", "ci95_low", "ci95_high", "seed"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledValue {
    pub label: String,
    pub exact: String,
    pub decimal: f64,
}

impl LabeledValue {
    pub fn new(label: impl Into<String>, value: &ExactScalar) -> Self {
        Self { label: label.into(), exact: to_exact_string(value), decimal: to_f64(value) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub urns: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub balls: Option<u32>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into(), urns: None, balls: None }
    }
}

impl From<CheckOutcome> for Check {
    fn from(c: CheckOutcome) -> Self {
        Self { name: c.name.to_string(), passed: c.passed, detail: c.detail, urns: Some(c.urns), balls: Some(c.balls) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    #[serde(flatten)]
    pub estimate: HittingEstimate,
    pub exact: String,
    pub standardized_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: &'static str,
    pub params: BTreeMap<&'static str, Value>,
    pub results: Vec<LabeledValue>,
    pub checks: Vec<Check>,
    pub estimate: Option<Estimate>,
    pub passed: bool,
    pub elapsed_ms: Option<u64>,
}

impl RunReport {
    pub fn new(command: &'static str) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            command,
            params: BTreeMap::new(),
            results: Vec::new(),
            checks: Vec::new(),
            estimate: None,
            passed: true,
            elapsed_ms: None,
        }
    }

    pub fn param(&mut self, key: &'static str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key, value.into());
        self
    }

    pub fn result(&mut self, label: impl Into<String>, value: &ExactScalar) -> &mut Self {
        self.results.push(LabeledValue::new(label, value));
        self
    }

    pub fn check(&mut self, check: Check) -> &mut Self {
        self.passed &= check.passed;
        self.checks.push(check);
        self
    }

    pub fn write_json(&self, out: &mut impl Write) -> io::Result<()> {
        serde_json::to_writer(&mut *out, self)?;
        writeln!(out)
    }

    pub fn write_csv(&self, out: &mut impl Write) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if let Some(e) = &self.estimate {
            w.write_record(SIMULATE_CSV_HEADER)?;
            let h = &e.estimate;
            w.write_record([
                h.mean.to_string(),
                h.std_error.to_string(),
                h.replications_completed.to_string(),
                h.truncated_count.to_string(),
                h.ci95_low.to_string(),
                h.ci95_high.to_string(),
                h.seed.to_string(),
            ])?;
        } else if !self.checks.is_empty() && self.results.is_empty() {
            w.write_record(["name", "urns", "balls", "passed", "detail"])?;
            for c in &self.checks {
                let opt = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
                w.write_record([c.name.clone(), opt(c.urns), opt(c.balls), c.passed.to_string(), c.detail.clone()])?;
            }
        } else {
            w.write_record(["label", "exact", "decimal"])?;
            for r in &self.results {
                w.write_record([r.label.clone(), r.exact.clone(), r.decimal.to_string()])?;
            }
        }
        w.flush()
    }

    pub fn write_table(&self, out: &mut impl Write) -> io::Result<()> {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={}", plain(v))).collect();
        writeln!(out, "{} ({})", self.command, params.join(", "))?;
        if !self.results.is_empty() {
            let width = self.results.iter().map(|r| r.label.len()).max().unwrap_or(0);
            for r in &self.results {
                writeln!(out, "  {:<width$}  {:>24}  {}", r.label, r.exact, r.decimal)?;
            }
        }
        if let Some(e) = &self.estimate {
            let h = &e.estimate;
            writeln!(out, "  mean        {:.6} (std error {:.6})", h.mean, h.std_error)?;
            writeln!(out, "  95% CI      [{:.6}, {:.6}]", h.ci95_low, h.ci95_high)?;
            writeln!(out, "  completed   {} (truncated {})", h.replications_completed, h.truncated_count)?;
            writeln!(out, "  exact       {} (z = {:+.3})", e.exact, e.standardized_error)?;
            writeln!(out, "  seed        {}", h.seed)?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        for c in &self.checks {
            let cell = match (c.urns, c.balls) {
                (Some(n), Some(m)) => format!(" n={n} M={m}"),
                _ => String::new(),
            };
            writeln!(out, "  [{}] {}{cell} {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail)?;
        }
        if !self.checks.is_empty() {
            writeln!(out, "{} of {} checks passed", self.checks.len() - failed, self.checks.len())?;
        }
        if let Some(ms) = self.elapsed_ms {
            writeln!(out, "elapsed {ms} ms")?;
        }
        Ok(())
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
