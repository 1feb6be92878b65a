//! Run summaries, CSV rendering and JSON reports.

use std::io::Write;

use ginexpm::problems::InstanceMeta;
use ginexpm::solver::{MonitorReport, SolveResult, MONITOR_RTOL};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Outcome of one solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// `constant-inexact`, `armijo-exact`, ...
    pub variant: String,
    pub f: f64,
    pub iterations: usize,
    pub time_s: f64,
    /// Constant step, or the mean trial step of an Armijo run.
    pub alpha: f64,
    pub min_tau: Option<f64>,
    pub mean_p: Option<f64>,
    pub max_p: Option<usize>,
    pub stop: String,
    pub monitors: MonitorReport,
    pub error: Option<String>,
    /// The run failed on a strict-mode monitor violation.
    pub strict_violation: bool,
}

impl RunSummary {
    pub fn from_result<P>(variant: &str, res: &SolveResult<P>, time_s: f64) -> Self {
        let alpha = if res.records.is_empty() {
            f64::NAN
        } else {
            res.records.iter().map(|r| r.alpha).sum::<f64>() / res.records.len() as f64
        };
        Self {
            variant: variant.to_string(),
            f: res.f,
            iterations: res.iterations,
            time_s,
            alpha,
            min_tau: res.records.iter().filter_map(|r| r.tau).reduce(f64::min),
            mean_p: res.mean_rank(),
            max_p: res.max_rank(),
            stop: res.stop.as_str().to_string(),
            monitors: res.monitors.clone(),
            error: None,
            strict_violation: false,
        }
    }

    pub fn failed(variant: &str, error: &ginexpm::Error) -> Self {
        Self {
            variant: variant.to_string(),
            f: f64::NAN,
            iterations: 0,
            time_s: f64::NAN,
            alpha: f64::NAN,
            min_tau: None,
            mean_p: None,
            max_p: None,
            stop: "error".into(),
            monitors: MonitorReport::default(),
            error: Some(error.to_string()),
            strict_violation: matches!(error, ginexpm::Error::MonitorViolation { .. }),
        }
    }

    /// `pass`, `fail` or `error`.
    pub fn verdict(&self) -> &'static str {
        if self.error.is_some() {
            "error"
        } else if self.monitors.passed(MONITOR_RTOL) {
            "pass"
        } else {
            "fail"
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub m: usize,
    pub omega: usize,
    pub beta: f64,
    pub gamma3: Option<f64>,
    pub runs: Vec<RunSummary>,
}

impl ReportRow {
    pub fn verdict(&self) -> &'static str {
        let verdicts: Vec<&str> = self.runs.iter().map(|r| r.verdict()).collect();
        if verdicts.contains(&"error") {
            "error"
        } else if verdicts.contains(&"fail") {
            "fail"
        } else {
            "pass"
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: ExperimentConfig,
    pub instance: InstanceMeta,
    pub lipschitz: f64,
    pub rows: Vec<ReportRow>,
    pub environment: Environment,
}

impl RunReport {
    pub fn runs(&self) -> impl Iterator<Item = &RunSummary> {
        self.rows.iter().flat_map(|r| &r.runs)
    }

    pub fn any_error(&self) -> bool {
        self.runs().any(|r| r.error.is_some())
    }

    pub fn any_strict_violation(&self) -> bool {
        self.runs().any(|r| r.strict_violation)
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<(), CliError> {
        serde_json::to_writer_pretty(w, self).map_err(|e| CliError::Run(e.to_string()))
    }
}

/// `x` with six significant digits.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..6).contains(&e) {
        format!("{:.*}", (5 - e).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

pub fn seconds(t: f64) -> String {
    if t.is_finite() {
        format!("{t:.1}")
    } else {
        "nan".into()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn mean_p(v: Option<f64>) -> String {
    v.map(|p| format!("{p:.2}")).unwrap_or_default()
}

/// One row per `gamma3_bar`.
pub fn write_sweep_csv<W: Write>(report: &RunReport, w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "beta", "gamma3", "f", "it", "time_s", "alpha", "mean_p", "max_p", "stop", "monitors",
        "violations", "error",
    ])?;
    for row in &report.rows {
        for run in &row.runs {
            out.write_record([
                row.beta.to_string(),
                opt(row.gamma3),
                sig6(run.f),
                run.iterations.to_string(),
                seconds(run.time_s),
                run.alpha.to_string(),
                mean_p(run.mean_p),
                opt(run.max_p),
                run.stop.clone(),
                run.verdict().to_string(),
                run.monitors.violation_count().to_string(),
                run.error.clone().unwrap_or_default(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One row per `(instance, beta)` with the four variants
/// side by side.
pub fn write_compare_csv<W: Write>(report: &RunReport, w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    let variants: Vec<String> = report
        .rows
        .first()
        .map(|r| r.runs.iter().map(|run| run.variant.clone()).collect())
        .unwrap_or_default();
    let mut header: Vec<String> = ["n", "m", "omega", "beta"].map(String::from).to_vec();
    for v in &variants {
        for col in ["f", "it", "time_s", "mean_p", "monitors"] {
            header.push(format!("{v}_{col}"));
        }
    }
    header.extend(["monitors".to_string(), "errors".to_string()]);
    out.write_record(&header)?;
    for row in &report.rows {
        let mut rec = vec![row.n.to_string(), row.m.to_string(), row.omega.to_string(), row.beta.to_string()];
        for run in &row.runs {
            rec.extend([
                sig6(run.f),
                run.iterations.to_string(),
                seconds(run.time_s),
                mean_p(run.mean_p),
                run.verdict().to_string(),
            ]);
        }
        rec.push(row.verdict().to_string());
        rec.push(
            row.runs
                .iter()
                .filter_map(|r| r.error.as_ref().map(|e| format!("{}: {e}", r.variant)))
                .collect::<Vec<_>>()
                .join("; "),
        );
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}
