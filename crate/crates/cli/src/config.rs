//! Experiment configuration: a flat `key = value` file, every key
//! overridable from the command line.

use std::path::PathBuf;

use ginexpm::problems::default_density;
use ginexpm::schedules::{ScheduleKind, SummableSchedule};
use ginexpm::solver::{
    constant_alpha_from_gamma, ArmijoConfig, ConstantStepConfig, ProjectionMode, DEFAULT_BBAR,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Constant,
    Armijo,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::Armijo => "armijo",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algo: Algorithm,
    pub proj: ProjectionMode,
    pub n: usize,
    /// Defaults to `2 n`.
    pub m: Option<usize>,
    pub omega: usize,
    /// Defaults to [`default_density`].
    pub density: Option<f64>,
    pub seed: u64,
    /// Load this instance instead of generating one.
    pub instance: Option<PathBuf>,
    pub beta: Vec<f64>,
    pub gamma3: Vec<f64>,
    pub schedule: ScheduleKind,
    pub bbar: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub strict: bool,
    pub out: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algo: Algorithm::Constant,
            proj: ProjectionMode::Inexact,
            n: 200,
            m: None,
            omega: 10,
            density: None,
            seed: 1,
            instance: None,
            beta: vec![0.0],
            gamma3: vec![0.0, 0.1, 0.2, 0.3, 0.4],
            schedule: ScheduleKind::Logarithmic,
            bbar: DEFAULT_BBAR,
            tol: 1e-4,
            max_iter: 10_000,
            strict: false,
            out: None,
            json: None,
        }
    }
}

/// Keys accepted in config files and as `--key value` flags.
pub const KEYS: &[&str] = &[
    "algo", "proj", "n", "m", "omega", "density", "seed", "instance", "beta", "gamma3",
    "schedule", "bbar", "tol", "max-iter", "strict", "out", "json",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value for {key}: {value:?}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value.split(',').map(|v| parse(key, v)).collect()
}

fn parse_optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>, CliError> {
    match value.trim() {
        "" | "auto" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

impl ExperimentConfig {
    /// Sets one key; `max_iter` and `max-iter` are both accepted.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key.trim().replace('_', "-").as_str() {
            "algo" => {
                self.algo = match value {
                    "constant" => Algorithm::Constant,
                    "armijo" => Algorithm::Armijo,
                    _ => return Err(CliError::Usage(format!("unknown algorithm {value:?}"))),
                }
            }
            "proj" => {
                self.proj = match value {
                    "inexact" => ProjectionMode::Inexact,
                    "exact" => ProjectionMode::Exact,
                    _ => return Err(CliError::Usage(format!("unknown projection {value:?}"))),
                }
            }
            "n" => self.n = parse("n", value)?,
            "m" => self.m = parse_optional("m", value)?,
            "omega" => self.omega = parse("omega", value)?,
            "density" => self.density = parse_optional("density", value)?,
            "seed" => self.seed = parse("seed", value)?,
            "instance" => self.instance = (!value.is_empty()).then(|| PathBuf::from(value)),
            "beta" => self.beta = parse_list("beta", value)?,
            "gamma3" => self.gamma3 = parse_list("gamma3", value)?,
            "schedule" => {
                self.schedule = match value {
                    "harmonic" => ScheduleKind::Harmonic,
                    "log" | "logarithmic" => ScheduleKind::Logarithmic,
                    _ => return Err(CliError::Usage(format!("unknown schedule {value:?}"))),
                }
            }
            "bbar" => self.bbar = parse("bbar", value)?,
            "tol" => self.tol = parse("tol", value)?,
            "max-iter" => self.max_iter = parse("max-iter", value)?,
            "strict" => self.strict = parse("strict", value)?,
            "out" => self.out = (!value.is_empty()).then(|| PathBuf::from(value)),
            "json" => self.json = (!value.is_empty()).then(|| PathBuf::from(value)),
            other => return Err(CliError::Usage(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// `key = value` lines; `#` starts a comment.
    pub fn from_kv(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    pub fn apply_kv(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key, value)
                .map_err(|e| CliError::Usage(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    /// The same format [`from_kv`](Self::from_kv) reads.
    pub fn to_kv(&self) -> String {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let opt = |v: Option<String>| v.unwrap_or_else(|| "auto".into());
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let schedule = match self.schedule {
            ScheduleKind::Harmonic => "harmonic",
            ScheduleKind::Logarithmic => "logarithmic",
        };
        let proj = match self.proj {
            ProjectionMode::Inexact => "inexact",
            ProjectionMode::Exact => "exact",
        };
        [
            format!("algo = {}", self.algo.as_str()),
            format!("proj = {proj}"),
            format!("n = {}", self.n),
            format!("m = {}", opt(self.m.map(|m| m.to_string()))),
            format!("omega = {}", self.omega),
            format!("density = {}", opt(self.density.map(|d| d.to_string()))),
            format!("seed = {}", self.seed),
            format!("instance = {}", path(&self.instance)),
            format!("beta = {}", list(&self.beta)),
            format!("gamma3 = {}", list(&self.gamma3)),
            format!("schedule = {schedule}"),
            format!("bbar = {}", self.bbar),
            format!("tol = {}", self.tol),
            format!("max-iter = {}", self.max_iter),
            format!("strict = {}", self.strict),
            format!("out = {}", path(&self.out)),
            format!("json = {}", path(&self.json)),
        ]
        .join("\n")
            + "\n"
    }

    pub fn m(&self) -> usize {
        self.m.unwrap_or(2 * self.n)
    }

    pub fn density(&self) -> f64 {
        self.density.unwrap_or_else(|| default_density(self.n, self.m()))
    }

    pub fn schedule(&self) -> Result<SummableSchedule, CliError> {
        SummableSchedule::new(self.schedule, self.bbar).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Constant-step configuration for one value of `gamma3_bar`, with the
    /// step derived from `L`.
    pub fn constant_config(&self, lipschitz: f64, gamma3: f64, proj: ProjectionMode) -> Result<ConstantStepConfig, CliError> {
        let cfg = ConstantStepConfig {
            alpha: constant_alpha_from_gamma(lipschitz, gamma3),
            gamma3_bar: gamma3,
            schedule: Some(self.schedule()?),
            projection: proj,
            max_iter: self.max_iter,
            stop_tol: self.tol,
            strict: self.strict,
            ..ConstantStepConfig::default()
        };
        cfg.validate(Some(lipschitz)).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    pub fn armijo_config(&self, proj: ProjectionMode) -> Result<ArmijoConfig, CliError> {
        let cfg = ArmijoConfig {
            projection: proj,
            max_iter: self.max_iter,
            stop_tol: self.tol,
            strict: self.strict,
            ..ArmijoConfig::default()
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    /// Everything that can be checked before an instance exists.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Usage(msg));
        if self.instance.is_none() {
            if self.n < 2 || self.m() < self.n {
                return bad(format!("need m >= n >= 2, got n = {}, m = {}", self.n, self.m()));
            }
            if self.omega < 2 {
                return bad(format!("need omega >= 2, got {}", self.omega));
            }
            let d = self.density();
            if !(d > 0.0 && d <= 1.0) {
                return bad(format!("density {d} outside (0, 1]"));
            }
        }
        if self.beta.is_empty() || self.beta.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return bad(format!("beta values must lie in [0, 1], got {:?}", self.beta));
        }
        if self.gamma3.is_empty() || self.gamma3.iter().any(|g| !(0.0..0.5).contains(g)) {
            return bad(format!("gamma3 values must lie in [0, 1/2), got {:?}", self.gamma3));
        }
        self.schedule()?;
        if !(self.tol >= 0.0) {
            return bad(format!("tol must be nonnegative, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max-iter must be positive".into());
        }
        for &g in &self.gamma3 {
            // any positive L exercises the same checks
            self.constant_config(1.0, g, self.proj)?;
        }
        self.armijo_config(self.proj)?;
        Ok(())
    }
}
