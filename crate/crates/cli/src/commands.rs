//! The four subcommands. Each returns its report; writing files and choosing
//! the exit code is left to the caller.

use std::path::Path;
use std::time::Instant;

use ginexpm::problems::{generate_instance, load_instance, save_instance, starting_point, SpectrahedronLSQ};
use ginexpm::sets::Spectrahedron;
use ginexpm::solver::monitor::{monitor_armijo, monitor_complexity, monitor_descent, ComplexityInputs};
use ginexpm::solver::{
    solve_armijo, solve_constant, IterationRecord, MonitorReport, ProjectionMode,
    SolveOptions, MONITOR_RTOL,
};
use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, ExperimentConfig};
use crate::report::{Environment, ReportRow, RunReport, RunSummary};
use crate::CliError;

pub fn instance_for(cfg: &ExperimentConfig) -> Result<SpectrahedronLSQ, CliError> {
    match &cfg.instance {
        Some(path) => load_instance(path).map_err(|e| CliError::Run(format!("{}: {e}", path.display()))),
        None => generate_instance(cfg.n, cfg.m(), cfg.omega, cfg.density(), cfg.seed)
            .map_err(|e| CliError::Usage(e.to_string())),
    }
}

fn variant_name(algo: Algorithm, proj: ProjectionMode) -> String {
    let proj = match proj {
        ProjectionMode::Inexact => "inexact",
        ProjectionMode::Exact => "exact",
    };
    format!("{}-{proj}", algo.as_str())
}

/// One solve, timed around the solver call only.
pub fn solve_one(
    inst: &SpectrahedronLSQ,
    cfg: &ExperimentConfig,
    algo: Algorithm,
    proj: ProjectionMode,
    beta: f64,
    gamma3: f64,
) -> Result<(RunSummary, Vec<IterationRecord>), CliError> {
    let n = inst.n();
    let set = Spectrahedron::new(n).map_err(|e| CliError::Usage(e.to_string()))?;
    let x0 = starting_point(beta, n).map_err(|e| CliError::Usage(e.to_string()))?;
    let opts = SolveOptions::default();
    let name = variant_name(algo, proj);
    let (outcome, elapsed) = match algo {
        Algorithm::Constant => {
            let c = cfg.constant_config(inst.lipschitz_constant(), gamma3, proj)?;
            let t = Instant::now();
            let r = solve_constant(inst, &set, x0, &c, &opts);
            (r, t.elapsed().as_secs_f64())
        }
        Algorithm::Armijo => {
            let c = cfg.armijo_config(proj)?;
            let t = Instant::now();
            let r = solve_armijo(inst, &set, x0, &c, &opts);
            (r, t.elapsed().as_secs_f64())
        }
    };
    Ok(match outcome {
        Ok(res) => (RunSummary::from_result(&name, &res, elapsed), res.records),
        Err(e) => (RunSummary::failed(&name, &e), Vec::new()),
    })
}

fn report(command: &str, cfg: &ExperimentConfig, inst: &SpectrahedronLSQ, rows: Vec<ReportRow>) -> RunReport {
    RunReport {
        command: command.to_string(),
        config: cfg.clone(),
        instance: *inst.meta(),
        lipschitz: inst.lipschitz_constant(),
        rows,
        environment: Environment::current(),
    }
}

/// Writes the instance container to `out` and its parameters as JSON next
/// to it (or to `json` when given).
pub fn cmd_generate(cfg: &ExperimentConfig) -> Result<SpectrahedronLSQ, CliError> {
    cfg.validate()?;
    let out = cfg
        .out
        .as_ref()
        .ok_or_else(|| CliError::Usage("generate needs --out".into()))?;
    let inst = generate_instance(cfg.n, cfg.m(), cfg.omega, cfg.density(), cfg.seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    save_instance(&inst, out).map_err(|e| CliError::Run(format!("{}: {e}", out.display())))?;
    let meta_path = cfg.json.clone().unwrap_or_else(|| {
        let mut p = out.clone().into_os_string();
        p.push(".json");
        p.into()
    });
    let meta = serde_json::json!({
        "meta": inst.meta(),
        "nnz": inst.a().nnz(),
        "lipschitz": inst.lipschitz_constant(),
    });
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta).expect("plain data") + "\n")
        .map_err(|e| CliError::Run(format!("{}: {e}", meta_path.display())))?;
    Ok(inst)
}

/// Constant-step runs over every `gamma3_bar`, same instance and start.
pub fn cmd_sweep_gamma3(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let inst = instance_for(cfg)?;
    let meta = *inst.meta();
    let mut rows = Vec::new();
    for &beta in &cfg.beta {
        for &g in &cfg.gamma3 {
            let (run, _) = solve_one(&inst, cfg, Algorithm::Constant, cfg.proj, beta, g)?;
            rows.push(ReportRow {
                n: meta.n,
                m: meta.m,
                omega: meta.omega,
                beta,
                gamma3: Some(g),
                runs: vec![run],
            });
        }
    }
    Ok(report("sweep-gamma3", cfg, &inst, rows))
}

pub const COMPARE_VARIANTS: [(Algorithm, ProjectionMode); 4] = [
    (Algorithm::Constant, ProjectionMode::Inexact),
    (Algorithm::Constant, ProjectionMode::Exact),
    (Algorithm::Armijo, ProjectionMode::Inexact),
    (Algorithm::Armijo, ProjectionMode::Exact),
];

/// Both algorithms with both projections, per starting point. The constant
/// step uses the first `gamma3` value.
pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let inst = instance_for(cfg)?;
    let meta = *inst.meta();
    let g = cfg.gamma3[0];
    let mut rows = Vec::new();
    for &beta in &cfg.beta {
        let mut runs = Vec::new();
        for (algo, proj) in COMPARE_VARIANTS {
            runs.push(solve_one(&inst, cfg, algo, proj, beta, g)?.0);
        }
        rows.push(ReportRow {
            n: meta.n,
            m: meta.m,
            omega: meta.omega,
            beta,
            gamma3: None,
            runs,
        });
    }
    Ok(report("compare", cfg, &inst, rows))
}

/// Everything needed to re-evaluate the monitors of a finished run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunLog {
    pub config: ExperimentConfig,
    pub algo: Algorithm,
    pub proj: ProjectionMode,
    pub beta: f64,
    pub gamma3: f64,
    pub lipschitz: f64,
    pub records: Vec<IterationRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyEntry {
    pub variant: String,
    pub beta: f64,
    pub gamma3: f64,
    pub passed: bool,
    pub monitors: MonitorReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifySummary {
    pub tolerance: f64,
    pub passed: bool,
    pub entries: Vec<VerifyEntry>,
}

/// Recomputes every monitor from the raw records of a log.
pub fn verify_log(log: &RunLog) -> Result<MonitorReport, CliError> {
    let records = &log.records;
    let f_best = records
        .iter()
        .flat_map(|r| [r.f, r.f_next])
        .fold(f64::INFINITY, f64::min);
    let inputs = ComplexityInputs {
        f_star: f_best.is_finite().then_some(f_best),
        ..Default::default()
    };
    Ok(match log.algo {
        Algorithm::Constant => {
            let c = log
                .config
                .constant_config(log.lipschitz, log.gamma3, log.proj)?
                .constants(Some(log.lipschitz));
            let mut report = monitor_descent(records, &c, MONITOR_RTOL);
            report.extend(monitor_complexity(records, &c, &inputs, MONITOR_RTOL));
            report
        }
        Algorithm::Armijo => {
            let c = log.config.armijo_config(log.proj)?.constants(Some(log.lipschitz));
            monitor_armijo(records, &c, &inputs, MONITOR_RTOL)
        }
    })
}

/// One log, or an array of them as written for several `beta` values.
pub fn read_logs(path: &Path) -> Result<Vec<RunLog>, CliError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(Box<RunLog>),
        Many(Vec<RunLog>),
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Run(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text).map_err(|e| CliError::Run(format!("{}: {e}", path.display())))? {
        OneOrMany::One(log) => Ok(vec![*log]),
        OneOrMany::Many(logs) => Ok(logs),
    }
}

/// Re-evaluates a saved log, or runs the configured algorithm for every
/// `beta` and evaluates the fresh records. Fresh logs are returned so the
/// caller can save them.
pub fn cmd_verify(cfg: &ExperimentConfig, records: Option<&Path>) -> Result<(VerifySummary, Vec<RunLog>), CliError> {
    let mut logs = Vec::new();
    let fresh = records.is_none();
    match records {
        Some(path) => logs = read_logs(path)?,
        None => {
            cfg.validate()?;
            let inst = instance_for(cfg)?;
            let g = cfg.gamma3[0];
            for &beta in &cfg.beta {
                let (run, records) = solve_one(&inst, cfg, cfg.algo, cfg.proj, beta, g)?;
                if let Some(e) = run.error {
                    return Err(if run.strict_violation { CliError::Monitor(e) } else { CliError::Run(e) });
                }
                logs.push(RunLog {
                    config: cfg.clone(),
                    algo: cfg.algo,
                    proj: cfg.proj,
                    beta,
                    gamma3: g,
                    lipschitz: inst.lipschitz_constant(),
                    records,
                });
            }
        }
    }
    let mut entries = Vec::new();
    for log in &logs {
        let monitors = verify_log(log)?;
        entries.push(VerifyEntry {
            variant: variant_name(log.algo, log.proj),
            beta: log.beta,
            gamma3: log.gamma3,
            passed: monitors.passed(MONITOR_RTOL),
            monitors,
        });
    }
    let summary = VerifySummary {
        tolerance: MONITOR_RTOL,
        passed: entries.iter().all(|e| e.passed),
        entries,
    };
    Ok((summary, if fresh { logs } else { Vec::new() }))
}
