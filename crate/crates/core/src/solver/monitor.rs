//! Finite-horizon checks of the inequalities that drive the convergence
//! theory, evaluated on recorded runs.
//!
//! Each check produces signed slacks (negative = violated) normalised by a
//! per-check scale, so one relative tolerance serves all of them. Monitors
//! never trust slacks stored in the records: every quantity is recomputed
//! from the raw telemetry, which is what makes tampered logs detectable.

use serde::{Deserialize, Serialize};

use super::IterationRecord;
use crate::schedules::SummableSchedule;

/// Constants of a constant-step run needed to re-evaluate its inequalities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantStepConstants {
    pub alpha: f64,
    pub lipschitz: Option<f64>,
    pub gamma2_cap: f64,
    pub gamma3_bar: f64,
    pub schedule: Option<SummableSchedule>,
}

impl ConstantStepConstants {
    pub fn rho(&self) -> f64 {
        self.alpha / (1.0 - 2.0 * self.gamma2_cap)
    }

    pub fn nu(&self) -> Option<f64> {
        self.lipschitz
            .map(|l| (1.0 - self.gamma2_cap - self.gamma3_bar) / self.alpha - 0.5 * l)
    }

    pub fn b_minus1(&self) -> f64 {
        self.schedule.map_or(0.0, |s| s.b_minus1())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmijoConstants {
    pub sigma: f64,
    pub tau: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub gamma3_bar: f64,
    pub lipschitz: Option<f64>,
}

impl ArmijoConstants {
    pub fn tau_min(&self) -> Option<f64> {
        self.lipschitz.map(|l| {
            (2.0 * self.tau * (1.0 - self.sigma) * (1.0 - self.gamma3_bar) / (self.alpha_max * l))
                .min(1.0)
        })
    }

    pub fn xi(&self) -> f64 {
        2.0 * self.alpha_max / self.sigma
    }
}

/// Problem-level information some bounds need.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexityInputs {
    /// Optimal value, or any lower bound on the values the run visited
    /// (for instance the best value found across a batch).
    pub f_star: Option<f64>,
    /// `|x^0 - x*|`, enables the convex value-gap bound.
    pub x0_dist_to_opt: Option<f64>,
    /// Enables the convex value-gap bound.
    pub convex: bool,
    /// Strong convexity modulus; enables the contraction check, which reads
    /// `dist_to_reference` from the records.
    pub strong_mu: Option<f64>,
}

/// Distances below this are too small for a meaningful contraction ratio.
pub const CONTRACTION_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorCheck {
    pub name: String,
    pub evaluated: usize,
    /// Count of slacks below `-tol` for the tolerance the check was run with.
    pub violations: usize,
    /// Smallest relative slack seen (`+inf` if nothing was evaluated).
    pub worst_slack: f64,
    /// Iteration index of `worst_slack`.
    pub worst_index: Option<usize>,
    pub first_violation: Option<usize>,
    /// Why the check could not run.
    pub skipped: Option<String>,
}

impl MonitorCheck {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            evaluated: 0,
            violations: 0,
            worst_slack: f64::INFINITY,
            worst_index: None,
            first_violation: None,
            skipped: None,
        }
    }

    fn skipped(name: &str, reason: &str) -> Self {
        Self {
            skipped: Some(reason.to_string()),
            ..Self::new(name)
        }
    }

    /// NaN slacks count as violations.
    fn observe(&mut self, k: usize, slack: f64, scale: f64, tol: f64) {
        let rel = slack / scale.max(f64::MIN_POSITIVE);
        let rel = if rel.is_nan() { f64::NEG_INFINITY } else { rel };
        self.evaluated += 1;
        if rel < self.worst_slack || self.worst_index.is_none() {
            self.worst_slack = rel;
            self.worst_index = Some(k);
        }
        if rel < -tol {
            self.violations += 1;
            self.first_violation.get_or_insert(k);
        }
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.evaluated == 0 || self.worst_slack >= -tol
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub checks: Vec<MonitorCheck>,
}

impl MonitorReport {
    pub fn extend(&mut self, other: MonitorReport) {
        self.checks.extend(other.checks);
    }

    pub fn get(&self, name: &str) -> Option<&MonitorCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.checks.iter().all(|c| c.passed(tol))
    }

    pub fn violation_count(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn failed_checks(&self, tol: f64) -> usize {
        self.checks.iter().filter(|c| !c.passed(tol)).count()
    }

    /// The most negative slack beyond `tol`: `(check, iteration, slack)`.
    pub fn worst_violation(&self, tol: f64) -> Option<(String, usize, f64)> {
        self.checks
            .iter()
            .filter(|c| !c.passed(tol))
            .min_by(|a, b| a.worst_slack.total_cmp(&b.worst_slack))
            .map(|c| (c.name.clone(), c.worst_index.unwrap_or(0), c.worst_slack))
    }
}

fn value_scale(records: &[IterationRecord]) -> f64 {
    records.first().map_or(1.0, |r| r.f.abs().max(1.0))
}

/// Per-iteration descent inequality
/// `f(x^{k+1}) <= f(x^k) + rho (gamma1 + gamma2) |grad|^2 - nu |x^{k+1} - x^k|^2`
/// and monotonicity of `f(x^k) + rho b_{k-1}`.
pub fn monitor_descent(
    records: &[IterationRecord],
    c: &ConstantStepConstants,
    tol: f64,
) -> MonitorReport {
    let scale = value_scale(records);
    let rho = c.rho();
    let descent = match c.nu() {
        None => MonitorCheck::skipped("descent", "Lipschitz constant unknown"),
        Some(nu) => {
            let mut check = MonitorCheck::new("descent");
            for r in records {
                let g2 = r.grad_norm * r.grad_norm;
                let slack = r.f + rho * (r.gamma.gamma1 + r.gamma.gamma2) * g2
                    - nu * r.step_norm * r.step_norm
                    - r.f_next;
                check.observe(r.k, slack, scale, tol);
            }
            check
        }
    };
    let mut lyapunov = MonitorCheck::new("lyapunov");
    for r in records {
        let slack = (r.f + rho * r.b_prev) - (r.f_next + rho * r.b_k);
        lyapunov.observe(r.k, slack, scale, tol);
    }
    MonitorReport {
        checks: vec![descent, lyapunov, monitor_certificates(records, tol)],
    }
}

/// Every recorded projection carried a nonpositive certificate gap.
pub fn monitor_certificates(records: &[IterationRecord], tol: f64) -> MonitorCheck {
    let mut check = MonitorCheck::new("certificate");
    for r in records {
        if let Some(gap) = r.certificate_gap {
            check.observe(r.k, -gap, 1.0, tol);
        }
    }
    check
}

/// Complexity and contraction bounds of the constant-step method.
pub fn monitor_complexity(
    records: &[IterationRecord],
    c: &ConstantStepConstants,
    inputs: &ComplexityInputs,
    tol: f64,
) -> MonitorReport {
    let mut checks = Vec::new();
    let rho = c.rho();
    let b_minus1 = c.b_minus1();
    let f0 = records.first().map(|r| r.f);

    // min_{k<=N} |x^{k+1} - x^k| <= sqrt(eta / nu) / sqrt(N + 1)
    checks.push(match (c.nu(), inputs.f_star, f0) {
        (None, _, _) => MonitorCheck::skipped("displacement-rate", "Lipschitz constant unknown"),
        (_, None, _) => MonitorCheck::skipped("displacement-rate", "no optimal value estimate"),
        (Some(nu), Some(f_star), f0) => {
            let mut check = MonitorCheck::new("displacement-rate");
            if let Some(f0) = f0 {
                let eta = f0 - f_star + rho * b_minus1;
                let head = (eta.max(0.0) / nu).sqrt();
                let scale = head.max(1.0);
                let mut best = f64::INFINITY;
                for (n, r) in records.iter().enumerate() {
                    best = best.min(r.step_norm);
                    let bound = head / ((n + 1) as f64).sqrt();
                    check.observe(r.k, bound - best, scale, tol);
                }
            }
            check
        }
    });

    // min_{1<=k<=N} f(x^k) - f* <= (|x^0 - x*|^2 + 2 alpha rho b_{-1}) / (2 alpha N)
    if inputs.convex {
        checks.push(match (inputs.f_star, inputs.x0_dist_to_opt) {
            (Some(f_star), Some(d0)) => {
                let mut check = MonitorCheck::new("convex-value-rate");
                let scale = value_scale(records);
                let numerator = d0 * d0 + 2.0 * c.alpha * rho * b_minus1;
                let mut best = f64::INFINITY;
                for (i, r) in records.iter().enumerate() {
                    best = best.min(r.f_next - f_star);
                    let bound = numerator / (2.0 * c.alpha * (i + 1) as f64);
                    check.observe(r.k, bound - best, scale, tol);
                }
                check
            }
            _ => MonitorCheck::skipped("convex-value-rate", "needs f* and |x0 - x*|"),
        });
    }

    // |x^{k+1} - x*|^2 <= (1 - alpha mu) |x^k - x*|^2, as a ratio
    if let Some(mu) = inputs.strong_mu {
        let mut check = MonitorCheck::new("contraction");
        let factor = 1.0 - c.alpha * mu;
        let mut inexact = false;
        for r in records {
            if r.gamma.gamma1 != 0.0 || r.gamma.gamma2 != 0.0 {
                inexact = true;
                continue;
            }
            if let (Some(d), Some(d_next)) = (r.dist_to_reference, r.dist_to_reference_next) {
                if d < CONTRACTION_FLOOR {
                    break;
                }
                check.observe(r.k, factor - (d_next * d_next) / (d * d), 1.0, tol);
            }
        }
        if check.evaluated == 0 {
            check.skipped = Some(if inexact {
                "needs gamma1 = gamma2 = 0".to_string()
            } else {
                "no reference distances recorded".to_string()
            });
        }
        checks.push(check);
    }
    MonitorReport { checks }
}

/// Checks of the Armijo variant: descent-direction sign, the Armijo condition
/// itself, the step-size floor, and the two complexity bounds.
pub fn monitor_armijo(
    records: &[IterationRecord],
    c: &ArmijoConstants,
    inputs: &ComplexityInputs,
    tol: f64,
) -> MonitorReport {
    let scale = value_scale(records);
    let mut sign = MonitorCheck::new("descent-direction");
    let mut decrease = MonitorCheck::new("armijo-decrease");
    for r in records {
        let (Some(dn), Some(slope), Some(tau)) = (r.direction_norm, r.directional_derivative, r.tau)
        else {
            continue;
        };
        // <grad, w - x> <= ((gamma3 - 1) / alpha) |w - x|^2
        let bound = (r.gamma.gamma3 - 1.0) / r.alpha * dn * dn;
        sign.observe(r.k, bound - slope, slope.abs().max(bound.abs()), tol);
        // f(x^{k+1}) <= f(x^k) + sigma tau <grad, w - x> < f(x^k)
        decrease.observe(r.k, r.f + c.sigma * tau * slope - r.f_next, scale, tol);
    }
    let mut checks = vec![sign, decrease, monitor_certificates(records, tol)];

    let Some(tau_min) = c.tau_min() else {
        for name in ["tau-floor", "direction-rate"] {
            checks.push(MonitorCheck::skipped(name, "Lipschitz constant unknown"));
        }
        return MonitorReport { checks };
    };

    let mut floor = MonitorCheck::new("tau-floor");
    for r in records {
        if let Some(tau) = r.tau {
            floor.observe(r.k, tau - tau_min, tau_min, tol);
        }
    }
    checks.push(floor);

    let f0 = records.first().map(|r| r.f);
    // min_{k<N} |w^k - x^k| <= sqrt(alpha_max (f0 - f*) / (sigma tau_min (1 - gamma))) / sqrt(N)
    checks.push(match (inputs.f_star, f0) {
        (None, _) => MonitorCheck::skipped("direction-rate", "no optimal value estimate"),
        (Some(f_star), f0) => {
            let mut check = MonitorCheck::new("direction-rate");
            if let Some(f0) = f0 {
                let head = (c.alpha_max * (f0 - f_star).max(0.0)
                    / (c.sigma * tau_min * (1.0 - c.gamma3_bar)))
                    .sqrt();
                let mut best = f64::INFINITY;
                for (i, r) in records.iter().enumerate() {
                    best = best.min(r.direction_norm.unwrap_or(f64::INFINITY));
                    let bound = head / ((i + 1) as f64).sqrt();
                    check.observe(r.k, bound - best, head.max(1.0), tol);
                }
            }
            check
        }
    });

    // min_{k<N} f(x^k) - f* <= (|x0 - x*|^2 + xi (f0 - f*)) / (2 alpha_min tau_min N)
    if inputs.convex {
        checks.push(match (inputs.f_star, inputs.x0_dist_to_opt, f0) {
            (Some(f_star), Some(d0), Some(f0)) => {
                let mut check = MonitorCheck::new("convex-value-rate");
                let numerator = d0 * d0 + c.xi() * (f0 - f_star).max(0.0);
                let mut best = f64::INFINITY;
                for (i, r) in records.iter().enumerate() {
                    best = best.min(r.f - f_star);
                    let bound = numerator / (2.0 * c.alpha_min * tau_min * (i + 1) as f64);
                    check.observe(r.k, bound - best, scale, tol);
                }
                check
            }
            (Some(_), Some(_), None) => MonitorCheck::new("convex-value-rate"),
            _ => MonitorCheck::skipped("convex-value-rate", "needs f* and |x0 - x*|"),
        });
    }
    MonitorReport { checks }
}
