//! Gradient projection with feasible inexact projections.
//!
//! Two step-size strategies share the same projection machinery:
//! [`solve_constant`] takes a fixed step and lets the projection tolerance be
//! driven by a summable budget, [`solve_armijo`] projects with a relative
//! tolerance and backtracks along the feasible direction `w - x`.

mod armijo;
mod constant;
pub mod monitor;

pub use armijo::{armijo_search, solve_armijo, spectral_step, ArmijoConfig, StepRule};
pub use constant::{constant_alpha_from_gamma, solve_constant, ConstantStepConfig, DEFAULT_BBAR};
pub use monitor::{MonitorCheck, MonitorReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::schedules::ForcingParams;
use crate::sets::{ConvexSet, InexactProjection, WarmStart};
use crate::schedules::ToleranceFn;

/// Smooth objective over a space of points `P`.
pub trait Objective<P: Point>: Send + Sync {
    fn value(&self, x: &P) -> f64;

    fn gradient(&self, x: &P) -> P;

    fn value_and_gradient(&self, x: &P) -> (f64, P) {
        (self.value(x), self.gradient(x))
    }

    /// Lipschitz constant of the gradient on the feasible set, when known.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    /// Strong convexity modulus, when known.
    fn strong_convexity(&self) -> Option<f64> {
        None
    }

    fn optimal_value_hint(&self) -> Option<f64> {
        None
    }
}

/// Analytic and central-difference directional derivatives at `x` along `d`.
pub fn directional_derivatives<P: Point, O: Objective<P> + ?Sized>(
    obj: &O,
    x: &P,
    d: &P,
    h: f64,
) -> (f64, f64) {
    let analytic = obj.gradient(x).dot(d);
    let mut plus = x.clone();
    plus.axpy(h, d);
    let mut minus = x.clone();
    minus.axpy(-h, d);
    (analytic, (obj.value(&plus) - obj.value(&minus)) / (2.0 * h))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionMode {
    #[default]
    Inexact,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Relative change below tolerance on two consecutive iterations.
    Converged,
    StationaryGradient,
    /// The projected point coincides with the current iterate.
    WEqualsX,
    MaxIter,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::StationaryGradient => "stationary-gradient",
            Self::WEqualsX => "w-equals-x",
            Self::MaxIter => "max-iter",
        }
    }
}

/// Telemetry for one outer iteration `x^k -> x^{k+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// `f(x^k)`
    pub f: f64,
    /// `f(x^{k+1})`
    pub f_next: f64,
    pub grad_norm: f64,
    pub alpha: f64,
    pub tau: Option<f64>,
    pub backtracks: Option<usize>,
    pub gamma: ForcingParams,
    pub a_k: f64,
    /// `b_{k-1}`
    pub b_prev: f64,
    pub b_k: f64,
    pub rank_used: Option<usize>,
    /// `|x^{k+1} - x^k|`
    pub step_norm: f64,
    /// `|w^k - x^k|` (Armijo)
    pub direction_norm: Option<f64>,
    /// `<grad f(x^k), w^k - x^k>` (Armijo)
    pub directional_derivative: Option<f64>,
    pub rel_change: f64,
    pub certificate_gap: Option<f64>,
    /// Slack of the per-iteration descent inequality (negative = violated).
    pub descent_slack: Option<f64>,
    /// `(f(x^k) + rho b_{k-1}) - (f(x^{k+1}) + rho b_k)`
    pub lyapunov_slack: Option<f64>,
    pub dist_to_reference: Option<f64>,
    pub dist_to_reference_next: Option<f64>,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult<P> {
    pub x: P,
    pub f: f64,
    pub iterations: usize,
    pub stop: StopReason,
    pub records: Vec<IterationRecord>,
    pub monitors: MonitorReport,
}

impl<P> SolveResult<P> {
    pub fn mean_rank(&self) -> Option<f64> {
        let ranks: Vec<usize> = self.records.iter().filter_map(|r| r.rank_used).collect();
        if ranks.is_empty() {
            None
        } else {
            Some(ranks.iter().sum::<usize>() as f64 / ranks.len() as f64)
        }
    }

    pub fn max_rank(&self) -> Option<usize> {
        self.records.iter().filter_map(|r| r.rank_used).max()
    }
}

/// Per-run options that are not part of the algorithm.
#[derive(Clone, Debug)]
pub struct SolveOptions<P> {
    /// Distances to this point are recorded every iteration (for instance a
    /// known minimizer, for contraction checks).
    pub reference: Option<P>,
    /// Membership tolerance for the starting point.
    pub feas_tol: f64,
}

impl<P> Default for SolveOptions<P> {
    fn default() -> Self {
        Self {
            reference: None,
            feas_tol: 1e-9,
        }
    }
}

/// `x^k` stationary-gradient threshold relative to `max(1, |grad f(x^0)|)`.
pub(crate) const GRADIENT_ZERO_RTOL: f64 = 1e-14;
/// `w^k = x^k` threshold relative to `max(1, |x^k|)`.
pub(crate) const SAME_POINT_RTOL: f64 = 1e-12;
/// Strict mode fails a run when a monitor is violated beyond this relative slack.
pub const STRICT_MONITOR_RTOL: f64 = 1e-6;
/// Relative slack used for the monitor summary attached to each result.
pub const MONITOR_RTOL: f64 = 1e-8;

pub(crate) fn check_start<P: Point, C: ConvexSet<P> + ?Sized>(
    set: &C,
    x0: &P,
    feas_tol: f64,
) -> Result<()> {
    let violation = set.violation(x0);
    if !(violation <= feas_tol) {
        return Err(Error::InfeasibleStart { violation });
    }
    Ok(())
}

pub(crate) fn project<P: Point, C: ConvexSet<P> + ?Sized>(
    set: &C,
    mode: ProjectionMode,
    z: &P,
    anchor: &P,
    gamma: &ForcingParams,
    phi: &ToleranceFn,
    warm: &WarmStart,
) -> Result<InexactProjection<P>> {
    match mode {
        ProjectionMode::Inexact => set.inexact_project(z, anchor, gamma, phi, warm),
        ProjectionMode::Exact => Ok(InexactProjection {
            point: set.exact_project(z)?,
            rank_used: None,
            certificate_gap: f64::NAN,
            warm: WarmStart::default(),
        }),
    }
}

/// Next rank hint: one below the last accepted rank.
pub(crate) fn next_warm_start(mut warm: WarmStart) -> WarmStart {
    warm.rank = warm.rank.saturating_sub(1).max(1);
    warm
}

/// `|x^l - x^{l-1}| / |x^{l-1}|`
pub(crate) fn relative_change(step: f64, prev_norm: f64) -> f64 {
    if step == 0.0 {
        0.0
    } else if prev_norm > 0.0 {
        step / prev_norm
    } else {
        f64::INFINITY
    }
}

pub(crate) fn fail_if_strict(strict: bool, report: &MonitorReport) -> Result<()> {
    if !strict {
        return Ok(());
    }
    if let Some((check, iteration, slack)) = report.worst_violation(STRICT_MONITOR_RTOL) {
        return Err(Error::MonitorViolation {
            check,
            iteration,
            slack,
        });
    }
    Ok(())
}
