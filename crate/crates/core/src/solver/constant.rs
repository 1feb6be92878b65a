use std::time::Instant;

use super::monitor::{self, ConstantStepConstants};
use super::{
    check_start, fail_if_strict, next_warm_start, project, relative_change, IterationRecord,
    Objective, ProjectionMode, SolveOptions, SolveResult, StopReason, GRADIENT_ZERO_RTOL,
    MONITOR_RTOL, SAME_POINT_RTOL,
};
use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::schedules::{
    forcing_for_iteration, schedule_values, ForcingParams, SummableSchedule, ToleranceFn,
};
use crate::sets::{certify_inexact_projection, ConvexSet, WarmStart};

/// Default scale of the logarithmic budget. Much larger values let the
/// first iterations accept rank-one points that barely move, and the
/// relative-change test then stops far from the minimizer.
pub const DEFAULT_BBAR: f64 = 3.0;

#[derive(Clone, Debug)]
pub struct ConstantStepConfig {
    pub alpha: f64,
    /// `gamma3^k = gamma3_bar` every iteration.
    pub gamma3_bar: f64,
    /// Cap on `gamma2^k`.
    pub gamma2_cap: f64,
    /// Budget sequence `(a_k, b_k)`; `None` forces `gamma1 = gamma2 = 0`.
    pub schedule: Option<SummableSchedule>,
    pub phi: ToleranceFn,
    pub projection: ProjectionMode,
    pub max_iter: usize,
    pub stop_tol: f64,
    pub strict: bool,
}

impl Default for ConstantStepConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            gamma3_bar: 0.0,
            gamma2_cap: 0.49995,
            schedule: Some(SummableSchedule::logarithmic(DEFAULT_BBAR).expect("positive scale")),
            phi: ToleranceFn::Full,
            projection: ProjectionMode::Inexact,
            max_iter: 10_000,
            stop_tol: 1e-4,
            strict: false,
        }
    }
}

/// `alpha = 0.9999 (1 - 2 gamma3_bar) / L`
pub fn constant_alpha_from_gamma(lipschitz: f64, gamma3_bar: f64) -> f64 {
    0.9999 * (1.0 - 2.0 * gamma3_bar) / lipschitz
}

impl ConstantStepConfig {
    /// Defaults with the step derived from `L` and `gamma3_bar`.
    pub fn for_lipschitz(lipschitz: f64, gamma3_bar: f64) -> Self {
        Self {
            alpha: constant_alpha_from_gamma(lipschitz, gamma3_bar),
            gamma3_bar,
            ..Self::default()
        }
    }

    /// `nu = (1 - gamma2_cap - gamma3_bar) / alpha - L / 2`
    pub fn nu(&self, lipschitz: f64) -> f64 {
        (1.0 - self.gamma2_cap - self.gamma3_bar) / self.alpha - 0.5 * lipschitz
    }

    /// `rho = alpha / (1 - 2 gamma2_cap)`
    pub fn rho(&self) -> f64 {
        self.alpha / (1.0 - 2.0 * self.gamma2_cap)
    }

    pub fn constants(&self, lipschitz: Option<f64>) -> ConstantStepConstants {
        ConstantStepConstants {
            alpha: self.alpha,
            lipschitz,
            gamma2_cap: self.gamma2_cap,
            gamma3_bar: self.gamma3_bar,
            schedule: self.schedule,
        }
    }

    pub fn validate(&self, lipschitz: Option<f64>) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return bad(format!("step size must be positive, got {}", self.alpha));
        }
        if !(0.0..0.5).contains(&self.gamma3_bar) {
            return bad(format!("gamma3_bar must lie in [0, 1/2), got {}", self.gamma3_bar));
        }
        if !(0.0..0.5).contains(&self.gamma2_cap) {
            return bad(format!("gamma2_cap must lie in [0, 1/2), got {}", self.gamma2_cap));
        }
        if !(self.stop_tol >= 0.0) {
            return bad(format!("stop tolerance must be nonnegative, got {}", self.stop_tol));
        }
        if let Some(l) = lipschitz {
            if !(l > 0.0) {
                return bad(format!("Lipschitz constant must be positive, got {l}"));
            }
            let limit = (1.0 - 2.0 * self.gamma3_bar) / l;
            if self.alpha > limit {
                return bad(format!("step {} exceeds (1 - 2 gamma3_bar) / L = {limit}", self.alpha));
            }
            if !(self.nu(l) > 0.0) {
                return bad(format!("descent constant nu = {} is not positive", self.nu(l)));
            }
        }
        Ok(())
    }
}

/// Stationarity test used when an iteration does not move: `x` is stationary
/// iff it is the exact projection of `z = x - alpha grad f(x)`.
fn is_exact_fixed_point<P: Point, C: ConvexSet<P> + ?Sized>(set: &C, x: &P, z: &P) -> bool {
    certify_inexact_projection(set, x, z, x, &ForcingParams::ZERO, &ToleranceFn::Full)
        .map(|(ok, _)| ok)
        .unwrap_or(false)
}

/// Constant step gradient projection: `x^{k+1}` is a feasible inexact
/// projection of `x^k - alpha grad f(x^k)` relative to `x^k`, with forcing
/// parameters split from the budget `a_k / |grad f(x^k)|^2`.
pub fn solve_constant<P, O, C>(
    obj: &O,
    set: &C,
    x0: P,
    cfg: &ConstantStepConfig,
    opts: &SolveOptions<P>,
) -> Result<SolveResult<P>>
where
    P: Point,
    O: Objective<P> + ?Sized,
    C: ConvexSet<P> + ?Sized,
{
    let lipschitz = obj.lipschitz();
    cfg.validate(lipschitz)?;
    check_start(set, &x0, opts.feas_tol)?;

    let start = Instant::now();
    let nu = lipschitz.map(|l| cfg.nu(l));
    let rho = cfg.rho();

    let mut x = x0;
    let (mut f, mut grad) = obj.value_and_gradient(&x);
    let grad_zero = GRADIENT_ZERO_RTOL * grad.norm().max(1.0);
    let mut warm = WarmStart::with_rank(1);
    let mut records = Vec::new();
    let mut previous_small = false;
    let mut stop = StopReason::MaxIter;
    let mut iterations = cfg.max_iter;

    for k in 0..cfg.max_iter {
        let grad_norm = grad.norm();
        if grad_norm <= grad_zero {
            stop = StopReason::StationaryGradient;
            iterations = k;
            break;
        }
        let (a_k, b_k) = schedule_values(cfg.schedule.as_ref(), k);
        let b_prev = cfg.schedule.map_or(0.0, |s| s.b(k as i64 - 1));
        let gamma =
            forcing_for_iteration(grad_norm * grad_norm, a_k, cfg.gamma2_cap, cfg.gamma3_bar)?;

        let mut z = x.clone();
        z.axpy(-cfg.alpha, &grad);
        let projection = project(set, cfg.projection, &z, &x, &gamma, &cfg.phi, &warm)?;
        let rank_used = projection.rank_used;
        let certificate_gap = Some(projection.certificate_gap).filter(|g| !g.is_nan());
        warm = next_warm_start(projection.warm);
        let x_next = projection.point;

        let step_norm = x_next.dist(&x);
        let x_norm = x.norm();
        let (f_next, grad_next) = obj.value_and_gradient(&x_next);

        let descent_slack = nu.map(|nu| {
            f + rho * (gamma.gamma1 + gamma.gamma2) * grad_norm * grad_norm
                - nu * step_norm * step_norm
                - f_next
        });
        let lyapunov_slack = Some((f + rho * b_prev) - (f_next + rho * b_k));
        let rel_change = relative_change(step_norm, x_norm);
        records.push(IterationRecord {
            k,
            f,
            f_next,
            grad_norm,
            alpha: cfg.alpha,
            tau: None,
            backtracks: None,
            gamma,
            a_k,
            b_prev,
            b_k,
            rank_used,
            step_norm,
            direction_norm: None,
            directional_derivative: None,
            rel_change,
            certificate_gap,
            descent_slack,
            lyapunov_slack,
            dist_to_reference: opts.reference.as_ref().map(|r| x.dist(r)),
            dist_to_reference_next: opts.reference.as_ref().map(|r| x_next.dist(r)),
            elapsed_s: start.elapsed().as_secs_f64(),
        });

        if step_norm <= SAME_POINT_RTOL * x_norm.max(1.0) && is_exact_fixed_point(set, &x, &z) {
            records.pop();
            stop = StopReason::WEqualsX;
            iterations = k;
            break;
        }

        x = x_next;
        f = f_next;
        grad = grad_next;

        if rel_change <= cfg.stop_tol {
            if previous_small {
                stop = StopReason::Converged;
                iterations = k + 1;
                break;
            }
            previous_small = true;
        } else {
            previous_small = false;
        }
    }

    let constants = cfg.constants(lipschitz);
    let mut monitors = monitor::monitor_descent(&records, &constants, MONITOR_RTOL);
    let f_best = records
        .iter()
        .map(|r| r.f_next)
        .fold(f, f64::min)
        .min(obj.optimal_value_hint().unwrap_or(f64::INFINITY));
    monitors.extend(monitor::monitor_complexity(
        &records,
        &constants,
        &monitor::ComplexityInputs {
            f_star: Some(f_best),
            strong_mu: obj.strong_convexity().filter(|_| opts.reference.is_some()),
            ..Default::default()
        },
        MONITOR_RTOL,
    ));
    fail_if_strict(cfg.strict, &monitors)?;

    Ok(SolveResult {
        x,
        f,
        iterations,
        stop,
        records,
        monitors,
    })
}
