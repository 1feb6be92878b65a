use std::time::Instant;

use super::monitor::{self, ArmijoConstants};
use super::{
    check_start, fail_if_strict, next_warm_start, project, relative_change, IterationRecord,
    Objective, ProjectionMode, SolveOptions, SolveResult, StopReason, MONITOR_RTOL,
    SAME_POINT_RTOL,
};
use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::schedules::{ForcingParams, ToleranceFn};
use crate::sets::{ConvexSet, WarmStart};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    Fixed(f64),
    /// Barzilai-Borwein quotient `<s, s> / <s, y>` clamped to
    /// `[alpha_min, alpha_max]`; `alpha_max` on the first iteration and when
    /// `<s, y> <= 0`.
    Spectral,
}

#[derive(Clone, Debug)]
pub struct ArmijoConfig {
    pub sigma: f64,
    pub tau: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// `gamma3^k = gamma3_bar`, `gamma1 = gamma2 = 0`.
    pub gamma3_bar: f64,
    pub step_rule: StepRule,
    pub phi: ToleranceFn,
    pub projection: ProjectionMode,
    pub max_backtracks: usize,
    pub max_iter: usize,
    pub stop_tol: f64,
    pub strict: bool,
}

impl Default for ArmijoConfig {
    fn default() -> Self {
        Self {
            sigma: 1e-4,
            tau: 0.5,
            alpha_min: 1e-10,
            alpha_max: 1e10,
            gamma3_bar: 0.49995,
            step_rule: StepRule::Spectral,
            phi: ToleranceFn::Displacement,
            projection: ProjectionMode::Inexact,
            max_backtracks: 60,
            max_iter: 1_000,
            stop_tol: 1e-4,
            strict: false,
        }
    }
}

impl ArmijoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad(format!("sigma must lie in (0, 1), got {}", self.sigma));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad(format!("tau must lie in (0, 1), got {}", self.tau));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= self.alpha_max && self.alpha_max.is_finite())
        {
            return bad(format!(
                "need 0 < alpha_min <= alpha_max, got [{}, {}]",
                self.alpha_min, self.alpha_max
            ));
        }
        if !(0.0..0.5).contains(&self.gamma3_bar) {
            return bad(format!("gamma3_bar must lie in [0, 1/2), got {}", self.gamma3_bar));
        }
        if let StepRule::Fixed(a) = self.step_rule {
            if !(self.alpha_min..=self.alpha_max).contains(&a) {
                return bad(format!("fixed step {a} outside [alpha_min, alpha_max]"));
            }
        }
        Ok(())
    }

    /// `xi = 2 alpha_max / sigma`
    pub fn xi(&self) -> f64 {
        2.0 * self.alpha_max / self.sigma
    }

    /// `min(2 tau (1 - sigma)(1 - gamma3_bar) / (alpha_max L), 1)`
    pub fn tau_min(&self, lipschitz: f64) -> f64 {
        (2.0 * self.tau * (1.0 - self.sigma) * (1.0 - self.gamma3_bar) / (self.alpha_max * lipschitz))
            .min(1.0)
    }

    pub fn constants(&self, lipschitz: Option<f64>) -> ArmijoConstants {
        ArmijoConstants {
            sigma: self.sigma,
            tau: self.tau,
            alpha_min: self.alpha_min,
            alpha_max: self.alpha_max,
            gamma3_bar: self.gamma3_bar,
            lipschitz,
        }
    }
}

/// Spectral step from `s = x^k - x^{k-1}` and `y = grad f(x^k) - grad f(x^{k-1})`.
pub fn spectral_step<P: Point>(s: &P, y: &P, alpha_min: f64, alpha_max: f64) -> f64 {
    let sy = s.dot(y);
    if sy > 0.0 {
        (s.norm_sq() / sy).max(alpha_min).min(alpha_max)
    } else {
        alpha_max
    }
}

/// Smallest `j >= 0` with
/// `f(x + tau^j (w - x)) <= f(x) + sigma tau^j <grad f(x), w - x>`.
/// Returns `(tau^j, j)`.
pub fn armijo_search<P, O>(
    obj: &O,
    xk: &P,
    wk: &P,
    sigma: f64,
    tau: f64,
    max_backtracks: usize,
) -> Result<(f64, usize)>
where
    P: Point,
    O: Objective<P> + ?Sized,
{
    let (f, grad) = obj.value_and_gradient(xk);
    let direction = wk.sub(xk);
    let slope = grad.dot(&direction);
    backtrack(obj, xk, f, slope, &direction, sigma, tau, max_backtracks).map(|(t, j, _)| (t, j))
}

/// Returns `(tau^j, j, f(x + tau^j d))`.
#[allow(clippy::too_many_arguments)]
fn backtrack<P, O>(
    obj: &O,
    x: &P,
    f: f64,
    slope: f64,
    direction: &P,
    sigma: f64,
    tau: f64,
    max_backtracks: usize,
) -> Result<(f64, usize, f64)>
where
    P: Point,
    O: Objective<P> + ?Sized,
{
    let mut step = 1.0;
    for j in 0..=max_backtracks {
        let mut trial = x.clone();
        trial.axpy(step, direction);
        let f_trial = obj.value(&trial);
        if f_trial <= f + sigma * step * slope {
            return Ok((step, j, f_trial));
        }
        step *= tau;
    }
    Err(Error::BacktrackLimit {
        max_backtracks,
        directional_derivative: slope,
    })
}

/// Gradient projection with Armijo search along `w^k - x^k`, where `w^k` is a
/// feasible inexact projection of `x^k - alpha_k grad f(x^k)` relative to
/// `x^k` with tolerance `gamma3_bar |w - x^k|^2`.
pub fn solve_armijo<P, O, C>(
    obj: &O,
    set: &C,
    x0: P,
    cfg: &ArmijoConfig,
    opts: &SolveOptions<P>,
) -> Result<SolveResult<P>>
where
    P: Point,
    O: Objective<P> + ?Sized,
    C: ConvexSet<P> + ?Sized,
{
    cfg.validate()?;
    check_start(set, &x0, opts.feas_tol)?;
    let lipschitz = obj.lipschitz();
    let start = Instant::now();

    let gamma = ForcingParams::relative_only(cfg.gamma3_bar);
    let mut x = x0;
    let (mut f, mut grad) = obj.value_and_gradient(&x);
    let mut previous: Option<(P, P)> = None;
    let mut warm = WarmStart::with_rank(1);
    let mut records = Vec::new();
    let mut previous_small = false;
    let mut stop = StopReason::MaxIter;
    let mut iterations = cfg.max_iter;

    for k in 0..cfg.max_iter {
        let alpha = match (cfg.step_rule, &previous) {
            (StepRule::Fixed(a), _) => a,
            (StepRule::Spectral, None) => cfg.alpha_max,
            (StepRule::Spectral, Some((x_prev, g_prev))) => {
                spectral_step(&x.sub(x_prev), &grad.sub(g_prev), cfg.alpha_min, cfg.alpha_max)
            }
        };
        let mut z = x.clone();
        z.axpy(-alpha, &grad);
        let projection = project(set, cfg.projection, &z, &x, &gamma, &cfg.phi, &warm)?;
        let rank_used = projection.rank_used;
        let certificate_gap = Some(projection.certificate_gap).filter(|g| !g.is_nan());
        warm = next_warm_start(projection.warm);

        let direction = projection.point.sub(&x);
        let direction_norm = direction.norm();
        let x_norm = x.norm();
        if direction_norm <= SAME_POINT_RTOL * x_norm.max(1.0) {
            stop = StopReason::WEqualsX;
            iterations = k;
            break;
        }
        let slope = grad.dot(&direction);
        let (tau_k, backtracks, _) = backtrack(
            obj,
            &x,
            f,
            slope,
            &direction,
            cfg.sigma,
            cfg.tau,
            cfg.max_backtracks,
        )?;

        let mut x_next = x.clone();
        x_next.axpy(tau_k, &direction);
        let (f_next, grad_next) = obj.value_and_gradient(&x_next);
        let step_norm = tau_k * direction_norm;
        let rel_change = relative_change(step_norm, x_norm);
        // <grad, w - x> <= ((gamma3 - 1) / alpha) |w - x|^2
        let descent_slack =
            (gamma.gamma3 - 1.0) / alpha * direction_norm * direction_norm - slope;

        records.push(IterationRecord {
            k,
            f,
            f_next,
            grad_norm: grad.norm(),
            alpha,
            tau: Some(tau_k),
            backtracks: Some(backtracks),
            gamma,
            a_k: 0.0,
            b_prev: 0.0,
            b_k: 0.0,
            rank_used,
            step_norm,
            direction_norm: Some(direction_norm),
            directional_derivative: Some(slope),
            rel_change,
            certificate_gap,
            descent_slack: Some(descent_slack),
            lyapunov_slack: None,
            dist_to_reference: opts.reference.as_ref().map(|r| x.dist(r)),
            dist_to_reference_next: opts.reference.as_ref().map(|r| x_next.dist(r)),
            elapsed_s: start.elapsed().as_secs_f64(),
        });

        previous = Some((std::mem::replace(&mut x, x_next), std::mem::replace(&mut grad, grad_next)));
        f = f_next;

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

    let f_best = records
        .iter()
        .map(|r| r.f_next)
        .fold(f, f64::min)
        .min(obj.optimal_value_hint().unwrap_or(f64::INFINITY));
    let monitors = monitor::monitor_armijo(
        &records,
        &cfg.constants(lipschitz),
        &monitor::ComplexityInputs {
            f_star: Some(f_best),
            ..Default::default()
        },
        MONITOR_RTOL,
    );
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
