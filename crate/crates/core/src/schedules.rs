//! Error-tolerance functions, forcing parameters and summable schedules.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Point;

/// Forcing parameter `gamma = (gamma1, gamma2, gamma3)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ForcingParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
}

impl ForcingParams {
    pub const ZERO: Self = Self {
        gamma1: 0.0,
        gamma2: 0.0,
        gamma3: 0.0,
    };

    pub fn new(gamma1: f64, gamma2: f64, gamma3: f64) -> Self {
        Self {
            gamma1,
            gamma2,
            gamma3,
        }
    }

    /// Only the `gamma3` term, as used by the Armijo variant.
    pub fn relative_only(gamma3: f64) -> Self {
        Self::new(0.0, 0.0, gamma3)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.gamma1 >= 0.0 && self.gamma2 >= 0.0 && self.gamma3 >= 0.0
    }

    /// `gamma1 |v-u|^2 + gamma2 |w-v|^2 + gamma3 |w-u|^2`
    pub fn bound(&self, d: &SqDistances) -> f64 {
        self.gamma1 * d.v_u + self.gamma2 * d.w_v + self.gamma3 * d.w_u
    }
}

/// Squared distances among the anchor `u`, the point `v` being projected and
/// the candidate `w`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SqDistances {
    pub v_u: f64,
    pub w_v: f64,
    pub w_u: f64,
}

impl SqDistances {
    pub fn of<P: Point>(u: &P, v: &P, w: &P) -> Self {
        Self {
            v_u: v.dist_sq(u),
            w_v: w.dist_sq(v),
            w_u: w.dist_sq(u),
        }
    }
}

type CustomTolerance = dyn Fn(&ForcingParams, &SqDistances) -> f64 + Send + Sync;

/// Error-tolerance function `phi_gamma(u, v, w)`.
#[derive(Clone)]
pub enum ToleranceFn {
    /// `gamma1 |v-u|^2 + gamma2 |w-v|^2 + gamma3 |w-u|^2`
    Full,
    /// `gamma1 |v-u|^2`
    AnchorStep,
    /// `gamma2 |w-v|^2`
    Residual,
    /// `gamma3 |w-u|^2`
    Displacement,
    /// `gamma1 gamma2 gamma3 |v-u|^2 |w-v|^2 |w-u|^2`
    Product,
    /// User-supplied function of the squared distances. It is the caller's
    /// responsibility that it stays below [`ForcingParams::bound`] and is
    /// continuous for Armijo runs.
    Custom(Arc<CustomTolerance>),
}

impl ToleranceFn {
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&ForcingParams, &SqDistances) -> f64 + Send + Sync + 'static,
    {
        Self::Custom(Arc::new(f))
    }

    /// The five built-in forms.
    pub fn canonical() -> [ToleranceFn; 5] {
        [
            Self::Full,
            Self::AnchorStep,
            Self::Residual,
            Self::Displacement,
            Self::Product,
        ]
    }

    pub fn eval_distances(&self, g: &ForcingParams, d: &SqDistances) -> f64 {
        match self {
            Self::Full => g.bound(d),
            Self::AnchorStep => g.gamma1 * d.v_u,
            Self::Residual => g.gamma2 * d.w_v,
            Self::Displacement => g.gamma3 * d.w_u,
            Self::Product => g.gamma1 * g.gamma2 * g.gamma3 * d.v_u * d.w_v * d.w_u,
            Self::Custom(f) => f(g, d),
        }
    }

    pub fn eval<P: Point>(&self, g: &ForcingParams, u: &P, v: &P, w: &P) -> f64 {
        self.eval_distances(g, &SqDistances::of(u, v, w))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::AnchorStep => "anchor-step",
            Self::Residual => "residual",
            Self::Displacement => "displacement",
            Self::Product => "product",
            Self::Custom(_) => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "full" | "phi1" => Self::Full,
            "anchor-step" | "phi2" => Self::AnchorStep,
            "residual" | "phi3" => Self::Residual,
            "displacement" | "phi4" => Self::Displacement,
            "product" | "phi5" => Self::Product,
            _ => return None,
        })
    }
}

impl fmt::Debug for ToleranceFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether `phi` stays below the three-term bound at `(u, v, w)`, up to
/// `1e-12` relative to the size of the distances involved.
pub fn tolerance_bound_check<P: Point>(
    phi: &ToleranceFn,
    g: &ForcingParams,
    u: &P,
    v: &P,
    w: &P,
) -> bool {
    let d = SqDistances::of(u, v, w);
    let scale = 1.0f64.max(d.v_u).max(d.w_v).max(d.w_u);
    phi.eval_distances(g, &d) <= g.bound(&d) + 1e-12 * scale
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// `b_k = bbar / k`
    Harmonic,
    /// `b_k = bbar / ln(k + 1)`
    Logarithmic,
}

/// Pair of sequences with `0 <= a_k <= b_{k-1} - b_k`, `b_{-1} = 3 bbar` and
/// `b_0 = 2 bbar`; here `a_k = b_{k-1} - b_k` exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummableSchedule {
    pub kind: ScheduleKind,
    pub bbar: f64,
}

impl SummableSchedule {
    pub fn new(kind: ScheduleKind, bbar: f64) -> Result<Self> {
        if !(bbar > 0.0) || !bbar.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "schedule scale bbar must be positive, got {bbar}"
            )));
        }
        Ok(Self { kind, bbar })
    }

    pub fn harmonic(bbar: f64) -> Result<Self> {
        Self::new(ScheduleKind::Harmonic, bbar)
    }

    pub fn logarithmic(bbar: f64) -> Result<Self> {
        Self::new(ScheduleKind::Logarithmic, bbar)
    }

    /// `b_{-1}`
    pub fn b_minus1(&self) -> f64 {
        3.0 * self.bbar
    }

    /// `b_k` for `k >= -1`.
    pub fn b(&self, k: i64) -> f64 {
        match k {
            i64::MIN..=-2 => panic!("schedule index {k} out of range"),
            -1 => self.b_minus1(),
            0 => 2.0 * self.bbar,
            k => match self.kind {
                ScheduleKind::Harmonic => self.bbar / k as f64,
                ScheduleKind::Logarithmic => self.bbar / ((k + 1) as f64).ln(),
            },
        }
    }

    /// `(a_k, b_k)`
    pub fn values(&self, k: usize) -> (f64, f64) {
        let k = k as i64;
        let b_k = self.b(k);
        (self.b(k - 1) - b_k, b_k)
    }
}

/// `(a_k, b_k)`, with `(0, 0)` when no schedule is configured.
pub fn schedule_values(s: Option<&SummableSchedule>, k: usize) -> (f64, f64) {
    s.map_or((0.0, 0.0), |s| s.values(k))
}

/// Splits the budget `a_k / |grad|^2` between `gamma1` and `gamma2`:
/// `gamma2 = min(a_k / (2 |grad|^2), gamma2_cap)`, `gamma1` takes the rest and
/// `gamma3 = gamma3_bar`.
pub fn forcing_for_iteration(
    grad_norm_sq: f64,
    a_k: f64,
    gamma2_cap: f64,
    gamma3_bar: f64,
) -> Result<ForcingParams> {
    if !(grad_norm_sq > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "squared gradient norm must be positive, got {grad_norm_sq}"
        )));
    }
    if !(0.0..0.5).contains(&gamma2_cap) || !(0.0..0.5).contains(&gamma3_bar) {
        return Err(Error::InvalidParameter(format!(
            "caps must lie in [0, 1/2): gamma2_cap = {gamma2_cap}, gamma3_bar = {gamma3_bar}"
        )));
    }
    if !(a_k >= 0.0) {
        return Err(Error::InvalidParameter(format!("a_k must be nonnegative, got {a_k}")));
    }
    let budget = a_k / grad_norm_sq;
    let gamma2 = (0.5 * budget).min(gamma2_cap);
    Ok(ForcingParams::new(budget - gamma2, gamma2, gamma3_bar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn harmonic_first_values() {
        let s = SummableSchedule::harmonic(1.0).unwrap();
        assert_eq!(s.values(0), (1.0, 2.0));
        assert_eq!(s.values(1), (1.0, 1.0));
        assert_eq!(s.values(2), (0.5, 0.5));
    }

    #[test]
    fn logarithmic_with_experiment_scale() {
        let s = SummableSchedule::logarithmic(100.0).unwrap();
        assert_eq!(s.values(0), (100.0, 200.0));
        let (_, b1) = s.values(1);
        assert!(close(b1, 144.269_504_088_896_34, 1e-14));
        assert!((b1 - 144.27).abs() < 5e-3);
    }

    #[test]
    fn schedule_rejects_nonpositive_scale() {
        assert!(SummableSchedule::harmonic(0.0).is_err());
        assert!(SummableSchedule::logarithmic(-3.0).is_err());
    }

    #[test]
    fn missing_schedule_gives_zero_budget() {
        assert_eq!(schedule_values(None, 7), (0.0, 0.0));
    }

    #[test]
    fn forcing_splits_budget() {
        let g = forcing_for_iteration(4.0, 1.0, 0.49995, 0.0).unwrap();
        assert_eq!(g, ForcingParams::new(0.125, 0.125, 0.0));
    }

    #[test]
    fn forcing_with_zero_budget() {
        let g = forcing_for_iteration(3.0, 0.0, 0.49995, 0.2).unwrap();
        assert_eq!(g, ForcingParams::new(0.0, 0.0, 0.2));
    }

    #[test]
    fn forcing_cap_branch() {
        let g = forcing_for_iteration(1.0, 1e6, 0.49995, 0.0).unwrap();
        assert_eq!(g.gamma2, 0.49995);
        assert_eq!(g.gamma1, 1e6 - 0.49995);
    }

    #[test]
    fn forcing_rejects_bad_inputs() {
        assert!(forcing_for_iteration(0.0, 1.0, 0.4, 0.0).is_err());
        assert!(forcing_for_iteration(1.0, 1.0, 0.5, 0.0).is_err());
        assert!(forcing_for_iteration(1.0, 1.0, 0.4, 0.5).is_err());
    }

    #[test]
    fn displacement_form_meets_bound() {
        let g = ForcingParams::new(0.0, 0.0, 0.3);
        let u = DVector::from_vec(vec![1.0, 2.0]);
        let v = DVector::from_vec(vec![-1.0, 0.5]);
        let w = DVector::from_vec(vec![0.0, 4.0]);
        assert!(tolerance_bound_check(&ToleranceFn::Displacement, &g, &u, &v, &w));
    }

    #[test]
    fn custom_form_violating_bound_is_caught() {
        let phi = ToleranceFn::custom(|g, d| g.gamma1 * d.v_u + 1.0);
        let g = ForcingParams::new(0.2, 0.1, 0.1);
        let u = DVector::from_vec(vec![0.5, 0.5]);
        assert!(!tolerance_bound_check(&phi, &g, &u, &u, &u));
    }

    proptest! {
        #[test]
        fn schedule_telescopes(bbar in 1e-3f64..1e3, k_max in 1usize..400, log in any::<bool>()) {
            let kind = if log { ScheduleKind::Logarithmic } else { ScheduleKind::Harmonic };
            let s = SummableSchedule::new(kind, bbar).unwrap();
            let mut sum = 0.0;
            let mut prev_b = s.b_minus1();
            for k in 0..=k_max {
                let (a, b) = s.values(k);
                prop_assert!(a >= 0.0);
                prop_assert!(b <= prev_b);
                sum += a;
                prev_b = b;
            }
            prop_assert!(close(sum, s.b_minus1() - prev_b, 1e-12));
            prop_assert!(sum <= s.b_minus1() * (1.0 + 1e-12));
        }

        #[test]
        fn forcing_respects_budget_and_caps(
            g2 in 1e-12f64..1e6, a in 0.0f64..1e4,
            cap in 0.0f64..0.5, bar in 0.0f64..0.5,
        ) {
            let g = forcing_for_iteration(g2, a, cap, bar).unwrap();
            prop_assert!(g.is_nonnegative());
            prop_assert!((g.gamma1 + g.gamma2) * g2 <= a + 1e-12 * a);
            prop_assert!(g.gamma2 <= cap);
            prop_assert!(g.gamma3 <= bar);
        }
    }
}
