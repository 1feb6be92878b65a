//! Convex-set oracles and the feasible inexact projection contract.
//!
//! A point `w` is a feasible inexact projection of `v` onto `C` relative to an
//! anchor `u in C` when `w in C` and `<v - w, y - w> <= phi_gamma(u, v, w)` for
//! every `y in C`. The left side is linear in `y`, so its supremum is attained
//! at a support point of `C` in direction `v - w`, which turns the membership
//! test into a single linear maximization ([`certify_inexact_projection`]).

mod simple;
mod simplex;
mod spectrahedron;

pub use simple::{Ball, BoxSet, LorentzCone, SimplexSet};
pub use simplex::project_simplex;
pub use spectrahedron::{Spectrahedron, SpectrahedronOptions};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::Point;
use crate::schedules::{ForcingParams, ToleranceFn};

/// Carried by the caller between consecutive projections of nearby points.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WarmStart {
    /// Rank to try first (spectrahedron only); `0` means "use 1".
    pub rank: usize,
    /// Eigenvectors of the previous projected point.
    pub vectors: Vec<DVector<f64>>,
    /// Previous support direction.
    pub support: Option<DVector<f64>>,
}

impl WarmStart {
    pub fn with_rank(rank: usize) -> Self {
        Self {
            rank,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InexactProjection<P> {
    pub point: P,
    /// Rank of the accepted rank-restricted projection (spectrahedron only).
    pub rank_used: Option<usize>,
    /// `sup_y <v - w, y - w> - phi_gamma(u, v, w)`; nonpositive on acceptance.
    pub certificate_gap: f64,
    /// State for the next call.
    pub warm: WarmStart,
}

/// Closed convex set with the oracles the solvers need.
pub trait ConvexSet<P: Point>: Send + Sync {
    /// Membership up to `feas_tol`.
    fn contains(&self, x: &P, feas_tol: f64) -> bool;

    /// How far `x` is from satisfying the constraints (zero inside).
    fn violation(&self, x: &P) -> f64;

    /// A maximizer of `<c, y>` over the set.
    fn support_point(&self, c: &P) -> Result<P>;

    /// Euclidean projection.
    fn exact_project(&self, v: &P) -> Result<P>;

    /// Some point of `P_C(phi_gamma, u, v)`. The default returns the exact
    /// projection, which belongs to every such set.
    fn inexact_project(
        &self,
        v: &P,
        u: &P,
        gamma: &ForcingParams,
        phi: &ToleranceFn,
        warm: &WarmStart,
    ) -> Result<InexactProjection<P>> {
        let _ = warm;
        let point = self.exact_project(v)?;
        let (_, certificate_gap) = certify_inexact_projection(self, u, v, &point, gamma, phi)?;
        Ok(InexactProjection {
            point,
            rank_used: None,
            certificate_gap,
            warm: WarmStart::default(),
        })
    }

    fn descriptor(&self) -> SetDescriptor;
}

/// Serializable description of a set, used by configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetDescriptor {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Simplex { dim: usize },
    Lorentz { dim: usize },
    Spectrahedron { dim: usize },
}

/// Slack allowed in [`certify_inexact_projection`] for rounding in the
/// support-point computation.
pub const CERTIFY_RTOL: f64 = 1e-10;

/// Decides `w in P_C(phi_gamma, u, v)` through the support point in direction
/// `v - w`. Returns the verdict and the signed gap
/// `<v - w, y* - w> - phi_gamma(u, v, w)`.
///
/// Membership of `w` itself is not re-checked here.
pub fn certify_inexact_projection<P, C>(
    set: &C,
    u: &P,
    v: &P,
    w: &P,
    gamma: &ForcingParams,
    phi: &ToleranceFn,
) -> Result<(bool, f64)>
where
    P: Point,
    C: ConvexSet<P> + ?Sized,
{
    let direction = v.sub(w);
    let y = set.support_point(&direction)?;
    let lhs = direction.dot(&y) - direction.dot(w);
    let gap = lhs - phi.eval(gamma, u, v, w);
    let scale = direction.norm() * (1.0 + w.norm() + y.norm());
    Ok((gap <= CERTIFY_RTOL * scale.max(1e-300), gap))
}
