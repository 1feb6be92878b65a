//! The spectrahedron `{X symmetric : X >= 0, tr X = 1}`.
//!
//! The exact projection of `V = Q D Q^T` is `Q P(D) Q^T` with `P` the
//! projection of the eigenvalues onto the unit simplex. Restricting the
//! projection to rank `p` only needs the `p` leading eigenpairs, which is what
//! the adaptive inexact projector exploits: it raises `p` until the
//! rank-restricted projection certifies as a feasible inexact projection.

use nalgebra::DVector;

use super::{project_simplex, ConvexSet, InexactProjection, SetDescriptor, WarmStart};
use crate::error::{Error, Result};
use crate::linalg::{
    full_eigen, largest_eigenpair, leading_eigenpairs, EigenOptions, Point, SymMatrix,
};
use crate::schedules::{ForcingParams, SqDistances, ToleranceFn};

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrahedronOptions {
    pub eig: EigenOptions,
    /// Absolute tolerance on the trace and on the most negative eigenvalue.
    pub feas_tol: f64,
    /// Ranks with `rank >= dense_fraction * n` are computed from a full
    /// decomposition instead of the Krylov solver.
    pub dense_fraction: f64,
}

impl Default for SpectrahedronOptions {
    fn default() -> Self {
        Self {
            eig: EigenOptions::default(),
            feas_tol: 1e-9,
            dense_fraction: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrahedron {
    dim: usize,
    opts: SpectrahedronOptions,
}

/// Rank-restricted projection of a fixed `V`.
struct RankProjection {
    point: SymMatrix,
    vectors: Vec<DVector<f64>>,
}

impl Spectrahedron {
    pub fn new(dim: usize) -> Result<Self> {
        Self::with_options(dim, SpectrahedronOptions::default())
    }

    pub fn with_options(dim: usize, opts: SpectrahedronOptions) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("spectrahedron dimension must be positive".into()));
        }
        Ok(Self { dim, opts })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn options(&self) -> &SpectrahedronOptions {
        &self.opts
    }

    fn check_dim(&self, x: &SymMatrix) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::ShapeMismatch {
                left: (self.dim, self.dim),
                right: (x.dim(), x.dim()),
            });
        }
        Ok(())
    }

    fn uses_dense(&self, rank: usize) -> bool {
        rank >= self.dim || rank as f64 >= self.opts.dense_fraction * self.dim as f64
    }

    /// `sum_i lambda_i q_i q_i^T` with `lambda` the simplex projection of the
    /// given leading eigenvalues.
    fn assemble(&self, values: &[f64], vectors: Vec<DVector<f64>>) -> Result<RankProjection> {
        let weights = project_simplex(values)?;
        let mut point = SymMatrix::zeros(self.dim);
        for (w, q) in weights.iter().zip(&vectors) {
            if *w > 0.0 {
                point.add_rank_one(*w, q);
            }
        }
        Ok(RankProjection { point, vectors })
    }

    /// The projection of `v` onto the rank-`p` slice of the set.
    pub fn rank_restricted_projection(
        &self,
        v: &SymMatrix,
        rank: usize,
        warm: &[DVector<f64>],
    ) -> Result<SymMatrix> {
        self.check_dim(v)?;
        let rank = rank.clamp(1, self.dim);
        let mut dense = None;
        Ok(self.rank_projection(v, rank, warm, &mut dense)?.point)
    }

    fn rank_projection(
        &self,
        v: &SymMatrix,
        rank: usize,
        warm: &[DVector<f64>],
        dense: &mut Option<(Vec<f64>, nalgebra::DMatrix<f64>)>,
    ) -> Result<RankProjection> {
        if self.uses_dense(rank) {
            let (values, vectors) = dense.get_or_insert_with(|| full_eigen(v));
            let cols = (0..rank).map(|i| vectors.column(i).into_owned()).collect();
            return self.assemble(&values[..rank], cols);
        }
        let pairs = leading_eigenpairs(v, rank, &self.opts.eig, warm)?;
        let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        self.assemble(&values, pairs.into_iter().map(|p| p.vector).collect())
    }
}

impl ConvexSet<SymMatrix> for Spectrahedron {
    fn contains(&self, x: &SymMatrix, feas_tol: f64) -> bool {
        x.dim() == self.dim && self.violation(x) <= feas_tol
    }

    fn violation(&self, x: &SymMatrix) -> f64 {
        if x.dim() != self.dim || !x.is_finite() {
            return f64::INFINITY;
        }
        let trace = (x.trace() - 1.0).abs();
        let negated = x * -1.0;
        let most_negative = match largest_eigenpair(&negated, &self.opts.eig, None) {
            Ok(pair) => pair.value,
            Err(_) => -x.min_eigenvalue(),
        };
        trace.max(most_negative.max(0.0))
    }

    /// `q q^T` for a unit leading eigenvector `q` of `c`.
    fn support_point(&self, c: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(c)?;
        let pair = largest_eigenpair(c, &self.opts.eig, None)?;
        Ok(SymMatrix::rank_one(&pair.vector))
    }

    fn exact_project(&self, v: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(v)?;
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        let (values, vectors) = full_eigen(v);
        let cols = (0..self.dim).map(|i| vectors.column(i).into_owned()).collect();
        Ok(self.assemble(&values, cols)?.point)
    }

    /// Adaptive rank-`p` projection: starting from `warm.rank`, accept the
    /// rank-`p` projection `W_p` once
    /// `<W_p - V, Y_p - W_p> >= -phi(U, V, W_p)` with `Y_p` the support point
    /// in direction `V - W_p`, otherwise increase `p`. At `p = n`, `W_p` is the
    /// exact projection and is always accepted.
    fn inexact_project(
        &self,
        v: &SymMatrix,
        u: &SymMatrix,
        gamma: &ForcingParams,
        phi: &ToleranceFn,
        warm: &WarmStart,
    ) -> Result<InexactProjection<SymMatrix>> {
        self.check_dim(v)?;
        self.check_dim(u)?;
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = self.dim;
        let v_u = v.dist_sq(u);
        let mut rank = warm.rank.clamp(1, n);
        let mut vectors = warm.vectors.clone();
        let mut support = warm.support.clone();
        let mut dense = None;
        loop {
            let wrap = |source: Error| Error::Projection {
                rank,
                source: Box::new(source),
            };
            let projection = self
                .rank_projection(v, rank, &vectors, &mut dense)
                .map_err(wrap)?;
            let w = projection.point;
            let residual = v.sub(&w);
            let top = largest_eigenpair(&residual, &self.opts.eig, support.as_ref()).map_err(wrap)?;
            // <V - W, Y - W> with Y = q q^T
            let lhs = residual.quadratic_form(&top.vector) - residual.dot(&w);
            let distances = SqDistances {
                v_u,
                w_v: residual.norm_sq(),
                w_u: w.dist_sq(u),
            };
            let gap = lhs - phi.eval_distances(gamma, &distances);
            support = Some(top.vector);
            vectors = projection.vectors;
            if gap <= 0.0 || rank == n {
                return Ok(InexactProjection {
                    point: w,
                    rank_used: Some(rank),
                    certificate_gap: gap,
                    warm: WarmStart {
                        rank,
                        vectors,
                        support,
                    },
                });
            }
            rank += 1;
        }
    }

    fn descriptor(&self) -> SetDescriptor {
        SetDescriptor::Spectrahedron { dim: self.dim }
    }
}
