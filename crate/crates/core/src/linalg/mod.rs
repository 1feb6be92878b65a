//! Dense symmetric matrix algebra and partial eigendecomposition.
//!
//! Every iterate, projection and gradient of the spectrahedron problems is a
//! [`SymMatrix`]. Vector-valued sets work on `DVector<f64>`. Both implement
//! [`Point`], the minimal inner-product-space interface the solvers need.

mod eigen;

pub use eigen::{
    full_eigen, largest_eigenpair, leading_eigenpairs, EigenOptions, EigenPair,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of a finite-dimensional real inner-product space.
pub trait Point: Clone + Send + Sync + std::fmt::Debug {
    fn dot(&self, other: &Self) -> f64;

    /// `self += alpha * x`
    fn axpy(&mut self, alpha: f64, x: &Self);

    fn scale_mut(&mut self, alpha: f64);

    fn is_finite(&self) -> bool;

    fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `self - other`
    fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    fn dist_sq(&self, other: &Self) -> f64 {
        self.sub(other).norm_sq()
    }

    fn dist(&self, other: &Self) -> f64 {
        self.dist_sq(other).sqrt()
    }
}

impl Point for DVector<f64> {
    fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        nalgebra::Matrix::dot(self, other)
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        nalgebra::Matrix::axpy(self, alpha, x, 1.0);
    }

    fn scale_mut(&mut self, alpha: f64) {
        *self *= alpha;
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

/// Dense symmetric `n x n` matrix.
///
/// The symmetric part of a general square matrix is taken at construction;
/// every arithmetic operation below keeps `a[(i, j)] == a[(j, i)]` bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    data: DMatrix<f64>,
}

impl SymMatrix {
    /// Symmetric part `(V + V^T) / 2` of a square matrix.
    pub fn from_general(v: &DMatrix<f64>) -> Result<Self> {
        if v.nrows() != v.ncols() {
            return Err(Error::ShapeMismatch {
                left: v.shape(),
                right: (v.ncols(), v.nrows()),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = v.nrows();
        let data = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                v[(i, i)]
            } else {
                0.5 * (v[(i, j)] + v[(j, i)])
            }
        });
        Ok(Self { data })
    }

    /// Row-major entries of an `n x n` matrix, symmetrized.
    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::ShapeMismatch {
                left: (n, n),
                right: (entries.len(), 1),
            });
        }
        Self::from_general(&DMatrix::from_row_slice(n, n, entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            data: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            data: DMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            data: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    /// `q q^T`
    pub fn rank_one(q: &DVector<f64>) -> Self {
        let mut out = Self::zeros(q.len());
        out.add_rank_one(1.0, q);
        out
    }

    /// Wraps a matrix that is already exactly symmetric.
    pub(crate) fn from_symmetric_unchecked(data: DMatrix<f64>) -> Self {
        debug_assert!(data.nrows() == data.ncols());
        debug_assert!(data == data.transpose(), "matrix is not exactly symmetric");
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    /// `self += lambda * q q^T`, written entry by entry so that the result
    /// stays exactly symmetric.
    pub fn add_rank_one(&mut self, lambda: f64, q: &DVector<f64>) {
        let n = self.dim();
        assert_eq!(q.len(), n);
        for j in 0..n {
            let s = lambda * q[j];
            if s == 0.0 {
                continue;
            }
            for i in 0..n {
                // q[i] * (lambda * q[j]) and q[j] * (lambda * q[i]) differ in
                // rounding, so fill both triangles from the upper one below.
                self.data[(i, j)] += s * q[i];
            }
        }
        self.resymmetrize_from_upper();
    }

    fn resymmetrize_from_upper(&mut self) {
        let n = self.dim();
        for j in 0..n {
            for i in (j + 1)..n {
                self.data[(i, j)] = self.data[(j, i)];
            }
        }
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.data * x
    }

    pub fn mul_vec_into(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        out.gemv(1.0, &self.data, x, 0.0);
    }

    /// `q^T S q`
    pub fn quadratic_form(&self, q: &DVector<f64>) -> f64 {
        q.dot(&self.mul_vec(q))
    }

    /// Smallest eigenvalue, from a full decomposition.
    pub fn min_eigenvalue(&self) -> f64 {
        let (values, _) = full_eigen(self);
        values.last().copied().unwrap_or(0.0)
    }
}

impl Point for SymMatrix {
    fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "matrix dimension mismatch");
        self.data.dot(&other.data)
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        assert_eq!(self.dim(), x.dim(), "matrix dimension mismatch");
        self.data.zip_apply(&x.data, |a, b| *a += alpha * b);
    }

    fn scale_mut(&mut self, alpha: f64) {
        self.data *= alpha;
    }

    fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Add<&SymMatrix> for &SymMatrix {
    type Output = SymMatrix;

    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl std::ops::Sub<&SymMatrix> for &SymMatrix {
    type Output = SymMatrix;

    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        Point::sub(self, rhs)
    }
}

impl std::ops::Mul<f64> for &SymMatrix {
    type Output = SymMatrix;

    fn mul(self, rhs: f64) -> SymMatrix {
        let mut out = self.clone();
        out.scale_mut(rhs);
        out
    }
}

/// `tr(A^T B)` for same-shape matrices.
pub fn frobenius_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(a.dot(b))
}

/// `sqrt(<A, A>)`
pub fn frobenius_norm(a: &DMatrix<f64>) -> f64 {
    a.norm()
}
