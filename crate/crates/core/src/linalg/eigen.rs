//! Leading eigenpairs of dense symmetric matrices.
//!
//! The partial solver is a thick-restart Krylov scheme: the basis is grown by
//! repeated products with `S` and kept orthonormal by two passes of classical
//! Gram-Schmidt, the projected matrix `Q^T S Q` is formed explicitly from the
//! stored products, and on restart the best Ritz vectors are kept together with
//! the residual direction of the first unconverged pair. When the Krylov
//! sequence breaks down (an invariant subspace was found) a fresh random
//! direction is injected so repeated eigenvalues can still be resolved.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SymMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: DVector<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenOptions {
    /// Residual target relative to `max(1, ||S||_F)`.
    pub tol: f64,
    /// Budget of matrix-vector products; `None` means `50 n`.
    pub max_matvecs: Option<usize>,
    /// Seed for start and injected directions.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_matvecs: None,
            seed: 0x5eed_e16e,
        }
    }
}

/// Full decomposition, eigenvalues in non-increasing order and eigenvectors as
/// the matching columns.
pub fn full_eigen(s: &SymMatrix) -> (Vec<f64>, DMatrix<f64>) {
    let n = s.dim();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let (eigenvalues, eigenvectors) = dense_symmetric_eigen(s.as_matrix());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
    let values = order.iter().map(|&i| eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Finite output with `|A Q - Q D|_F <= 1e-10 |A|_F`.
fn accurate(a: &DMatrix<f64>, values: &DVector<f64>, vectors: &DMatrix<f64>) -> bool {
    if !values.iter().chain(vectors.iter()).all(|v| v.is_finite()) {
        return false;
    }
    let residual = a * vectors - vectors * DMatrix::from_diagonal(values);
    residual.norm() <= 1e-10 * a.norm().max(f64::MIN_POSITIVE)
}

fn qr_or_jacobi(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    if accurate(a, &eig.eigenvalues, &eig.eigenvectors) {
        (eig.eigenvalues, eig.eigenvectors)
    } else {
        jacobi_eigen(a)
    }
}

/// Unordered eigendecomposition of a symmetric matrix with finite entries.
///
/// nalgebra's implicit QR occasionally returns NaN, or finite but wrong
/// pairs, on very sparse inputs. Every result is checked against its
/// residual. On failure the decoupled coordinates (rows with all off-diagonal
/// entries exactly zero) are split off as exact pairs `(a_ii, e_i)` and only
/// the coupled block is decomposed, with cyclic Jacobi as last resort.
pub(crate) fn dense_symmetric_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    if accurate(a, &eig.eigenvalues, &eig.eigenvectors) {
        return (eig.eigenvalues, eig.eigenvectors);
    }
    let n = a.nrows();
    let coupled: Vec<usize> = (0..n)
        .filter(|&i| (0..n).any(|j| j != i && a[(i, j)] != 0.0))
        .collect();
    let block = DMatrix::from_fn(coupled.len(), coupled.len(), |r, c| a[(coupled[r], coupled[c])]);
    let (block_values, block_vectors) = qr_or_jacobi(&block);
    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for c in 0..coupled.len() {
        values[c] = block_values[c];
        for (r, &row) in coupled.iter().enumerate() {
            vectors[(row, c)] = block_vectors[(r, c)];
        }
    }
    let mut c = coupled.len();
    for i in (0..n).filter(|i| coupled.binary_search(i).is_err()) {
        values[c] = a[(i, i)];
        vectors[(i, c)] = 1.0;
        c += 1;
    }
    (values, vectors)
}

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
fn jacobi_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = DMatrix::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    (a.diagonal(), v)
}

/// The `p` algebraically largest eigenpairs of `s`, in non-increasing order.
///
/// `warm` vectors (for instance the result of a previous call on a nearby
/// matrix) seed the search subspace; they need not be orthonormal.
pub fn leading_eigenpairs(
    s: &SymMatrix,
    p: usize,
    opts: &EigenOptions,
    warm: &[DVector<f64>],
) -> Result<Vec<EigenPair>> {
    let n = s.dim();
    if p == 0 || p > n {
        return Err(Error::InvalidParameter(format!(
            "requested {p} eigenpairs of a {n}x{n} matrix"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eigen tolerance must be positive, got {}",
            opts.tol
        )));
    }
    if !super::Point::is_finite(s) {
        return Err(Error::NonFinite);
    }
    KrylovSolver::new(s, p, opts).run(warm)
}

/// Leading eigenpair; equivalent to `leading_eigenpairs(s, 1, ..)`.
pub fn largest_eigenpair(
    s: &SymMatrix,
    opts: &EigenOptions,
    warm: Option<&DVector<f64>>,
) -> Result<EigenPair> {
    let warm: Vec<DVector<f64>> = warm.into_iter().cloned().collect();
    let mut pairs = leading_eigenpairs(s, 1, opts, &warm)?;
    Ok(pairs.swap_remove(0))
}

struct KrylovSolver<'a> {
    s: &'a SymMatrix,
    p: usize,
    n: usize,
    max_basis: usize,
    keep: usize,
    max_matvecs: usize,
    target: f64,
    rng: ChaCha8Rng,
    basis: Vec<DVector<f64>>,
    images: Vec<DVector<f64>>,
    matvecs: usize,
}

impl<'a> KrylovSolver<'a> {
    fn new(s: &'a SymMatrix, p: usize, opts: &EigenOptions) -> Self {
        let n = s.dim();
        let max_basis = n.min((2 * p + 20).max(30));
        let keep = (p + (max_basis - p) / 2).min(max_basis - 1).max(p.min(max_basis - 1));
        Self {
            s,
            p,
            n,
            max_basis,
            keep,
            max_matvecs: opts.max_matvecs.unwrap_or(50 * n).max(max_basis),
            target: opts.tol * s.frobenius_norm().max(1.0),
            rng: ChaCha8Rng::seed_from_u64(opts.seed),
            basis: Vec::with_capacity(max_basis),
            images: Vec::with_capacity(max_basis),
            matvecs: 0,
        }
    }

    /// Orthogonalizes `v` against the basis and appends it with its image
    /// under `S`. Returns `false` when `v` is numerically in the span.
    fn push(&mut self, mut v: DVector<f64>) -> bool {
        let initial = v.norm();
        if !(initial > 0.0) || !initial.is_finite() {
            return false;
        }
        for _ in 0..2 {
            for q in &self.basis {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let norm = v.norm();
        if norm <= 1e-10 * initial {
            return false;
        }
        v /= norm;
        let image = self.s.mul_vec(&v);
        self.matvecs += 1;
        self.basis.push(v);
        self.images.push(image);
        true
    }

    fn random_vector(&mut self) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |_, _| self.rng.gen_range(-1.0..1.0))
    }

    fn push_random(&mut self) -> bool {
        for _ in 0..8 {
            let v = self.random_vector();
            if self.push(v) {
                return true;
            }
        }
        false
    }

    fn run(mut self, warm: &[DVector<f64>]) -> Result<Vec<EigenPair>> {
        for w in warm.iter().take(self.max_basis - 1) {
            if w.len() == self.n {
                self.push(w.clone());
            }
        }
        if !self.push_random() && self.basis.is_empty() {
            return Err(Error::InvalidParameter("could not build a start vector".into()));
        }

        loop {
            self.expand();
            let ritz = self.rayleigh_ritz();
            let worst = ritz
                .residual_norms
                .iter()
                .take(self.p)
                .fold(0.0f64, |a, &b| a.max(b));
            let full_space = self.basis.len() >= self.n;
            // On the whole space the Ritz pairs are exact up to rounding.
            if worst <= self.target || full_space {
                return Ok(ritz.into_pairs(self.p));
            }
            if self.matvecs >= self.max_matvecs {
                return Err(Error::EigenNotConverged {
                    matvecs: self.matvecs,
                    residual: worst,
                    target: self.target,
                });
            }
            self.restart(ritz);
        }
    }

    /// Grows the basis by Krylov steps up to `max_basis` vectors.
    fn expand(&mut self) {
        while self.basis.len() < self.max_basis && self.matvecs < self.max_matvecs {
            let next = self.images.last().cloned().expect("basis is never empty");
            if !self.push(next) && (self.basis.len() >= self.n || !self.push_random()) {
                break;
            }
        }
    }

    fn rayleigh_ritz(&self) -> Ritz {
        let m = self.basis.len();
        let h = DMatrix::from_fn(m, m, |i, j| {
            if i <= j {
                self.basis[i].dot(&self.images[j])
            } else {
                self.basis[j].dot(&self.images[i])
            }
        });
        let h = (&h + h.transpose()) * 0.5;
        let (eigenvalues, eigenvectors) = dense_symmetric_eigen(&h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));

        let wanted = self.keep.max(self.p).min(m);
        let mut values = Vec::with_capacity(wanted);
        let mut vectors = Vec::with_capacity(wanted);
        let mut images = Vec::with_capacity(wanted);
        let mut residuals = Vec::with_capacity(wanted);
        for &idx in order.iter().take(wanted) {
            let z = eigenvectors.column(idx);
            let theta = eigenvalues[idx];
            let mut y = DVector::zeros(self.n);
            let mut sy = DVector::zeros(self.n);
            for (k, zk) in z.iter().enumerate() {
                y.axpy(*zk, &self.basis[k], 1.0);
                sy.axpy(*zk, &self.images[k], 1.0);
            }
            let residual = &sy - &y * theta;
            residuals.push(residual);
            values.push(theta);
            vectors.push(y);
            images.push(sy);
        }
        let residual_norms = residuals.iter().map(|r| r.norm()).collect();
        Ritz {
            values,
            vectors,
            images,
            residuals,
            residual_norms,
        }
    }

    fn restart(&mut self, ritz: Ritz) {
        let first_unconverged = ritz
            .residual_norms
            .iter()
            .position(|&r| r > self.target)
            .unwrap_or(0);
        let keep = self.keep.min(ritz.vectors.len());
        let Ritz {
            vectors,
            images,
            mut residuals,
            ..
        } = ritz;
        let direction = residuals.swap_remove(first_unconverged);

        self.basis.clear();
        self.images.clear();
        for (v, image) in vectors.into_iter().zip(images).take(keep) {
            // Ritz vectors are orthonormal up to rounding; renormalize only.
            let norm = v.norm();
            self.basis.push(v / norm);
            self.images.push(image / norm);
        }
        if !self.push(direction) {
            self.push_random();
        }
    }
}

struct Ritz {
    values: Vec<f64>,
    vectors: Vec<DVector<f64>>,
    images: Vec<DVector<f64>>,
    residuals: Vec<DVector<f64>>,
    residual_norms: Vec<f64>,
}

impl Ritz {
    fn into_pairs(self, p: usize) -> Vec<EigenPair> {
        self.values
            .into_iter()
            .zip(self.vectors)
            .take(p)
            .map(|(value, vector)| EigenPair { value, vector })
            .collect()
    }
}
