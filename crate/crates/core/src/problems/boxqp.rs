use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sets::BoxSet;
use crate::solver::Objective;

/// `f(x) = 1/2 x^T Q x - b^T x` over a box, `Q` symmetric positive definite.
#[derive(Clone, Debug)]
pub struct BoxQP {
    q: DMatrix<f64>,
    b: DVector<f64>,
    set: BoxSet,
    mu: f64,
    lipschitz: f64,
    solution: Option<DVector<f64>>,
}

impl BoxQP {
    /// The minimizer is recorded when it has a closed form: `n = 1`, or the
    /// unconstrained minimizer `Q^{-1} b` lies in the box.
    pub fn new(q: DMatrix<f64>, b: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = b.len();
        if q.shape() != (n, n) {
            return Err(Error::ShapeMismatch {
                left: q.shape(),
                right: (n, n),
            });
        }
        if q.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let q = (&q + q.transpose()) * 0.5;
        let set = BoxSet::new(lower, upper)?;
        if set.dim() != n {
            return Err(Error::InvalidParameter(format!("box of dimension {} for n = {n}", set.dim())));
        }
        let eig = SymmetricEigen::new(q.clone());
        let mu = eig.eigenvalues.min();
        let lipschitz = eig.eigenvalues.max();
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!("Q is not positive definite (min eigenvalue {mu})")));
        }
        let b = DVector::from_vec(b);
        let unconstrained = q.clone().cholesky().map(|c| c.solve(&b));
        let solution = if n == 1 {
            Some(DVector::from_element(1, (b[0] / q[(0, 0)]).clamp(set.lower()[0], set.upper()[0])))
        } else {
            unconstrained.filter(|x| {
                x.iter()
                    .zip(set.lower().iter().zip(set.upper().iter()))
                    .all(|(v, (l, u))| l <= v && v <= u)
            })
        };
        Ok(Self {
            q,
            b,
            set,
            mu,
            lipschitz,
            solution,
        })
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn set(&self) -> &BoxSet {
        &self.set
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lipschitz_constant(&self) -> f64 {
        self.lipschitz
    }

    pub fn solution(&self) -> Option<&DVector<f64>> {
        self.solution.as_ref()
    }
}

impl Objective<DVector<f64>> for BoxQP {
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.q * x)) - self.b.dot(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.q * x - &self.b
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    fn strong_convexity(&self) -> Option<f64> {
        Some(self.mu)
    }

    fn optimal_value_hint(&self) -> Option<f64> {
        self.solution.as_ref().map(|x| self.value(x))
    }
}

/// Random orthogonal matrix from the QR factor of a uniform random matrix.
fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let entries = Uniform::new(-1.0, 1.0);
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| entries.sample(rng));
        let qr = m.qr();
        if qr.r().diagonal().iter().all(|d: &f64| d.abs() > 1e-8) {
            return qr.q();
        }
    }
}

/// Strongly convex QP on `[-1, 1]^n` with spectrum spread evenly over
/// `[mu, L]` and a planted constrained minimizer.
///
/// Each coordinate of the minimizer is at the lower bound, the upper bound or
/// interior, and `b` is set so that the gradient at it has the sign pattern
/// the optimality conditions require (zero on interior coordinates).
pub fn make_boxqp(n: usize, mu: f64, lipschitz: f64, seed: u64) -> Result<BoxQP> {
    if n == 0 || !(mu > 0.0 && mu <= lipschitz) || !lipschitz.is_finite() {
        return Err(Error::InvalidParameter(format!("need n > 0 and 0 < mu <= L, got n = {n}, mu = {mu}, L = {lipschitz}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spectrum = DVector::from_fn(n, |i, _| {
        if n == 1 {
            mu
        } else {
            mu + (lipschitz - mu) * i as f64 / (n - 1) as f64
        }
    });
    let u = random_orthogonal(n, &mut rng);
    let q = &u * DMatrix::from_diagonal(&spectrum) * u.transpose();
    let q = (&q + q.transpose()) * 0.5;

    let interior = Uniform::new(-0.5, 0.5);
    let magnitude = Uniform::new(0.1, 1.0);
    let mut x_star = DVector::zeros(n);
    let mut g_star = DVector::zeros(n);
    for i in 0..n {
        match rng.gen_range(0..3) {
            0 => {
                x_star[i] = -1.0;
                g_star[i] = magnitude.sample(&mut rng);
            }
            1 => {
                x_star[i] = 1.0;
                g_star[i] = -magnitude.sample(&mut rng);
            }
            _ => x_star[i] = interior.sample(&mut rng),
        }
    }
    // Same product as in `gradient`, so interior components of the gradient
    // at x_star evaluate to exactly zero.
    let b = &q * &x_star - &g_star;
    let mut qp = BoxQP::new(q, b.iter().copied().collect(), vec![-1.0; n], vec![1.0; n])?;
    qp.solution = Some(x_star);
    Ok(qp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_example() {
        let qp = BoxQP::new(DMatrix::from_element(1, 1, 2.0), vec![4.0], vec![0.0], vec![1.0]).unwrap();
        assert_eq!(qp.solution().unwrap()[0], 1.0);
        assert_eq!(qp.mu(), 2.0);
    }

    #[test]
    fn equal_extremes_give_scaled_identity() {
        let qp = make_boxqp(5, 3.0, 3.0, 9).unwrap();
        assert!((qp.q() - DMatrix::identity(5, 5) * 3.0).norm() < 1e-12);
    }

    #[test]
    fn rejects_indefinite() {
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert!(BoxQP::new(q, vec![0.0; 2], vec![0.0; 2], vec![1.0; 2]).is_err());
    }

    #[test]
    fn planted_gradient_is_exactly_zero_on_interior_coordinates() {
        let qp = make_boxqp(12, 0.5, 5.0, 4).unwrap();
        let x = qp.solution().unwrap();
        let g = qp.gradient(x);
        for i in 0..12 {
            if x[i].abs() < 1.0 {
                assert_eq!(g[i], 0.0);
            } else {
                assert!(g[i] * x[i] < 0.0);
            }
        }
    }
}
