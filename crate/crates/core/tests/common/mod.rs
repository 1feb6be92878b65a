#![allow(dead_code)]

use ginexpm::linalg::SymMatrix;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> SymMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-scale..scale));
    SymMatrix::from_general(&g).unwrap()
}

/// `G G^T / tr(G G^T)` with a random rank between 1 and n.
pub fn random_feasible(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let rank = rng.gen_range(1..=n);
    let g = DMatrix::from_fn(n, rank, |_, _| rng.gen_range(-1.0..1.0));
    let p = &g * g.transpose();
    let t = p.trace();
    SymMatrix::from_general(&(p / t)).unwrap()
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-scale..scale))
}
