//! Fixtures shared by the benchmarks.

use ginexpm::linalg::{Point, SymMatrix};
use ginexpm::problems::{default_density, generate_instance, starting_point};
use ginexpm::schedules::ForcingParams;
use ginexpm::sets::Spectrahedron;
use ginexpm::solver::{solve_constant, ConstantStepConfig, Objective, SolveOptions};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Symmetric `n x n` matrix with entries uniform in `[-1, 1]`.
pub fn random_symmetric(n: usize, seed: u64) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    SymMatrix::from_general(&g).unwrap()
}

/// What the constant-step solver projects after `warmup` iterations on a
/// seeded least-squares instance: the iterate `x`, the gradient step `v`,
/// and the rank and forcing parameters of the solver's last projection.
pub fn gradient_step_point(n: usize, seed: u64, warmup: usize) -> (SymMatrix, SymMatrix, usize, ForcingParams) {
    let inst = generate_instance(n, 2 * n, 10, default_density(n, 2 * n), seed).unwrap();
    let set = Spectrahedron::new(n).unwrap();
    let cfg = ConstantStepConfig {
        max_iter: warmup,
        ..ConstantStepConfig::for_lipschitz(inst.lipschitz_constant(), 0.0)
    };
    let res = solve_constant(&inst, &set, starting_point(0.0, n).unwrap(), &cfg, &SolveOptions::default()).unwrap();
    let last = res.records.last().unwrap();
    let (rank, gamma) = (last.rank_used.unwrap_or(1), last.gamma);
    let mut v = res.x.clone();
    v.axpy(-cfg.alpha, &inst.gradient(&res.x));
    (res.x, v, rank, gamma)
}

pub fn random_vector(p: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
