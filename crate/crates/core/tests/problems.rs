mod common;

use common::random_symmetric;
use ginexpm::linalg::{Point, SymMatrix};
use ginexpm::problems::{
    default_density, generate_instance, make_boxqp, planted_solution, read_instance,
    starting_point, write_instance,
};
use ginexpm::sets::{ConvexSet, Spectrahedron};
use ginexpm::solver::{directional_derivatives, Objective};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small() -> ginexpm::problems::SpectrahedronLSQ {
    generate_instance(12, 20, 3, 0.2, 42).unwrap()
}

/// `|A^T A|_F` from the dense matrix.
fn dense_gram_norm(a: &DMatrix<f64>) -> f64 {
    (a.transpose() * a).norm()
}

#[test]
fn planted_matrix_has_trace_omega_and_zero_residual() {
    for (n, omega) in [(5, 2), (30, 10), (200, 20)] {
        let xbar = planted_solution(n, omega, 9);
        assert!((xbar.trace() - omega as f64).abs() < 1e-12);
        assert!(!Spectrahedron::new(n).unwrap().contains(&xbar, 1e-9));
    }
    let inst = small();
    let xbar = inst.planted_solution();
    let (f, g) = inst.value_and_gradient(&xbar);
    assert!(f.abs() < 1e-26, "{f}");
    assert!(g.norm() < 1e-13);
}

#[test]
fn gradient_matches_central_differences() {
    let inst = small();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let x = random_symmetric(&mut rng, 12, 1.0);
        let d = random_symmetric(&mut rng, 12, 1.0);
        let (analytic, fd) = directional_derivatives(&inst, &x, &d, 1e-5);
        assert!((analytic - fd).abs() <= 1e-5 * analytic.abs().max(1.0), "{analytic} vs {fd}");
    }
}

#[test]
fn lipschitz_constant_is_gram_frobenius_norm() {
    let inst = small();
    let dense = inst.a().to_dense();
    assert!((inst.lipschitz_constant() - dense_gram_norm(&dense)).abs() < 1e-12 * inst.lipschitz_constant());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let x = random_symmetric(&mut rng, 12, 1.0);
        let y = random_symmetric(&mut rng, 12, 1.0);
        let lhs = inst.gradient(&x).dist(&inst.gradient(&y));
        assert!(lhs <= inst.lipschitz_constant() * x.dist(&y) * (1.0 + 1e-12));
    }
}

#[test]
fn objective_is_midpoint_convex() {
    let inst = small();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let x = random_symmetric(&mut rng, 12, 1.0);
        let y = random_symmetric(&mut rng, 12, 1.0);
        let mut mid = x.clone();
        mid.axpy(1.0, &y);
        mid.scale_mut(0.5);
        let (fx, fy) = (inst.value(&x), inst.value(&y));
        assert!(inst.value(&mid) <= 0.5 * (fx + fy) + 1e-12 * (fx + fy));
    }
}

#[test]
fn generation_is_deterministic_and_round_trips_bit_exactly() {
    let a = generate_instance(40, 60, 5, 0.05, 77).unwrap();
    let b = generate_instance(40, 60, 5, 0.05, 77).unwrap();
    assert_eq!(a.a(), b.a());
    assert_eq!(a.b(), b.b());
    let c = generate_instance(40, 60, 5, 0.05, 78).unwrap();
    assert_ne!(a.a(), c.a());

    let mut bytes = Vec::new();
    write_instance(&a, &mut bytes).unwrap();
    let back = read_instance(bytes.as_slice()).unwrap();
    assert_eq!(back.meta(), a.meta());
    assert_eq!(back.a(), a.a());
    assert!(back.b().iter().zip(a.b().iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    let mut again = Vec::new();
    write_instance(&back, &mut again).unwrap();
    assert_eq!(bytes, again);

    assert!(read_instance(&bytes[..bytes.len() - 1]).is_err());
    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(read_instance(trailing.as_slice()).is_err());
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(read_instance(bad.as_slice()).is_err());
}

#[test]
fn desk_instance_loads_with_finite_start_value() {
    let inst = generate_instance(200, 400, 10, default_density(200, 400), 1).unwrap();
    let x0 = starting_point(0.0, 200).unwrap();
    assert!(inst.value(&x0).is_finite());
    assert!(generate_instance(200, 100, 10, 0.01, 1).is_err());
}

#[test]
fn starting_points_are_feasible() {
    let c = Spectrahedron::new(7).unwrap();
    for beta in [0.0, 0.3, 0.5, 0.99, 1.0] {
        assert!(c.contains(&starting_point(beta, 7).unwrap(), 1e-12));
    }
    let x = starting_point(0.0, 4).unwrap();
    assert!(x.dist(&(&SymMatrix::identity(4) * 0.25)) < 1e-16);
}

#[test]
fn boxqp_spectrum_matches_request() {
    let qp = make_boxqp(15, 0.3, 3.0, 11).unwrap();
    let eig = SymmetricEigen::new(qp.q().clone()).eigenvalues;
    assert!((eig.min() - 0.3).abs() < 1e-10);
    assert!((eig.max() - 3.0).abs() < 1e-10);
    let x = qp.solution().unwrap();
    assert!(qp.set().contains(x, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn boxqp_planted_point_is_stationary(seed in 0u64..1000, n in 1usize..12) {
        let qp = make_boxqp(n, 0.5, 4.0, seed).unwrap();
        let x = qp.solution().unwrap().clone();
        let g = qp.gradient(&x);
        // <grad, y - x> >= 0 at every vertex-direction of the box
        for i in 0..n {
            for target in [-1.0, 1.0] {
                prop_assert!(g[i] * (target - x[i]) >= -1e-12);
            }
        }
    }

    #[test]
    fn lsq_gradient_is_symmetric(seed in 0u64..100) {
        let inst = generate_instance(6, 8, 2, 0.5, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_symmetric(&mut rng, 6, 1.0);
        let g = inst.gradient(&x);
        let m = g.as_matrix();
        prop_assert!((m - m.transpose()).norm() == 0.0);
    }
}
