use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, Uniform};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::solver::Objective;

/// ChaCha8 stream ids, one per random quantity, so that changing how one
/// quantity is drawn never shifts the others.
pub const STREAM_A: u64 = 0;
pub const STREAM_POSITIONS: u64 = 1;
pub const STREAM_ANGLES: u64 = 2;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Coordinate-format sparse matrix, entries sorted by `(row, col)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    /// Duplicate coordinates are summed.
    pub fn new(rows: usize, cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(i, j, _)) = entries.iter().find(|&&(i, j, _)| i >= rows || j >= cols) {
            return Err(Error::InvalidParameter(format!(
                "entry ({i}, {j}) outside a {rows}x{cols} matrix"
            )));
        }
        if entries.iter().any(|e| !e.2.is_finite()) {
            return Err(Error::NonFinite);
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));
        entries.dedup_by(|next, kept| {
            if (next.0, next.1) == (kept.0, kept.1) {
                kept.2 += next.2;
                true
            } else {
                false
            }
        });
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            entries: (0..n).map(|i| (i, i, 1.0)).collect(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for &(i, j, a) in &self.entries {
            out[(i, j)] += a;
        }
        out
    }

    /// `A X` for dense `X` with `cols` rows.
    pub fn mul_dense(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.cols {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: x.shape(),
            });
        }
        let mut out = DMatrix::zeros(self.rows, x.ncols());
        for &(i, j, a) in &self.entries {
            for c in 0..x.ncols() {
                out[(i, c)] += a * x[(j, c)];
            }
        }
        Ok(out)
    }

    /// `|A^T A|_F`, accumulated row by row.
    pub fn gram_frobenius_norm(&self) -> f64 {
        let mut gram = DMatrix::<f64>::zeros(self.cols, self.cols);
        for row in self.entries.chunk_by(|a, b| a.0 == b.0) {
            for &(_, j1, a1) in row {
                for &(_, j2, a2) in row {
                    gram[(j1, j2)] += a1 * a2;
                }
            }
        }
        gram.norm()
    }
}

/// Parameters that identify a generated instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub n: usize,
    pub m: usize,
    pub omega: usize,
    pub density: f64,
    pub seed: u64,
}

/// Default density: `1e-4`, raised at small sizes to keep the reference
/// shape's `0.4 m` nonzeros per column (`m = 4000`), and at least 20
/// nonzeros overall.
pub fn default_density(n: usize, m: usize) -> f64 {
    1e-4f64
        .max(0.4 / m as f64)
        .max(20.0 / (n as f64 * m as f64))
        .min(1.0)
}

/// `f(X) = 1/2 |A X - B|_F^2` over symmetric `X`, `A` sparse `m x n`.
#[derive(Clone, Debug)]
pub struct SpectrahedronLSQ {
    meta: InstanceMeta,
    a: SparseMatrix,
    b: DMatrix<f64>,
    /// `B^T` restricted to rows of `A` that have entries.
    bt_active: DMatrix<f64>,
    /// `(row, entries range)` per row of `A` with entries.
    active: Vec<(usize, std::ops::Range<usize>)>,
    /// `1/2 |B_i|^2` summed over rows of `A` without entries.
    inactive_value: f64,
    lipschitz: f64,
}

impl SpectrahedronLSQ {
    pub fn new(a: SparseMatrix, b: DMatrix<f64>, meta: InstanceMeta) -> Result<Self> {
        let (m, n) = a.shape();
        if b.shape() != (m, n) {
            return Err(Error::ShapeMismatch {
                left: (m, n),
                right: b.shape(),
            });
        }
        if (meta.m, meta.n) != (m, n) {
            return Err(Error::InvalidParameter(format!(
                "metadata says {}x{}, matrices are {m}x{n}",
                meta.m, meta.n
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut active = Vec::new();
        let mut start = 0;
        for row in a.entries.chunk_by(|x, y| x.0 == y.0) {
            active.push((row[0].0, start..start + row.len()));
            start += row.len();
        }
        let mut bt_active = DMatrix::zeros(n, active.len());
        let mut is_active = vec![false; m];
        for (c, (i, _)) in active.iter().enumerate() {
            is_active[*i] = true;
            bt_active.set_column(c, &b.row(*i).transpose());
        }
        let inactive_value = 0.5
            * (0..m)
                .filter(|&i| !is_active[i])
                .map(|i| b.row(i).norm_squared())
                .sum::<f64>();
        let lipschitz = a.gram_frobenius_norm();
        Ok(Self {
            meta,
            a,
            b,
            bt_active,
            active,
            inactive_value,
            lipschitz,
        })
    }

    pub fn meta(&self) -> &InstanceMeta {
        &self.meta
    }

    pub fn n(&self) -> usize {
        self.meta.n
    }

    pub fn a(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// `|A^T A|_F`
    pub fn lipschitz_constant(&self) -> f64 {
        self.lipschitz
    }

    /// Planted matrix `B = A Xbar` was built from; recomputed from the seed.
    pub fn planted_solution(&self) -> SymMatrix {
        planted_solution(self.meta.n, self.meta.omega, self.meta.seed)
    }

    /// Transposed residual `(A X - B)^T` restricted to active rows.
    fn residual_t(&self, x: &SymMatrix) -> DMatrix<f64> {
        let x = x.as_matrix();
        let mut rt = -self.bt_active.clone();
        for (c, (_, range)) in self.active.iter().enumerate() {
            let mut col = rt.column_mut(c);
            for &(_, j, a) in &self.a.entries[range.clone()] {
                // row j of X equals column j since X is symmetric
                col.axpy(a, &x.column(j), 1.0);
            }
        }
        rt
    }

    fn check(&self, x: &SymMatrix) {
        assert_eq!(x.dim(), self.meta.n, "point of dimension {} for an instance of size {}", x.dim(), self.meta.n);
    }
}

impl Objective<SymMatrix> for SpectrahedronLSQ {
    fn value(&self, x: &SymMatrix) -> f64 {
        self.check(x);
        0.5 * self.residual_t(x).norm_squared() + self.inactive_value
    }

    fn gradient(&self, x: &SymMatrix) -> SymMatrix {
        self.value_and_gradient(x).1
    }

    /// Gradient `A^T (A X - B)`, symmetrized.
    fn value_and_gradient(&self, x: &SymMatrix) -> (f64, SymMatrix) {
        self.check(x);
        let rt = self.residual_t(x);
        let n = self.meta.n;
        // column j of (A^T R)^T accumulates a * R_i^T
        let mut g = DMatrix::zeros(n, n);
        for (c, (_, range)) in self.active.iter().enumerate() {
            for &(_, j, a) in &self.a.entries[range.clone()] {
                g.column_mut(j).axpy(a, &rt.column(c), 1.0);
            }
        }
        let sym = (&g + g.transpose()) * 0.5;
        (
            0.5 * rt.norm_squared() + self.inactive_value,
            SymMatrix::from_symmetric_unchecked(sym),
        )
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

/// `Xbar = sum_i g_i g_i^T` where each `g_i` has `(cos t, sin t)` at two
/// distinct random positions.
pub fn planted_solution(n: usize, omega: usize, seed: u64) -> SymMatrix {
    let mut positions = stream(seed, STREAM_POSITIONS);
    let mut angles = stream(seed, STREAM_ANGLES);
    let theta = Uniform::new(0.0, 2.0 * PI);
    let mut xbar = SymMatrix::zeros(n);
    for _ in 0..omega {
        let idx = index::sample(&mut positions, n, 2);
        let t = theta.sample(&mut angles);
        let mut g = DVector::zeros(n);
        g[idx.index(0)] = t.cos();
        g[idx.index(1)] = t.sin();
        xbar.add_rank_one(1.0, &g);
    }
    xbar
}

/// Random instance: `A` with `round(density n m)` uniform(-1, 1) entries at
/// distinct random positions, `B = A Xbar`.
pub fn generate_instance(
    n: usize,
    m: usize,
    omega: usize,
    density: f64,
    seed: u64,
) -> Result<SpectrahedronLSQ> {
    if n < 2 || m < n {
        return Err(Error::InvalidParameter(format!("need m >= n >= 2, got n = {n}, m = {m}")));
    }
    if omega < 2 {
        return Err(Error::InvalidParameter(format!("need omega > 1, got {omega}")));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParameter(format!("density {density} outside (0, 1]")));
    }
    let cells = n * m;
    let nnz = (density * cells as f64).round() as usize;
    if nnz == 0 {
        return Err(Error::InvalidParameter(format!(
            "density {density} leaves A without entries at {m}x{n}; use at least {}",
            default_density(n, m)
        )));
    }
    let mut rng = stream(seed, STREAM_A);
    let mut cells_chosen = index::sample(&mut rng, cells, nnz).into_vec();
    cells_chosen.sort_unstable();
    let value = Uniform::new(-1.0, 1.0);
    let entries = cells_chosen
        .into_iter()
        .map(|c| (c / n, c % n, value.sample(&mut rng)))
        .collect();
    let a = SparseMatrix::new(m, n, entries)?;
    let xbar = planted_solution(n, omega, seed);
    let b = a.mul_dense(xbar.as_matrix())?;
    SpectrahedronLSQ::new(
        a,
        b,
        InstanceMeta {
            n,
            m,
            omega,
            density,
            seed,
        },
    )
}

/// `X0(beta) = (1 - beta) I / n + beta e1 e1^T`
pub fn starting_point(beta: f64, n: usize) -> Result<SymMatrix> {
    if !(0.0..=1.0).contains(&beta) || n == 0 {
        return Err(Error::InvalidParameter(format!("beta = {beta}, n = {n}")));
    }
    let mut diag = vec![(1.0 - beta) / n as f64; n];
    diag[0] += beta;
    Ok(SymMatrix::from_diagonal(&diag))
}
