//! Smallest eigenpairs of symmetric pencils `A x = λ M x` with `M` positive definite.
//!
//! Small problems are reduced to a dense standard problem through the
//! Cholesky factor of `M`. Larger ones use a shift-and-invert block Krylov
//! method: with `K = A + σM` factored once, the space
//! `span{X, TX, …, T^{m-1}X}`, `T = K⁻¹M`, is `M`-orthonormalized and
//! Rayleigh–Ritz on `(A, M)` gives the next block `X`. Starting blocks come
//! from a seeded ChaCha stream, so results are reproducible.

use faer::linalg::solvers::Solve;
use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::sparse::linalg::solvers::Llt;
use faer::{Mat, Par, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::sparse::SparseOp;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix dimensions disagree: A is {a:?}, M is {m:?}")]
    Dimension { a: (usize, usize), m: (usize, usize) },
    #[error("requested {k} eigenpairs of a problem of size {n}")]
    TooMany { k: usize, n: usize },
    #[error("Cholesky factorization failed ({0}); the shifted matrix is not positive definite")]
    Factorization(String),
    #[error("no convergence after {iterations} iterations; worst relative residual {worst_residual:.3e}, current values {values:?}")]
    NotConverged { iterations: usize, worst_residual: f64, values: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct EigenOptions {
    pub k: usize,
    /// Residual target `‖Ax - θMx‖ ≤ tol·(‖Ax‖ + |θ|‖Mx‖) + 100ε‖A‖∞‖x‖`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Shift `σ` in `K = A + σM`; `None` picks `1e-6·max(A_ii/M_ii)`.
    pub shift: Option<f64>,
    /// Problems with at most this many unknowns use the dense path.
    pub dense_threshold: usize,
    /// Extra block columns beyond `k`.
    pub guard: usize,
    /// Krylov blocks per restart.
    pub krylov_blocks: usize,
    /// Also accept once every wanted Ritz value moves by at most this
    /// relative amount between restarts. Meant for spectra with a dense
    /// cluster at the bottom, where eigenvalues settle long before the
    /// individual eigenvectors do.
    pub value_tol: Option<f64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            k: 6,
            tol: 1e-8,
            max_iter: 60,
            seed: 1,
            shift: None,
            dense_threshold: 800,
            guard: 4,
            krylov_blocks: 5,
            value_tol: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Dense,
    ShiftInvertKrylov,
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Ascending.
    pub values: Vec<f64>,
    /// `M`-orthonormal eigenvectors, one per value.
    pub vectors: Vec<Vec<f64>>,
    /// Residuals on the scale of [`EigenOptions::tol`].
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub method: Method,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Absolute residual allowance for eigenvalues at roundoff level, where `‖Ax‖`
/// itself is noise and no relative target can be met.
fn residual_floor(a_norm: f64, x_norm: f64) -> f64 {
    1e2 * f64::EPSILON * a_norm * x_norm
}

/// Residual measured against `tol`: at most `tol` means `‖r‖ ≤ tol·scale + floor`.
fn scaled_residual(r: f64, scale: f64, floor: f64, tol: f64) -> f64 {
    tol * r / (tol * scale + floor)
}

fn inf_norm(a: &SparseOp) -> f64 {
    (0..a.nrows()).map(|r| a.row(r).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn smallest_eigs(a: &SparseOp, m: &SparseOp, opts: &EigenOptions) -> Result<EigenResult, EigenError> {
    let n = a.nrows();
    if a.shape() != (n, n) || m.shape() != (n, n) {
        return Err(EigenError::Dimension { a: a.shape(), m: m.shape() });
    }
    if opts.k == 0 || opts.k > n {
        return Err(EigenError::TooMany { k: opts.k, n });
    }
    if n <= opts.dense_threshold {
        dense(a, m, opts)
    } else {
        krylov(a, m, opts)
    }
}

/// Relative residuals of candidate pairs.
fn residuals(a: &SparseOp, m: &SparseOp, values: &[f64], vectors: &[Vec<f64>], tol: f64) -> Vec<f64> {
    let a_norm = inf_norm(a);
    values
        .iter()
        .zip(vectors)
        .map(|(&theta, x)| {
            let ax = a.matvec(x);
            let mx = m.matvec(x);
            let mut r = ax.clone();
            axpy(&mut r, -theta, &mx);
            scaled_residual(norm(&r), norm(&ax) + theta.abs() * norm(&mx), residual_floor(a_norm, norm(x)), tol)
        })
        .collect()
}

fn dense(a: &SparseOp, m: &SparseOp, opts: &EigenOptions) -> Result<EigenResult, EigenError> {
    let n = a.nrows();
    let md = m.to_dense();
    let llt = md.llt(Side::Lower).map_err(|e| EigenError::Factorization(format!("{e:?}")))?;
    let l = llt.L();
    // C = L⁻¹ A L⁻ᵀ
    let mut x = a.to_dense();
    solve_lower_triangular_in_place(l, x.as_mut(), Par::Seq);
    let mut c = x.transpose().to_owned();
    solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    let c = Mat::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let evd = c.self_adjoint_eigen(Side::Lower).map_err(|e| EigenError::Factorization(format!("{e:?}")))?;
    let mut u = evd.U().subcols(0, opts.k).to_owned();
    solve_upper_triangular_in_place(l.transpose(), u.as_mut(), Par::Seq);
    let values: Vec<f64> = (0..opts.k).map(|i| evd.S().column_vector()[i]).collect();
    let vectors: Vec<Vec<f64>> = (0..opts.k).map(|j| (0..n).map(|i| u[(i, j)]).collect()).collect();
    let residuals = residuals(a, m, &values, &vectors, opts.tol);
    Ok(EigenResult { values, vectors, residuals, iterations: 1, method: Method::Dense })
}

/// `M`-orthonormal basis with cached `M v`.
struct Basis<'a> {
    m: &'a SparseOp,
    v: Vec<Vec<f64>>,
    mv: Vec<Vec<f64>>,
}

impl<'a> Basis<'a> {
    fn new(m: &'a SparseOp) -> Self {
        Basis { m, v: Vec::new(), mv: Vec::new() }
    }

    /// Orthogonalizes `w` against the basis (two passes) and appends it unless
    /// it is numerically dependent.
    fn push(&mut self, mut w: Vec<f64>) -> bool {
        let start = dot(&w, &self.m.matvec(&w)).sqrt();
        if start == 0.0 || !start.is_finite() {
            return false;
        }
        for _ in 0..2 {
            for (v, mv) in self.v.iter().zip(&self.mv) {
                let c = dot(mv, &w);
                axpy(&mut w, -c, v);
            }
        }
        let mw = self.m.matvec(&w);
        let len = dot(&w, &mw).sqrt();
        if !(len > 1e-10 * start) {
            return false;
        }
        w.iter_mut().for_each(|x| *x /= len);
        self.mv.push(mw.into_iter().map(|x| x / len).collect());
        self.v.push(w);
        true
    }

    fn len(&self) -> usize {
        self.v.len()
    }
}

fn factor(a: &SparseOp, m: &SparseOp, sigma: f64) -> Result<Llt<usize, f64>, String> {
    let k_mat = a.add(&m.scale(sigma)).expect("same shape").to_faer();
    k_mat.sp_cholesky(Side::Lower).map_err(|e| format!("{e:?}"))
}

/// Moves the shift up to just below the smallest Ritz value when that
/// separates the wanted values much better than the current shift.
///
/// `A + σM` factors exactly when `σ > -λ_min`, so a successful Cholesky
/// certifies the new shift; on failure the offset from the Ritz value is
/// widened and the old factorization is kept if nothing works.
fn closer_shift(a: &SparseOp, m: &SparseOp, sigma: f64, ritz: &[f64]) -> Option<(f64, Llt<usize, f64>)> {
    let (lo, hi) = (ritz[0], ritz[ritz.len() - 1]);
    if !(lo > 0.0 && hi > lo) {
        return None;
    }
    let mut delta = 0.1 * (hi - lo);
    while lo - delta > -sigma {
        // only worth a refactorization if the distance to λ_min shrinks a lot
        if lo + sigma <= 4.0 * delta {
            return None;
        }
        if let Ok(f) = factor(a, m, delta - lo) {
            return Some((delta - lo, f));
        }
        delta *= 4.0;
    }
    None
}

fn krylov(a: &SparseOp, m: &SparseOp, opts: &EigenOptions) -> Result<EigenResult, EigenError> {
    let n = a.nrows();
    let b = (opts.k + opts.guard).min(n);
    let sigma = opts.shift.unwrap_or_else(|| {
        let (da, dm) = (a.diagonal(), m.diagonal());
        1e-6 * da.iter().zip(&dm).map(|(x, y)| x / y).fold(0.0, f64::max).max(f64::MIN_POSITIVE)
    });
    let mut sigma = sigma;
    let mut llt = factor(a, m, sigma).map_err(EigenError::Factorization)?;
    let a_norm = inf_norm(a);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut block: Vec<Vec<f64>> = (0..b).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut worst = f64::INFINITY;
    let mut last_values = Vec::new();

    for iter in 1..=opts.max_iter {
        let mut basis = Basis::new(m);
        let mut frontier = Vec::new();
        for x in block.drain(..) {
            if basis.push(x) {
                frontier.push(basis.len() - 1);
            }
        }
        for _ in 1..opts.krylov_blocks {
            if frontier.is_empty() {
                break;
            }
            let mut rhs = Mat::from_fn(n, frontier.len(), |i, j| basis.mv[frontier[j]][i]);
            llt.solve_in_place(rhs.as_mut());
            frontier.clear();
            for j in 0..rhs.ncols() {
                if basis.push((0..n).map(|i| rhs[(i, j)]).collect()) {
                    frontier.push(basis.len() - 1);
                }
            }
        }
        let dim = basis.len();
        if dim < opts.k {
            // the starting block was degenerate; reseed
            block = (0..b).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            continue;
        }

        let av: Vec<Vec<f64>> = basis.v.iter().map(|v| a.matvec(v)).collect();
        let h = Mat::from_fn(dim, dim, |i, j| 0.5 * (dot(&basis.v[i], &av[j]) + dot(&basis.v[j], &av[i])));
        let evd = h.self_adjoint_eigen(Side::Lower).map_err(|e| EigenError::Factorization(format!("{e:?}")))?;
        let keep = b.min(dim);
        let combine = |src: &[Vec<f64>], j: usize| {
            let mut out = vec![0.0; n];
            for (i, s) in src.iter().enumerate() {
                axpy(&mut out, evd.U()[(i, j)], s);
            }
            out
        };
        let values: Vec<f64> = (0..keep).map(|j| evd.S().column_vector()[j]).collect();
        let ritz: Vec<Vec<f64>> = (0..keep).map(|j| combine(&basis.v, j)).collect();

        let mut rel = Vec::with_capacity(opts.k);
        for j in 0..opts.k {
            let ax = combine(&av, j);
            let mx = combine(&basis.mv, j);
            let mut r = ax.clone();
            axpy(&mut r, -values[j], &mx);
            let scale = norm(&ax) + values[j].abs() * norm(&mx);
            let floor = residual_floor(a_norm, norm(&ritz[j]));
            rel.push(scaled_residual(norm(&r), scale, floor, opts.tol));
        }
        worst = rel.iter().copied().fold(0.0, f64::max);
        let stationary = opts.value_tol.is_some_and(|vt| {
            let scale = values[..opts.k].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            last_values.len() == opts.k
                && values.iter().zip(&last_values).all(|(v, p): (&f64, &f64)| (v - p).abs() <= vt * v.abs().max(1e-8 * scale))
        });
        last_values = values[..opts.k].to_vec();
        if worst <= opts.tol || stationary {
            return Ok(EigenResult {
                values: last_values,
                vectors: ritz.into_iter().take(opts.k).collect(),
                residuals: rel,
                iterations: iter,
                method: Method::ShiftInvertKrylov,
            });
        }
        if opts.shift.is_none() && iter >= 2 {
            if let Some((s, f)) = closer_shift(a, m, sigma, &values) {
                sigma = s;
                llt = f;
            }
        }
        block = ritz;
        // refill a block shortened by dependent directions
        while block.len() < b {
            block.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
        }
    }
    Err(EigenError::NotConverged { iterations: opts.max_iter, worst_residual: worst, values: last_values })
}

/// Second-difference Dirichlet Laplacian on `(0, 1)` with `n` interior
/// points, as the pencil `(stiffness, lumped mass)`.
pub fn dirichlet_laplacian_1d(n: usize) -> (SparseOp, SparseOp) {
    let h = 1.0 / (n as f64 + 1.0);
    let mut trips = Vec::with_capacity(3 * n);
    for i in 0..n {
        trips.push((i, i, 2.0 / h));
        if i > 0 {
            trips.push((i, i - 1, -1.0 / h));
        }
        if i + 1 < n {
            trips.push((i, i + 1, -1.0 / h));
        }
    }
    (SparseOp::from_triplets(n, n, &trips).expect("in bounds"), SparseOp::diag(&vec![h; n]))
}
