//! Quadratic forms of the trace-free Korn inequalities and their spectra.
//!
//! For a pair of defect operators `(D₁, D₂)` the form is
//! `⟨A P, P⟩ = ‖D₁P‖²_M + ‖D₂P‖²_M` and the best constant in
//! `‖P‖² ≤ c²(‖D₁P‖² + ‖D₂P‖²)` on the complement of the kernel is
//! `1/√λ_min` for the pencil `(A, M)`. The tangential condition is imposed by
//! restricting both forms to the unmasked degrees of freedom.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::eigen::{smallest_eigs, EigenError, EigenOptions, EigenResult};
use crate::grid::{Face, GammaSpec, Grid, Pointwise};
use crate::poly_fields::KernelFamily;
use crate::scalar::Rational;
use crate::sparse::{SparseError, SparseOp};
use crate::tensor::Mat3;

/// Eigenvalues below `KERNEL_REL_TOL·λ_ref` count as kernel.
pub const KERNEL_REL_TOL: f64 = 1e-8;
/// Minimal `λ_{kc+1}/λ_{kc}` for a kernel count to be trusted.
pub const GAP_THRESHOLD: f64 = 1e3;
/// Eigenvalues computed beyond the expected kernel.
pub const WINDOW_EXTRA: usize = 6;
/// Regularization of the norm-equivalence pencil, relative to the mass.
pub const NORM_EQUIVALENCE_SIGMA: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum KornError {
    #[error("{0} needs a tangential boundary condition on a non-empty Γ")]
    NeedsBoundary(Variant),
    #[error("kernel dimensions are defined without boundary conditions")]
    NeedsNoBoundary,
    #[error("no active degrees of freedom remain after masking")]
    EmptyActiveSpace,
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `‖dev sym P‖ + ‖Curl P‖`.
    DsC,
    /// `‖sym P‖ + ‖dev Curl P‖`.
    SDc,
    /// `‖dev sym P‖ + ‖dev Curl P‖`.
    DsDc,
    /// `‖sym P‖ + ‖Curl P‖`.
    SC,
    /// `‖Curl P‖ ≤ c‖dev Curl P‖`.
    DevCurlVsCurl,
}

impl Variant {
    pub const PAIRS: [Variant; 4] = [Variant::DsC, Variant::SDc, Variant::DsDc, Variant::SC];

    pub fn tag(self) -> &'static str {
        match self {
            Variant::DsC => "dS_C",
            Variant::SDc => "S_dC",
            Variant::DsDc => "dS_dC",
            Variant::SC => "S_C",
            Variant::DevCurlVsCurl => "devCurl_vs_Curl",
        }
    }

    pub fn kernel_family(self) -> Option<KernelFamily> {
        match self {
            Variant::DsC => Some(KernelFamily::DevSymCurl),
            Variant::SDc => Some(KernelFamily::SymDevCurl),
            Variant::DsDc => Some(KernelFamily::DevSymDevCurl),
            Variant::SC => Some(KernelFamily::SymCurl),
            Variant::DevCurlVsCurl => None,
        }
    }

    fn operators(self) -> (Pointwise, bool) {
        match self {
            Variant::DsC => (Pointwise::DevSym, false),
            Variant::SDc => (Pointwise::Sym, true),
            Variant::DsDc => (Pointwise::DevSym, true),
            Variant::SC | Variant::DevCurlVsCurl => (Pointwise::Sym, false),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [Variant::DsC, Variant::SDc, Variant::DsDc, Variant::SC, Variant::DevCurlVsCurl]
            .into_iter()
            .find(|v| v.tag() == s.trim())
            .ok_or_else(|| format!("unknown variant '{s}' (expected dS_C, S_dC, dS_dC, S_C, devCurl_vs_Curl)"))
    }
}

/// Boundary condition selection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bc {
    None,
    Full,
    Partial(Vec<Face>),
}

impl Bc {
    pub fn gamma(&self) -> GammaSpec {
        match self {
            Bc::None => GammaSpec::None,
            Bc::Full => GammaSpec::All,
            Bc::Partial(f) => GammaSpec::Faces(f.clone()),
        }
    }
}

impl fmt::Display for Bc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bc::None => f.write_str("none"),
            Bc::Full => f.write_str("full"),
            Bc::Partial(faces) => {
                let names: Vec<String> = faces.iter().map(Face::to_string).collect();
                write!(f, "gamma:{}", names.join("+"))
            }
        }
    }
}

/// Forms on the active degrees of freedom.
#[derive(Clone, Debug)]
pub struct Forms {
    pub a: SparseOp,
    pub m: SparseOp,
    /// Flat field indices of the active degrees of freedom.
    pub active: Vec<usize>,
}

fn curl_like(grid: &Grid, dev: bool) -> Result<SparseOp, KornError> {
    let curl = grid.curl_op();
    Ok(if dev { grid.pointwise_op(Pointwise::Dev).compose(&curl)? } else { curl })
}

/// `‖D₁P‖²_M + ‖D₂P‖²_M` and `‖P‖²_M` restricted to the active dofs.
///
/// For [`Variant::DevCurlVsCurl`] the pair is `(‖dev Curl P‖², ‖Curl P‖²)`;
/// the second form is only semidefinite.
pub fn assemble_forms(variant: Variant, grid: &Grid) -> Result<Forms, KornError> {
    if variant == Variant::DevCurlVsCurl && !grid.has_gamma() {
        return Err(KornError::NeedsBoundary(variant));
    }
    let w9: Vec<f64> = grid.node_weights().iter().flat_map(|&w| [w; 9]).collect();
    let (a, m) = if variant == Variant::DevCurlVsCurl {
        (curl_like(grid, true)?.weighted_gram(&w9)?, curl_like(grid, false)?.weighted_gram(&w9)?)
    } else {
        let (pointwise, dev_curl) = variant.operators();
        let d1 = grid.pointwise_op(pointwise).weighted_gram(&w9)?;
        let d2 = curl_like(grid, dev_curl)?.weighted_gram(&w9)?;
        (d1.add(&d2)?, SparseOp::diag(&w9))
    };
    let active = grid.active_dofs();
    if active.is_empty() {
        return Err(KornError::EmptyActiveSpace);
    }
    if active.len() == a.nrows() {
        return Ok(Forms { a, m, active });
    }
    Ok(Forms { a: a.principal_submatrix(&active), m: m.principal_submatrix(&active), active })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelStatus {
    Determinate,
    /// The spectral gap is below [`GAP_THRESHOLD`].
    Indeterminate,
}

#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub variant: Variant,
    pub domain: String,
    pub h: Rational,
    pub bc: Bc,
    pub dofs: usize,
    pub eigenvalues: Vec<f64>,
    pub kernel_count: usize,
    pub gap_ratio: f64,
    pub status: KernelStatus,
    /// Smallest eigenvalue above the kernel.
    pub lambda_min: f64,
    pub c_estimate: f64,
    pub iterations: usize,
    pub max_residual: f64,
    pub seed: u64,
    /// Largest relative `M`-distance of a kernel eigenvector from the sampled analytic kernel.
    pub projection_residual: Option<f64>,
    /// Dimension of the common nullspace removed from the norm-equivalence pencil, when computed.
    pub deflation_dim: Option<usize>,
}

impl SpectrumReport {
    pub const CSV_HEADER: &'static str = "variant,domain,h,bc,lambda_min,c_estimate,kernel_count,gap_ratio,iters,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.10e},{:.10e},{},{:.6e},{},{}",
            self.variant,
            self.domain,
            self.h,
            self.bc,
            self.lambda_min,
            self.c_estimate,
            self.kernel_count,
            self.gap_ratio,
            self.iterations,
            self.seed
        )
    }

    pub fn h_f64(&self) -> f64 {
        crate::scalar::Field::to_f64(&self.h)
    }
}

/// Kernel count, gap ratio and first eigenvalue above the kernel of an ascending window.
///
/// The reference scale is the largest eigenvalue of the window: a median is
/// itself roundoff-sized once the kernel fills half the window.
pub fn classify_window(values: &[f64]) -> (usize, f64, KernelStatus) {
    let reference = values.iter().copied().fold(0.0, f64::max);
    let tol = KERNEL_REL_TOL * reference;
    let kc = values.iter().take_while(|&&v| v < tol).count();
    let gap = if kc == 0 {
        f64::INFINITY
    } else if kc == values.len() {
        1.0
    } else {
        let top = values[..kc].iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(f64::MIN_POSITIVE);
        values[kc] / top
    };
    let status = if gap >= GAP_THRESHOLD { KernelStatus::Determinate } else { KernelStatus::Indeterminate };
    (kc, gap, status)
}

/// Relative Ritz-value stationarity accepted by the constant estimates: under
/// full boundary conditions the bottom of the spectrum is a dense cluster
/// (divergence-free compatible fields all sit near ½).
pub const VALUE_STATIONARITY_TOL: f64 = 1e-10;

fn eigen_options(k: usize, seed: u64) -> EigenOptions {
    EigenOptions { k, seed, ..EigenOptions::default() }
}

fn report_from(
    variant: Variant,
    grid: &Grid,
    bc: &Bc,
    forms: &Forms,
    eig: &EigenResult,
    seed: u64,
) -> SpectrumReport {
    let (kc, gap, status) = classify_window(&eig.values);
    let lambda_min = eig.values.get(kc).copied().unwrap_or(f64::NAN);
    SpectrumReport {
        variant,
        domain: grid.describe(),
        h: grid.h().clone(),
        bc: bc.clone(),
        dofs: forms.active.len(),
        eigenvalues: eig.values.clone(),
        kernel_count: kc,
        gap_ratio: gap,
        status,
        lambda_min,
        c_estimate: 1.0 / lambda_min.sqrt(),
        iterations: eig.iterations,
        max_residual: eig.residuals.iter().copied().fold(0.0, f64::max),
        seed,
        projection_residual: None,
        deflation_dim: None,
    }
}

fn bc_of(grid: &Grid, requested: &Bc) -> Bc {
    if grid.has_gamma() {
        requested.clone()
    } else {
        Bc::None
    }
}

/// Spectrum of a pair variant without boundary conditions; the kernel count
/// should equal the dimension of the analytic kernel family.
pub fn kernel_dimension(variant: Variant, grid: &Grid, seed: u64) -> Result<SpectrumReport, KornError> {
    let family = variant.kernel_family().ok_or(KornError::NeedsBoundary(variant))?;
    if grid.has_gamma() {
        return Err(KornError::NeedsNoBoundary);
    }
    let forms = assemble_forms(variant, grid)?;
    let eig = smallest_eigs(&forms.a, &forms.m, &eigen_options(family.dimension() + WINDOW_EXTRA, seed))?;
    let mut report = report_from(variant, grid, &Bc::None, &forms, &eig, seed);
    let basis: Vec<Vec<f64>> = family.basis().iter().map(|t| grid.sample(t).values).collect();
    report.projection_residual =
        Some(projection_residual(&basis, &eig.vectors[..report.kernel_count.min(eig.vectors.len())], &forms.m));
    Ok(report)
}

/// Largest `‖x - Πx‖_M / ‖x‖_M` over `vectors`, `Π` the `M`-orthogonal projector onto `span(basis)`.
pub fn projection_residual(basis: &[Vec<f64>], vectors: &[Vec<f64>], m: &SparseOp) -> f64 {
    let d = basis.len();
    let mb: Vec<Vec<f64>> = basis.iter().map(|b| m.matvec(b)).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gram = Mat::from_fn(d, d, |i, j| dot(&basis[i], &mb[j]));
    let Ok(llt) = gram.llt(Side::Lower) else { return f64::INFINITY };
    let mut worst = 0.0f64;
    for x in vectors {
        let rhs = Mat::from_fn(d, 1, |i, _| dot(&mb[i], x));
        let coef = faer::linalg::solvers::Solve::solve(&llt, &rhs);
        let mut r = x.clone();
        for (i, b) in basis.iter().enumerate() {
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= coef[(i, 0)] * bi;
            }
        }
        let nx = dot(x, &m.matvec(x)).sqrt();
        let nr = dot(&r, &m.matvec(&r)).sqrt();
        worst = worst.max(nr / nx);
    }
    worst
}

/// Smallest eigenvalues of a pair variant under the tangential condition.
/// A nonzero kernel count signals a discretization failure.
pub fn estimate_constant(variant: Variant, grid: &Grid, bc: &Bc, seed: u64) -> Result<SpectrumReport, KornError> {
    if variant == Variant::DevCurlVsCurl {
        return norm_equivalence_constant(grid, bc, seed);
    }
    if !grid.has_gamma() {
        return Err(KornError::NeedsBoundary(variant));
    }
    let forms = assemble_forms(variant, grid)?;
    let opts = EigenOptions { value_tol: Some(VALUE_STATIONARITY_TOL), ..eigen_options(WINDOW_EXTRA, seed) };
    let eig = smallest_eigs(&forms.a, &forms.m, &opts)?;
    Ok(report_from(variant, grid, &bc_of(grid, bc), &forms, &eig, seed))
}

/// Active dofs above which the exact nullity of `Curl` is not computed.
pub const DEFLATION_RANK_LIMIT: usize = 2000;

/// `λ_min` of `‖dev Curl P‖² / ‖Curl P‖²` over masked fields with `Curl P ≠ 0`,
/// reported with `c = 1/√λ_min`, so that `‖Curl P‖ ≤ c ‖dev Curl P‖`.
///
/// The pencil `(A_dev + σM, A_curl + σM)` is definite; curl-free fields have
/// Rayleigh quotient exactly 1 there and so never reach the bottom of the
/// spectrum, which deflates the shared nullspace implicitly. The nullspace
/// dimension is computed exactly (rank modulo a prime) on small grids.
pub fn norm_equivalence_constant(grid: &Grid, bc: &Bc, seed: u64) -> Result<SpectrumReport, KornError> {
    let forms = assemble_forms(Variant::DevCurlVsCurl, grid)?;
    let w = grid.node_weights();
    let mass: Vec<f64> = forms.active.iter().map(|&k| w[k / 9]).collect();
    let sm = SparseOp::diag(&mass).scale(NORM_EQUIVALENCE_SIGMA);
    let a = forms.a.add(&sm)?;
    let b = forms.m.add(&sm)?;
    let opts = EigenOptions { value_tol: Some(VALUE_STATIONARITY_TOL), ..eigen_options(WINDOW_EXTRA, seed) };
    let eig = smallest_eigs(&a, &b, &opts)?;
    let mut report = report_from(Variant::DevCurlVsCurl, grid, &bc_of(grid, bc), &forms, &eig, seed);
    // the unregularized quotient of the minimizer is an equally valid upper bound
    let x = &eig.vectors[0];
    let quotient = quadratic(&forms.a, x) / quadratic(&forms.m, x);
    if quotient.is_finite() && quotient < report.lambda_min {
        report.lambda_min = quotient;
        report.c_estimate = 1.0 / quotient.sqrt();
    }
    if forms.active.len() <= DEFLATION_RANK_LIMIT {
        report.deflation_dim = Some(forms.active.len() - curl_rank_mod_p(grid, &forms.active));
    }
    Ok(report)
}

fn quadratic(a: &SparseOp, x: &[f64]) -> f64 {
    a.matvec(x).iter().zip(x).map(|(u, v)| u * v).sum()
}

/// Rank of `2h·Curl` (integer entries) restricted to the active columns, modulo `2³¹ - 1`.
pub fn curl_rank_mod_p(grid: &Grid, active: &[usize]) -> usize {
    const P: u64 = 2_147_483_647;
    let curl = grid.curl_op().select_columns(active);
    let scale = 2.0 * grid.h_f64();
    let cols = active.len();
    let mut rows: Vec<Vec<u64>> = (0..curl.nrows())
        .map(|r| {
            let mut row = vec![0u64; cols];
            for (c, v) in curl.row(r) {
                let q = (v * scale).round() as i64;
                row[c] = q.rem_euclid(P as i64) as u64;
            }
            row
        })
        .filter(|row| row.iter().any(|&v| v != 0))
        .collect();
    let inv = |a: u64| {
        let (mut base, mut e, mut acc) = (a, P - 2, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % P;
            }
            base = base * base % P;
            e >>= 1;
        }
        acc
    };
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, piv);
        let pinv = inv(rows[rank][col]);
        let pivot: Vec<u64> = rows[rank].iter().map(|&v| v * pinv % P).collect();
        for row in rows.iter_mut().skip(rank + 1) {
            let f = row[col];
            if f != 0 {
                for c in col..cols {
                    row[c] = (row[c] + P - f * pivot[c] % P) % P;
                }
            }
        }
        rows[rank] = pivot;
        rank += 1;
    }
    rank
}

/// Random smooth vector field vanishing at every boundary node: a damped sine
/// series on the bounding box, with boundary nodes set to zero.
pub fn random_zero_bc_vector_field(grid: &Grid, rng: &mut impl Rng) -> Vec<f64> {
    let (lo, hi) = bounding_box(grid);
    let mut coeff = [[[[0.0; 3]; 3]; 3]; 3];
    for c in coeff.iter_mut().flatten().flatten() {
        for ci in c.iter_mut() {
            *ci = rng.random_range(-1.0..1.0);
        }
    }
    let mut u = vec![0.0; 3 * grid.num_nodes()];
    for n in 0..grid.num_nodes() {
        if grid.is_boundary(n) {
            continue;
        }
        let x = grid.position_f64(n);
        let t: [f64; 3] = std::array::from_fn(|k| (x[k] - lo[k]) / (hi[k] - lo[k]));
        for (a, ca) in coeff.iter().enumerate() {
            for (b, cb) in ca.iter().enumerate() {
                for (c, cc) in cb.iter().enumerate() {
                    let (fa, fb, fc) = ((a + 1) as f64, (b + 1) as f64, (c + 1) as f64);
                    let mode = (fa * PI * t[0]).sin() * (fb * PI * t[1]).sin() * (fc * PI * t[2]).sin()
                        / (fa * fa + fb * fb + fc * fc);
                    for i in 0..3 {
                        u[3 * n + i] += cc[i] * mode;
                    }
                }
            }
        }
    }
    u
}

fn bounding_box(grid: &Grid) -> ([f64; 3], [f64; 3]) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for n in 0..grid.num_nodes() {
        let x = grid.position_f64(n);
        for k in 0..3 {
            lo[k] = lo[k].min(x[k]);
            hi[k] = hi[k].max(x[k]);
        }
    }
    (lo, hi)
}

/// `e₁·(x(1-x) y(1-y) z(1-z))²` on the normalized bounding box.
pub fn bump_field(grid: &Grid) -> Vec<f64> {
    let (lo, hi) = bounding_box(grid);
    let mut u = vec![0.0; 3 * grid.num_nodes()];
    for n in 0..grid.num_nodes() {
        if grid.is_boundary(n) {
            continue;
        }
        let x = grid.position_f64(n);
        let b: f64 = (0..3)
            .map(|k| {
                let t = (x[k] - lo[k]) / (hi[k] - lo[k]);
                t * (1.0 - t)
            })
            .product();
        u[3 * n] = b * b;
    }
    u
}

#[derive(Clone, Debug)]
pub struct BabyKornReport {
    /// `‖D_h u‖²_M / ‖dev sym D_h u‖²_M` per field.
    pub ratios: Vec<f64>,
    /// Fields skipped because `dev sym D_h u` vanished.
    pub skipped: usize,
}

impl BabyKornReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Ratio `‖D_h u‖² / ‖dev sym D_h u‖²` for the given nodal vector fields.
pub fn baby_korn_ratios(grid: &Grid, fields: &[Vec<f64>]) -> BabyKornReport {
    let grad = grid.gradient_op();
    let w9: Vec<f64> = grid.node_weights().iter().flat_map(|&w| [w; 9]).collect();
    let devsym = grid.pointwise_op(Pointwise::DevSym);
    let mut ratios = Vec::new();
    let mut skipped = 0;
    for u in fields {
        let du = grad.matvec(u);
        let ds = devsym.matvec(&du);
        let num: f64 = du.iter().zip(&w9).map(|(v, w)| w * v * v).sum();
        let den: f64 = ds.iter().zip(&w9).map(|(v, w)| w * v * v).sum();
        if den <= 1e-300 || num == 0.0 {
            skipped += 1;
            continue;
        }
        ratios.push(num / den);
    }
    BabyKornReport { ratios, skipped }
}

/// `count` random zero-boundary fields, the first one being [`bump_field`].
pub fn baby_korn_check(grid: &Grid, count: usize, seed: u64) -> BabyKornReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fields = Vec::with_capacity(count);
    if count > 0 {
        fields.push(bump_field(grid));
    }
    while fields.len() < count {
        fields.push(random_zero_bc_vector_field(grid, &mut rng));
    }
    baby_korn_ratios(grid, &fields)
}

/// Random masked matrix field (zero outside the active dofs).
pub fn random_masked_field(grid: &Grid, rng: &mut impl Rng) -> Vec<f64> {
    let mut p = vec![0.0; 9 * grid.num_nodes()];
    for k in grid.active_dofs() {
        p[k] = rng.random_range(-1.0..1.0);
    }
    p
}

/// Values of the three trace-free forms on one field: `(dS_dC, dS_C, S_dC)`.
pub fn form_values(grid: &Grid, p: &[f64]) -> (f64, f64, f64) {
    let w9: Vec<f64> = grid.node_weights().iter().flat_map(|&w| [w; 9]).collect();
    let norm2 = |v: &[f64]| v.iter().zip(&w9).map(|(x, w)| w * x * x).sum::<f64>();
    let curl = grid.curl_op().matvec(p);
    let dev_curl = grid.pointwise_op(Pointwise::Dev).matvec(&curl);
    let sym = grid.pointwise_op(Pointwise::Sym).matvec(p);
    let dev_sym = grid.pointwise_op(Pointwise::DevSym).matvec(p);
    let (c, dc, s, ds) = (norm2(&curl), norm2(&dev_curl), norm2(&sym), norm2(&dev_sym));
    (ds + dc, ds + c, s + dc)
}

/// The `dS_dC` form is pointwise dominated by `dS_C` and `S_dC`; checks it on random masked fields.
pub fn variant_ordering_holds(grid: &Grid, samples: usize, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).all(|_| {
        let p = random_masked_field(grid, &mut rng);
        let (dd, dc, sd) = form_values(grid, &p);
        let slack = 1e-12 * dc.max(sd);
        dd <= dc + slack && dd <= sd + slack
    })
}

/// Fields of the form `D_h u` with `u = 0` at boundary nodes.
///
/// Returns the worst `‖P‖_M / √(‖dev sym P‖² + ‖dev Curl P‖²)` and the
/// largest entry of `P` on masked dofs (zero: the tangential condition holds).
pub fn compatible_field_ratio(grid: &Grid, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grad = grid.gradient_op();
    let w9: Vec<f64> = grid.node_weights().iter().flat_map(|&w| [w; 9]).collect();
    let active = grid.active_dofs();
    let mut is_active = vec![false; 9 * grid.num_nodes()];
    active.iter().for_each(|&k| is_active[k] = true);
    let mut worst = 0.0f64;
    let mut leak = 0.0f64;
    for _ in 0..samples {
        let u = random_zero_bc_vector_field(grid, &mut rng);
        let p = grad.matvec(&u);
        leak = p.iter().zip(&is_active).filter(|(_, &a)| !a).fold(leak, |m, (v, _)| m.max(v.abs()));
        let (dd, _, _) = form_values(grid, &p);
        let np: f64 = p.iter().zip(&w9).map(|(x, w)| w * x * x).sum();
        worst = worst.max((np / dd).sqrt());
    }
    (worst, leak)
}

/// Fields `Anti(a)` with `a = 0` at boundary nodes.
///
/// Returns the worst `√2‖a‖_M / ‖dev D_h a‖_M` and the largest defect of the
/// discrete Nye identity `Curl_h Anti(a) = tr(D_h a) id - (D_h a)^T`.
pub fn anti_field_ratio(grid: &Grid, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grad = grid.gradient_op();
    let curl = grid.curl_op();
    let w = grid.node_weights();
    let mut worst = 0.0f64;
    let mut defect = 0.0f64;
    for _ in 0..samples {
        let a = random_zero_bc_vector_field(grid, &mut rng);
        let mut p = vec![0.0; 9 * grid.num_nodes()];
        for n in 0..grid.num_nodes() {
            let v = crate::tensor::Vec3([a[3 * n], a[3 * n + 1], a[3 * n + 2]]);
            let m = crate::tensor::anti_mat(&v);
            for i in 0..3 {
                for j in 0..3 {
                    p[9 * n + 3 * i + j] = m[(i, j)];
                }
            }
        }
        let cp = curl.matvec(&p);
        let da = grad.matvec(&a);
        let (mut na, mut nd) = (0.0, 0.0);
        for n in 0..grid.num_nodes() {
            let d = Mat3::from_fn(|i, j| da[9 * n + 3 * i + j]);
            let nye = Mat3::identity().scale(&d.trace()) - d.transpose();
            for i in 0..3 {
                for j in 0..3 {
                    defect = defect.max((cp[9 * n + 3 * i + j] - nye[(i, j)]).abs());
                }
            }
            na += w[n] * (a[3 * n].powi(2) + a[3 * n + 1].powi(2) + a[3 * n + 2].powi(2));
            nd += w[n] * crate::tensor::dev(&d).norm_sq();
        }
        worst = worst.max((2.0 * na / nd).sqrt());
    }
    (worst, defect)
}

/// `‖Curl_h P‖_M / ‖dev Curl_h P‖_M` on random masked fields.
pub fn curl_ratio_samples(grid: &Grid, samples: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let curl = grid.curl_op();
    let dev = grid.pointwise_op(Pointwise::Dev);
    let w9: Vec<f64> = grid.node_weights().iter().flat_map(|&w| [w; 9]).collect();
    let norm2 = |v: &[f64]| v.iter().zip(&w9).map(|(x, w)| w * x * x).sum::<f64>();
    (0..samples)
        .map(|_| {
            let p = random_masked_field(grid, &mut rng);
            let c = curl.matvec(&p);
            (norm2(&c) / norm2(&dev.matvec(&c))).sqrt()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Preset;
    use crate::poly_fields::{anti_field, lift_vec, PolyMat3};
    use crate::scalar::rat;
    use crate::tensor::Vec3;

    fn grid(h: Rational, bc: &Bc) -> Grid {
        Grid::preset(Preset::Cube, &h, &bc.gamma()).unwrap()
    }

    fn quad(f: &Forms, p: &[f64]) -> (f64, f64) {
        (quadratic(&f.a, p), quadratic(&f.m, p))
    }

    #[test]
    fn kernel_elements_have_zero_energy() {
        let g = grid(rat(1, 4), &Bc::None);
        let f = assemble_forms(Variant::DsDc, &g).unwrap();
        for t in KernelFamily::DevSymDevCurl.basis() {
            let p = g.sample(&t).values;
            // the assembled form loses ~ε‖A‖‖P‖² to cancellation; the defects themselves are exact
            let (a, m) = quad(&f, &p);
            assert!(a <= 1e-12 * m, "{a} {m}");
            let (direct, _, _) = form_values(&g, &p);
            assert!(direct <= 1e-18 * m, "{direct} {m}");
        }
        let f = assemble_forms(Variant::SC, &g).unwrap();
        let (a, _) = quad(&f, &g.sample(&anti_field(&lift_vec(&Vec3::unit(0)))).values);
        assert!(a.abs() < 1e-20);
        let (direct, _, _) = form_values(&g, &g.sample(&PolyMat3::identity()).values);
        assert!(direct < 1e-20);
    }

    #[test]
    fn forms_are_symmetric_and_masked() {
        let g = grid(rat(1, 4), &Bc::Full);
        let f = assemble_forms(Variant::DsC, &g).unwrap();
        assert_eq!(f.a.nrows(), f.active.len());
        assert!(f.a.asymmetry() < 1e-10);
        assert!(f.active.len() < 9 * g.num_nodes());
        assert!(matches!(
            assemble_forms(Variant::DevCurlVsCurl, &grid(rat(1, 4), &Bc::None)),
            Err(KornError::NeedsBoundary(_))
        ));
    }

    #[test]
    fn window_classification() {
        assert_eq!(classify_window(&[1e-14, 2e-14, 0.5, 1.0]).0, 2);
        let (kc, gap, status) = classify_window(&[0.2, 0.3]);
        assert_eq!((kc, gap.is_infinite(), status), (0, true, KernelStatus::Determinate));
        let (kc, gap, status) = classify_window(&[1e-9, 1e-7, 1.0]);
        assert_eq!((kc, status), (1, KernelStatus::Indeterminate));
        assert!((gap - 100.0).abs() < 1e-6);
    }

    #[test]
    fn kernel_counts_on_coarse_cube() {
        let g = grid(rat(1, 4), &Bc::None);
        for v in Variant::PAIRS {
            let r = kernel_dimension(v, &g, 3).unwrap();
            assert_eq!(r.kernel_count, v.kernel_family().unwrap().dimension(), "{v}");
            assert_eq!(r.status, KernelStatus::Determinate);
            assert!(r.projection_residual.unwrap() < 1e-6);
        }
    }

    #[test]
    fn full_bc_is_coercive_and_ordered() {
        let g = grid(rat(1, 4), &Bc::Full);
        let dd = estimate_constant(Variant::DsDc, &g, &Bc::Full, 1).unwrap();
        let dc = estimate_constant(Variant::DsC, &g, &Bc::Full, 1).unwrap();
        assert_eq!(dd.kernel_count, 0);
        assert!(dd.lambda_min > 0.1 && dd.lambda_min <= dc.lambda_min + 1e-12);
        assert!(variant_ordering_holds(&g, 20, 5));
    }

    #[test]
    fn norm_equivalence_on_coarse_cube() {
        let g = grid(rat(1, 4), &Bc::Full);
        let r = norm_equivalence_constant(&g, &Bc::Full, 1).unwrap();
        assert!(r.lambda_min > 0.0 && r.lambda_min < 1.0);
        assert!(r.deflation_dim.unwrap() > 0);
        for q in curl_ratio_samples(&g, 30, 2) {
            assert!(q <= r.c_estimate);
        }
    }

    #[test]
    fn corollary_checks() {
        let g = grid(rat(1, 4), &Bc::Full);
        let (_, leak) = compatible_field_ratio(&g, 5, 1);
        assert_eq!(leak, 0.0);
        let (ratio, defect) = anti_field_ratio(&g, 5, 1);
        assert!(defect < 1e-12);
        assert!(ratio.is_finite());
    }

    #[test]
    fn baby_korn_bump() {
        let g = grid(rat(1, 8), &Bc::None);
        let r = baby_korn_check(&g, 3, 1);
        assert_eq!(r.ratios.len(), 3);
        assert!(r.max_ratio() <= 2.15);
        let zero = baby_korn_ratios(&g, &[vec![0.0; 3 * g.num_nodes()]]);
        assert_eq!(zero.skipped, 1);
    }

    #[test]
    fn csv_row_shape() {
        let g = grid(rat(1, 4), &Bc::Full);
        let r = estimate_constant(Variant::SC, &g, &Bc::Full, 9).unwrap();
        let row = r.csv_row();
        assert_eq!(row.split(',').count(), SpectrumReport::CSV_HEADER.split(',').count());
        assert!(row.starts_with("S_C,cube,1/4,full,"));
        assert!(row.ends_with(",9"));
    }
}
