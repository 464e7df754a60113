//! Exact differential calculus on polynomial vector and matrix fields over ℝ³.
//!
//! Derivative convention: `(D u)_ij = ∂_j u_i`, so rows of the Jacobian are
//! gradients of the components. The matrix Curl acts row-wise,
//! `Curl P = P × (-∇)`, i.e. row `i` of `Curl P` is `curl` of row `i` of `P`.
//! With these conventions `Curl(Anti(x)) = 2·id`.

mod kernels;
mod planar;
mod reconstruct;

pub use kernels::{
    conformal_killing, gram_matrix, kernel_ds_c, kernel_ds_dc, kernel_s_dc, rational_rank, KernelFamily,
};
pub use planar::{holomorphic_power, jac2, planar_cauchy_riemann, PolyVec2};
pub use reconstruct::{
    devcurl_to_curl, reconstruct_d2_axial, reconstruct_d2_tr, reconstruct_d2_tr_with_sym_coefficient,
    reconstruct_grad_tr, reconstruct_hessian_zeta,
};

use thiserror::Error;

use crate::poly::Poly;
use crate::scalar::{Rational, Scalar};
use crate::tensor::{anti_mat, sym, Mat3, Skew3, Vec3};

pub type PolyVec3 = Vec3<Poly>;
pub type PolyMat3 = Mat3<Poly>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("{0} must be skew-symmetric")]
    NotSkew(&'static str),
    #[error("matrix field is not the Curl of a skew field: reconstructed gradient has nonzero Curl")]
    NotInNyeImage,
    #[error("{identity}: entry ({row},{col}) differs: {lhs} vs {rhs}")]
    Mismatch {
        identity: &'static str,
        row: usize,
        col: usize,
        lhs: String,
        rhs: String,
    },
}

/// Third-order array of polynomials, `t[i][j][k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyTensor3(pub [[[Poly; 3]; 3]; 3]);

impl PolyTensor3 {
    /// `D²u` with entries `∂_j ∂_k u_i`.
    pub fn second_derivatives(u: &PolyVec3) -> Self {
        PolyTensor3(std::array::from_fn(|i| {
            std::array::from_fn(|j| std::array::from_fn(|k| u[i].derivative(j).derivative(k)))
        }))
    }

    pub fn is_symmetric_in_last_two(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| (0..3).all(|k| self.0[i][j][k] == self.0[i][k][j])))
    }
}

/// The position field `x = (x1, x2, x3)`.
pub fn position() -> PolyVec3 {
    Vec3::from_fn(Poly::var)
}

pub fn lift_vec(v: &Vec3<Rational>) -> PolyVec3 {
    v.map(|c| Poly::constant(c.clone()))
}

pub fn lift_mat(m: &Mat3<Rational>) -> PolyMat3 {
    m.map(|c| Poly::constant(c.clone()))
}

/// `ζ·id` for a scalar field `ζ`.
pub fn scalar_id(zeta: &Poly) -> PolyMat3 {
    Mat3::identity().scale(zeta)
}

pub fn grad(p: &Poly) -> PolyVec3 {
    Vec3::from_fn(|k| p.derivative(k))
}

pub fn jac(u: &PolyVec3) -> PolyMat3 {
    Mat3::from_fn(|i, j| u[i].derivative(j))
}

pub fn div(u: &PolyVec3) -> Poly {
    (0..3).fold(Poly::zero(), |acc, k| acc + u[k].derivative(k))
}

pub fn hessian(p: &Poly) -> PolyMat3 {
    Mat3::from_fn(|i, j| p.derivative(i).derivative(j))
}

pub fn laplacian(p: &Poly) -> Poly {
    (0..3).fold(Poly::zero(), |acc, k| acc + p.derivative(k).derivative(k))
}

/// `curl v = ∇ × v`.
pub fn curl(v: &PolyVec3) -> PolyVec3 {
    Vec3::new(
        v[2].derivative(1) - v[1].derivative(2),
        v[0].derivative(2) - v[2].derivative(0),
        v[1].derivative(0) - v[0].derivative(1),
    )
}

/// Row-wise matrix Curl.
pub fn curl_mat(p: &PolyMat3) -> PolyMat3 {
    Mat3::from_rows([curl(&p.row(0)), curl(&p.row(1)), curl(&p.row(2))])
}

/// Incompatibility `inc B = Curl([Curl B]^T)`.
pub fn inc(b: &PolyMat3) -> PolyMat3 {
    curl_mat(&curl_mat(b).transpose())
}

/// `Curl Anti(a) = tr(D a)·id - (D a)^T`.
pub fn nye_forward(a: &PolyVec3) -> PolyMat3 {
    let da = jac(a);
    scalar_id(&da.trace()) - da.transpose()
}

/// Recovers `D axl A = ½ tr(C)·id - C^T` from `C = Curl A`.
///
/// Fails when the recovered matrix is not a Jacobian (nonzero Curl), which
/// happens exactly when `C` is not the Curl of any skew polynomial field.
pub fn nye_inverse(c: &PolyMat3) -> Result<PolyMat3, FieldError> {
    let g = scalar_id(&(c.trace().scale(&Rational::from_ratio(1, 2)))) - c.transpose();
    if !curl_mat(&g).is_zero() {
        return Err(FieldError::NotInNyeImage);
    }
    Ok(g)
}

pub fn axl_field(a: &PolyMat3, what: &'static str) -> Result<PolyVec3, FieldError> {
    Skew3::from_mat(a).map(|s| s.axial().clone()).ok_or(FieldError::NotSkew(what))
}

/// Entry-wise comparison reporting the first differing entry.
pub fn compare(identity: &'static str, lhs: &PolyMat3, rhs: &PolyMat3) -> Result<(), FieldError> {
    for i in 0..3 {
        for j in 0..3 {
            if lhs[(i, j)] != rhs[(i, j)] {
                return Err(FieldError::Mismatch {
                    identity,
                    row: i,
                    col: j,
                    lhs: lhs[(i, j)].to_string(),
                    rhs: rhs[(i, j)].to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Checks Kröner's relation `inc(sym e) = -Curl κ` for `e = D u - P`,
/// `α = Curl P`, `κ = α^T - ½ tr(α)·id`, and `inc(sym e) = -inc(sym P)`.
pub fn kroener_check(u: &PolyVec3, p: &PolyMat3) -> Result<(), FieldError> {
    let e = jac(u) - p.clone();
    let alpha = curl_mat(p);
    let kappa = alpha.transpose() - scalar_id(&alpha.trace().scale(&Rational::from_ratio(1, 2)));
    let inc_sym_e = inc(&sym(&e));
    compare("inc(sym e) = -Curl(kappa)", &inc_sym_e, &-curl_mat(&kappa))?;
    compare("inc(sym e) = -inc(sym P)", &inc_sym_e, &-inc(&sym(p)))
}

/// `Anti(a)` for a polynomial vector field.
pub fn anti_field(a: &PolyVec3) -> PolyMat3 {
    anti_mat(a)
}
