//! Explicit reconstructions of higher derivatives of `A + ζ·id` (A skew)
//! from derivatives of `Curl(A + ζ·id)` and `dev Curl(A + ζ·id)`.
//!
//! Each function uses only the incompatibility data named in its doc; the
//! tests compare against direct differentiation.

use crate::poly::Poly;
use crate::scalar::{Rational, Scalar};
use crate::tensor::{dev, skew, sym, Mat3};

use super::{axl_field, curl_mat, div, grad, inc, scalar_id, FieldError, PolyMat3, PolyTensor3, PolyVec3};

fn require_skew(a: &PolyMat3) -> Result<(), FieldError> {
    if a.is_skew() {
        Ok(())
    } else {
        Err(FieldError::NotSkew("A"))
    }
}

/// `∇ tr(D axl A) = -3 axl(Curl([dev Curl A]^T))`.
pub fn reconstruct_grad_tr(a: &PolyMat3) -> Result<PolyVec3, FieldError> {
    require_skew(a)?;
    let x = curl_mat(&dev(&curl_mat(a)).transpose());
    let axial = axl_field(&x, "Curl([dev Curl A]^T)")?;
    Ok(axial.scale(&Poly::from_int(-3)))
}

/// `D²ζ = ½ tr(Y)·id - sym(Y)` with `Y = Curl([dev Curl(A + ζ·id)]^T)`.
///
/// The skew field `A` only contributes to `skew(Y)`, so the result is
/// independent of `A`.
pub fn reconstruct_hessian_zeta(a: &PolyMat3, zeta: &Poly) -> Result<PolyMat3, FieldError> {
    require_skew(a)?;
    let y = curl_mat(&dev(&curl_mat(&(a.clone() + scalar_id(zeta)))).transpose());
    Ok(scalar_id(&y.trace().scale(&Rational::from_ratio(1, 2))) - sym(&y))
}

/// `D² tr(D axl A) = (3/2) tr(Z)·id - 3 sym(Z)` with `Z = inc([dev Curl(A + ζ·id)]^T)`.
///
/// `Z = ⅓(Δτ·id - D²τ) - Anti(∇Δζ)` for `τ = tr(D axl A)`, so `tr Z = ⅔Δτ` and
/// `sym Z = ⅓(Δτ·id - D²τ)`; solving for `D²τ` puts a factor 3 in front of
/// `sym Z`. A unit factor there does not reproduce the Hessian (see tests).
pub fn reconstruct_d2_tr(a: &PolyMat3, zeta: &Poly) -> Result<PolyMat3, FieldError> {
    reconstruct_d2_tr_with_sym_coefficient(a, zeta, &Rational::from_int(3))
}

/// [`reconstruct_d2_tr`] with the coefficient of `sym Z` left free.
pub fn reconstruct_d2_tr_with_sym_coefficient(
    a: &PolyMat3,
    zeta: &Poly,
    sym_coefficient: &Rational,
) -> Result<PolyMat3, FieldError> {
    require_skew(a)?;
    let z = inc(&dev(&curl_mat(&(a.clone() + scalar_id(zeta)))).transpose());
    Ok(scalar_id(&z.trace().scale(&Rational::from_ratio(3, 2))) - sym(&z).scale(&Poly::constant(sym_coefficient.clone())))
}

/// Second derivatives `∂_j ∂_k a_i` of `a = axl A`, from `D dev Curl A` alone:
/// `∂_k (D a)^T = ⅓ ∂_k τ·id - ∂_k dev Curl A` with `∇τ` from [`reconstruct_grad_tr`].
pub fn reconstruct_d2_axial(a: &PolyMat3) -> Result<PolyTensor3, FieldError> {
    let grad_tau = reconstruct_grad_tr(a)?;
    let dev_curl = dev(&curl_mat(a));
    // d[k] = ∂_k (D a)^T, whose (j, i) entry is ∂_k ∂_j a_i
    let d: Vec<PolyMat3> = (0..3)
        .map(|k| {
            scalar_id(&grad_tau[k].scale(&Rational::from_ratio(1, 3))) - dev_curl.map(|p| p.derivative(k))
        })
        .collect();
    Ok(PolyTensor3(std::array::from_fn(|i| {
        std::array::from_fn(|j| std::array::from_fn(|k| d[k][(j, i)].clone()))
    })))
}

/// Recovers `Curl P` from `dev Curl P` and `a = axl skew P`:
/// `Curl P = dev Curl P + ⅔ div(a)·id`.
///
/// Also checks `∇ div a = -3 axl skew Curl([dev Curl P]^T)`, which shows that
/// the trace information is already contained in `dev Curl P`.
pub fn devcurl_to_curl(p: &PolyMat3) -> Result<PolyMat3, FieldError> {
    let dev_curl = dev(&curl_mat(p));
    let a = axl_field(&skew(p), "skew P")?;
    let div_a = div(&a);

    let from_dev = axl_field(&skew(&curl_mat(&dev_curl.transpose())), "skew Curl([dev Curl P]^T)")?
        .scale(&Poly::from_int(-3));
    let direct = grad(&div_a);
    if from_dev != direct {
        let k = (0..3).find(|&k| from_dev[k] != direct[k]).unwrap_or(0);
        return Err(FieldError::Mismatch {
            identity: "grad div axl skew P = -3 axl skew Curl([dev Curl P]^T)",
            row: k,
            col: 0,
            lhs: direct[k].to_string(),
            rhs: from_dev[k].to_string(),
        });
    }
    Ok(dev_curl + Mat3::identity().scale(&div_a.scale(&Rational::from_ratio(2, 3))))
}
