//! Planar fields `u(x1, x2)`, where `dev₂ sym D u = 0` is the Cauchy–Riemann system.

use crate::poly::Poly;
use crate::tensor::{dev2, Mat2};

pub type PolyVec2 = [Poly; 2];

/// `(D u)_ij = ∂_j u_i` for `i, j ∈ {1, 2}`.
pub fn jac2(u: &PolyVec2) -> Mat2<Poly> {
    Mat2::from_fn(|i, j| u[i].derivative(j))
}

/// `dev₂ sym D u`; vanishes iff `∂₁u₁ = ∂₂u₂` and `∂₂u₁ = -∂₁u₂`.
pub fn planar_cauchy_riemann(u: &PolyVec2) -> Mat2<Poly> {
    dev2(&jac2(u).sym())
}

/// `(Re z^k, Im z^k)` with `z = x1 + i x2`.
pub fn holomorphic_power(k: u32) -> PolyVec2 {
    let (x, y) = (Poly::var(0), Poly::var(1));
    let mut re = Poly::from(crate::scalar::rat(1, 1));
    let mut im = Poly::zero();
    for _ in 0..k {
        let next_re = re.clone() * x.clone() - im.clone() * y.clone();
        let next_im = re * y.clone() + im * x.clone();
        re = next_re;
        im = next_im;
    }
    [re, im]
}
