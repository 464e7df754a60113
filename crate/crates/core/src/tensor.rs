//! Pointwise algebra on 3-vectors and 3×3 matrices.
//!
//! Everything here is generic over [`Scalar`], so the same code runs on exact
//! rationals (identity verification), on `f64` (the grid stack) and on
//! polynomials (the field calculus in [`crate::poly_fields`]).
//!
//! Conventions: matrices are stored row-major, `Anti(a) b = a × b`, and the
//! matrix–vector cross product acts row-wise, `P × b := P Anti(b)`.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::{Field, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("direction vector must be nonzero")]
    ZeroDirection,
    #[error("dev(P×b) = 0 and P×b = 0 disagree (dev zero: {dev_zero}, cross zero: {cross_zero})")]
    EquivalenceBroken { dev_zero: bool, cross_zero: bool },
    #[error("norm bound violated: |dev(P×b)| = {dev_norm}, |P×b| = {cross_norm}")]
    BoundViolated { dev_norm: f64, cross_norm: f64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Vec3<T>(pub [T; 3]);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat2<T>(pub [[T; 2]; 2]);

/// A skew-symmetric 3×3 matrix, stored through its axial vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Skew3<T> {
    axial: Vec3<T>,
}

impl<T: Scalar> Vec3<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Vec3([a, b, c])
    }

    pub fn zero() -> Self {
        Vec3([T::zero(), T::zero(), T::zero()])
    }

    /// Canonical basis vector `e_{k+1}` (zero-based `k`).
    pub fn unit(k: usize) -> Self {
        Vec3::from_fn(|i| if i == k { T::one() } else { T::zero() })
    }

    pub fn from_fn(mut f: impl FnMut(usize) -> T) -> Self {
        Vec3([f(0), f(1), f(2)])
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Vec3<U> {
        Vec3([f(&self.0[0]), f(&self.0[1]), f(&self.0[2])])
    }

    pub fn dot(&self, other: &Self) -> T {
        (0..3).fold(T::zero(), |acc, i| acc + self.0[i].clone() * other.0[i].clone())
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Scalar::is_negligible)
    }
}

impl<T: Scalar> Mat3<T> {
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> T) -> Self {
        Mat3([
            [f(0, 0), f(0, 1), f(0, 2)],
            [f(1, 0), f(1, 1), f(1, 2)],
            [f(2, 0), f(2, 1), f(2, 2)],
        ])
    }

    pub fn zero() -> Self {
        Mat3::from_fn(|_, _| T::zero())
    }

    pub fn identity() -> Self {
        Mat3::from_fn(|i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diag(d: [T; 3]) -> Self {
        let [a, b, c] = d;
        let mut m = Mat3::zero();
        m.0[0][0] = a;
        m.0[1][1] = b;
        m.0[2][2] = c;
        m
    }

    pub fn from_rows(rows: [Vec3<T>; 3]) -> Self {
        let [r0, r1, r2] = rows;
        Mat3([r0.0, r1.0, r2.0])
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Mat3<U> {
        Mat3([
            [f(&self.0[0][0]), f(&self.0[0][1]), f(&self.0[0][2])],
            [f(&self.0[1][0]), f(&self.0[1][1]), f(&self.0[1][2])],
            [f(&self.0[2][0]), f(&self.0[2][1]), f(&self.0[2][2])],
        ])
    }

    pub fn row(&self, i: usize) -> Vec3<T> {
        Vec3(self.0[i].clone())
    }

    pub fn column(&self, j: usize) -> Vec3<T> {
        Vec3::from_fn(|i| self.0[i][j].clone())
    }

    pub fn transpose(&self) -> Self {
        Mat3::from_fn(|i, j| self.0[j][i].clone())
    }

    pub fn trace(&self) -> T {
        self.0[0][0].clone() + self.0[1][1].clone() + self.0[2][2].clone()
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        Vec3::from_fn(|i| self.row(i).dot(v))
    }

    /// Frobenius inner product `⟨P, Q⟩ = Σ P_ij Q_ij`.
    pub fn dot(&self, other: &Self) -> T {
        let mut acc = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc = acc + self.0[i][j].clone() * other.0[i][j].clone();
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(Scalar::is_negligible)
    }

    pub fn is_symmetric(&self) -> bool {
        (self.clone() - self.transpose()).is_zero()
    }

    pub fn is_skew(&self) -> bool {
        (self.clone() + self.transpose()).is_zero()
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.0.iter().flatten()
    }
}

impl<T: Scalar> Mat2<T> {
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> T) -> Self {
        Mat2([[f(0, 0), f(0, 1)], [f(1, 0), f(1, 1)]])
    }

    pub fn identity() -> Self {
        Mat2::from_fn(|i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn transpose(&self) -> Self {
        Mat2::from_fn(|i, j| self.0[j][i].clone())
    }

    pub fn trace(&self) -> T {
        self.0[0][0].clone() + self.0[1][1].clone()
    }

    pub fn sym(&self) -> Self {
        let half = T::from_ratio(1, 2);
        Mat2::from_fn(|i, j| half.clone() * (self.0[i][j].clone() + self.0[j][i].clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(Scalar::is_negligible)
    }
}

impl<T: Scalar> Skew3<T> {
    pub fn from_axial(axial: Vec3<T>) -> Self {
        Skew3 { axial }
    }

    /// Returns `None` unless `m` is skew-symmetric.
    pub fn from_mat(m: &Mat3<T>) -> Option<Self> {
        if !m.is_skew() {
            return None;
        }
        Some(Skew3::from_axial(Vec3::new(
            -m.0[1][2].clone(),
            m.0[0][2].clone(),
            -m.0[0][1].clone(),
        )))
    }

    pub fn axial(&self) -> &Vec3<T> {
        &self.axial
    }

    pub fn to_mat(&self) -> Mat3<T> {
        let [a1, a2, a3] = self.axial.0.clone();
        let z = T::zero;
        Mat3([
            [z(), -a3.clone(), a2.clone()],
            [a3, z(), -a1.clone()],
            [-a2, a1, z()],
        ])
    }
}

macro_rules! elementwise_ops {
    ($ty:ident) => {
        impl<T: Scalar> Add for $ty<T> {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                let mut out = self;
                for (a, b) in out.entries_mut().zip(rhs.into_entries()) {
                    *a = a.clone() + b;
                }
                out
            }
        }

        impl<T: Scalar> Sub for $ty<T> {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                let mut out = self;
                for (a, b) in out.entries_mut().zip(rhs.into_entries()) {
                    *a = a.clone() - b;
                }
                out
            }
        }

        impl<T: Scalar> Neg for $ty<T> {
            type Output = Self;
            fn neg(self) -> Self {
                let mut out = self;
                for a in out.entries_mut() {
                    *a = -a.clone();
                }
                out
            }
        }
    };
}

impl<T> Vec3<T> {
    fn entries_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.0.iter_mut()
    }
    fn into_entries(self) -> impl Iterator<Item = T> {
        self.0.into_iter()
    }
}

impl<T> Mat3<T> {
    fn entries_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.0.iter_mut().flatten()
    }
    fn into_entries(self) -> impl Iterator<Item = T> {
        self.0.into_iter().flatten()
    }
}

impl<T> Mat2<T> {
    fn entries_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.0.iter_mut().flatten()
    }
    fn into_entries(self) -> impl Iterator<Item = T> {
        self.0.into_iter().flatten()
    }
}

elementwise_ops!(Vec3);
elementwise_ops!(Mat3);
elementwise_ops!(Mat2);

impl<T: Scalar> Mul for Mat3<T> {
    type Output = Mat3<T>;
    fn mul(self, rhs: Mat3<T>) -> Mat3<T> {
        Mat3::from_fn(|i, j| {
            (0..3).fold(T::zero(), |acc, k| acc + self.0[i][k].clone() * rhs.0[k][j].clone())
        })
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec3<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T> Index<(usize, usize)> for Mat3<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.0[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat3<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.0[i][j]
    }
}

pub fn cross<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    let [a1, a2, a3] = &a.0;
    let [b1, b2, b3] = &b.0;
    Vec3::new(
        a2.clone() * b3.clone() - a3.clone() * b2.clone(),
        a3.clone() * b1.clone() - a1.clone() * b3.clone(),
        a1.clone() * b2.clone() - a2.clone() * b1.clone(),
    )
}

pub fn anti<T: Scalar>(a: &Vec3<T>) -> Skew3<T> {
    Skew3::from_axial(a.clone())
}

/// `Anti(a)` as a plain matrix.
pub fn anti_mat<T: Scalar>(a: &Vec3<T>) -> Mat3<T> {
    anti(a).to_mat()
}

pub fn axl<T: Scalar>(a: &Skew3<T>) -> Vec3<T> {
    a.axial().clone()
}

pub fn sym<T: Scalar>(m: &Mat3<T>) -> Mat3<T> {
    let half = T::from_ratio(1, 2);
    Mat3::from_fn(|i, j| half.clone() * (m.0[i][j].clone() + m.0[j][i].clone()))
}

pub fn skew<T: Scalar>(m: &Mat3<T>) -> Mat3<T> {
    let half = T::from_ratio(1, 2);
    Mat3::from_fn(|i, j| half.clone() * (m.0[i][j].clone() - m.0[j][i].clone()))
}

pub fn tr<T: Scalar>(m: &Mat3<T>) -> T {
    m.trace()
}

/// Deviatoric part `M - ⅓ tr(M)·id`.
pub fn dev<T: Scalar>(m: &Mat3<T>) -> Mat3<T> {
    let mean = T::from_ratio(1, 3) * m.trace();
    m.clone() - Mat3::identity().scale(&mean)
}

/// Planar deviatoric part `M - ½ tr(M)·id₂`.
pub fn dev2<T: Scalar>(m: &Mat2<T>) -> Mat2<T> {
    let mean = T::from_ratio(1, 2) * m.trace();
    let mut out = m.clone();
    out.0[0][0] = out.0[0][0].clone() - mean.clone();
    out.0[1][1] = out.0[1][1].clone() - mean;
    out
}

/// Row-wise cross product `P × b = P Anti(b)`.
pub fn mat_cross_vec<T: Scalar>(p: &Mat3<T>, b: &Vec3<T>) -> Mat3<T> {
    p.clone() * anti_mat(b)
}

pub fn dyad<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Mat3<T> {
    Mat3::from_fn(|i, j| a.0[i].clone() * b.0[j].clone())
}

/// `dev(P × b)` through the closed form `P × b + ⅔ ⟨axl skew P, b⟩·id`.
pub fn dev_cross_reconstruct<T: Scalar>(p: &Mat3<T>, b: &Vec3<T>) -> Mat3<T> {
    let a = Skew3::from_axial(axial_of_skew_part(p));
    let shift = T::from_ratio(2, 3) * axl(&a).dot(b);
    mat_cross_vec(p, b) + Mat3::identity().scale(&shift)
}

/// Axial vector of `skew(P)`, without requiring `P` to be skew.
pub fn axial_of_skew_part<T: Scalar>(p: &Mat3<T>) -> Vec3<T> {
    let s = skew(p);
    Vec3::new(-s.0[1][2].clone(), s.0[0][2].clone(), -s.0[0][1].clone())
}

/// Decides `dev(P × b) = 0`, checking that it agrees with `P × b = 0` and
/// that `|dev(P×b)| ≤ |P×b| ≤ (1+√3)|dev(P×b)|` (to 8 ulps).
pub fn cross_zero_equivalence<T: Field>(p: &Mat3<T>, b: &Vec3<T>) -> Result<bool, TensorError> {
    if b.is_zero() {
        return Err(TensorError::ZeroDirection);
    }
    let pb = mat_cross_vec(p, b);
    let dpb = dev(&pb);
    let (dev_zero, cross_zero) = (dpb.is_zero(), pb.is_zero());
    if dev_zero != cross_zero {
        return Err(TensorError::EquivalenceBroken { dev_zero, cross_zero });
    }
    let (dev_norm, cross_norm) = (dpb.norm_sq().to_f64().sqrt(), pb.norm_sq().to_f64().sqrt());
    if !cross_norm_bound_holds(dev_norm, cross_norm) {
        return Err(TensorError::BoundViolated { dev_norm, cross_norm });
    }
    Ok(dev_zero)
}

/// The two-sided bound between `|dev(P×b)|` and `|P×b|`, with an 8-ulp relative slack.
pub fn cross_norm_bound_holds(dev_norm: f64, cross_norm: f64) -> bool {
    let slack = 1.0 + 8.0 * f64::EPSILON;
    dev_norm <= cross_norm * slack && cross_norm <= (1.0 + 3f64.sqrt()) * dev_norm * slack
}

/// `(Anti(a) + α·id) × b`, via `b⊗a - ⟨b,a⟩·id + α·Anti(b)`.
pub fn anti_plus_scaled_id_cross<T: Scalar>(a: &Vec3<T>, alpha: &T, b: &Vec3<T>) -> Mat3<T> {
    dyad(b, a) - Mat3::identity().scale(&b.dot(a)) + anti_mat(b).scale(alpha)
}
