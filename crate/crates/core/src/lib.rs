//! Tensor calculus of incompatible fields and numerical estimation of
//! trace-free Korn constants.
//!
//! * [`tensor`]: pointwise algebra (cross products, `Anti`/`axl`, `sym`/`skew`/`dev`).
//! * [`poly`] and [`poly_fields`]: exact polynomial fields with Grad, Div,
//!   matrix Curl, `inc`, Nye's formulas and the rigidity kernels.
//! * [`identities`]: randomized exact identity suites.
//! * [`grid`], [`sparse`]: finite-difference operators on box unions.
//! * [`eigen`], [`korn`]: generalized eigenproblems and the spectrum reports.

pub mod eigen;
pub mod grid;
pub mod identities;
pub mod korn;
pub mod poly;
pub mod poly_fields;
pub mod scalar;
pub mod sparse;
pub mod tensor;
