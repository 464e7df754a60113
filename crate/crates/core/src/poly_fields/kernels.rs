//! Finite-dimensional kernels of the defect-operator pairs and the
//! infinitesimal conformal (conformal Killing) vector fields.

use num_traits::Zero;

use crate::poly::{Aabb, Poly};
use crate::scalar::{Rational, Scalar};
use crate::tensor::{cross, dev, sym, Skew3, Vec3};

use super::{anti_field, curl_mat, lift_vec, position, scalar_id, PolyMat3, PolyVec3};

/// `Anti(Ã x + b) + (⟨axl Ã, x⟩ + β)·id`: annihilated by `dev sym` and `Curl`.
pub fn kernel_ds_c(a_tilde: &Skew3<Rational>, b: &Vec3<Rational>, beta: &Rational) -> PolyMat3 {
    kernel_ds_dc(a_tilde, b, &Rational::zero(), beta)
}

/// `Anti(β x + b)`: annihilated by `sym` and `dev Curl`.
pub fn kernel_s_dc(beta: &Rational, b: &Vec3<Rational>) -> PolyMat3 {
    let x = position();
    anti_field(&(x.scale(&Poly::constant(beta.clone())) + lift_vec(b)))
}

/// `Anti(Ã x + β x + b) + (⟨axl Ã, x⟩ + γ)·id`: annihilated by `dev sym` and `dev Curl`.
pub fn kernel_ds_dc(a_tilde: &Skew3<Rational>, b: &Vec3<Rational>, beta: &Rational, gamma: &Rational) -> PolyMat3 {
    let x = position();
    let w = lift_vec(a_tilde.axial());
    let rotated = cross(&w, &x);
    let vector = rotated + x.scale(&Poly::constant(beta.clone())) + lift_vec(b);
    let scalar = w.dot(&x) + Poly::constant(gamma.clone());
    anti_field(&vector) + scalar_id(&scalar)
}

/// `⟨a,x⟩x - ½ a|x|² + Anti(b) x + β x + c`, the 10-parameter solutions of `dev sym D φ = 0`.
pub fn conformal_killing(a: &Vec3<Rational>, b: &Vec3<Rational>, c: &Vec3<Rational>, beta: &Rational) -> PolyVec3 {
    let x = position();
    let a = lift_vec(a);
    let half = Poly::from_ratio(1, 2);
    x.scale(&a.dot(&x)) - a.scale(&(half * x.norm_sq()))
        + cross(&lift_vec(b), &x)
        + x.scale(&Poly::constant(beta.clone()))
        + lift_vec(c)
}

/// The four operator pairs whose common kernel is a finite family of affine fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// `(dev sym, Curl)`, dimension 7.
    DevSymCurl,
    /// `(sym, dev Curl)`, dimension 4.
    SymDevCurl,
    /// `(dev sym, dev Curl)`, dimension 8.
    DevSymDevCurl,
    /// `(sym, Curl)`: constant skew fields, dimension 3.
    SymCurl,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 4] = [
        KernelFamily::DevSymCurl,
        KernelFamily::SymDevCurl,
        KernelFamily::DevSymDevCurl,
        KernelFamily::SymCurl,
    ];

    pub fn dimension(self) -> usize {
        match self {
            KernelFamily::DevSymCurl => 7,
            KernelFamily::SymDevCurl => 4,
            KernelFamily::DevSymDevCurl => 8,
            KernelFamily::SymCurl => 3,
        }
    }

    /// Fields obtained by switching on one scalar parameter at a time.
    pub fn basis(self) -> Vec<PolyMat3> {
        let zero = Rational::zero;
        let one = || Rational::from_int(1);
        let axial = |k: usize| Skew3::from_axial(Vec3::unit(k));
        let no_rot = || Skew3::from_axial(Vec3::zero());
        let mut out = Vec::new();
        match self {
            KernelFamily::DevSymCurl => {
                for k in 0..3 {
                    out.push(kernel_ds_c(&axial(k), &Vec3::zero(), &zero()));
                }
                for k in 0..3 {
                    out.push(kernel_ds_c(&no_rot(), &Vec3::unit(k), &zero()));
                }
                out.push(kernel_ds_c(&no_rot(), &Vec3::zero(), &one()));
            }
            KernelFamily::SymDevCurl => {
                out.push(kernel_s_dc(&one(), &Vec3::zero()));
                for k in 0..3 {
                    out.push(kernel_s_dc(&zero(), &Vec3::unit(k)));
                }
            }
            KernelFamily::DevSymDevCurl => {
                for k in 0..3 {
                    out.push(kernel_ds_dc(&axial(k), &Vec3::zero(), &zero(), &zero()));
                }
                for k in 0..3 {
                    out.push(kernel_ds_dc(&no_rot(), &Vec3::unit(k), &zero(), &zero()));
                }
                out.push(kernel_ds_dc(&no_rot(), &Vec3::zero(), &one(), &zero()));
                out.push(kernel_ds_dc(&no_rot(), &Vec3::zero(), &zero(), &one()));
            }
            KernelFamily::SymCurl => {
                for k in 0..3 {
                    out.push(kernel_s_dc(&zero(), &Vec3::unit(k)));
                }
            }
        }
        out
    }

    /// The two defect fields whose joint vanishing defines the kernel.
    pub fn defects(self, p: &PolyMat3) -> [PolyMat3; 2] {
        let curl = curl_mat(p);
        match self {
            KernelFamily::DevSymCurl => [dev(&sym(p)), curl],
            KernelFamily::SymDevCurl => [sym(p), dev(&curl)],
            KernelFamily::DevSymDevCurl => [dev(&sym(p)), dev(&curl)],
            KernelFamily::SymCurl => [sym(p), curl],
        }
    }
}

/// `G_ab = ∫_box ⟨T_a, T_b⟩ dx`, exact.
pub fn gram_matrix(fields: &[PolyMat3], b: &Aabb) -> Vec<Vec<Rational>> {
    fields
        .iter()
        .map(|ta| fields.iter().map(|tb| ta.dot(tb).integrate(b)).collect())
        .collect()
}

/// Rank by exact Gaussian elimination.
pub fn rational_rank(m: &[Vec<Rational>]) -> usize {
    let mut rows: Vec<Vec<Rational>> = m.to_vec();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] / &pivot_row[col];
            for c in col..ncols {
                let delta = &factor * &pivot_row[c];
                rows[r][c] -= delta;
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly_fields::jac;
    use crate::scalar::rat;
    use crate::tensor::Mat3;

    fn q(n: i64) -> Rational {
        rat(n, 1)
    }

    fn no_rot() -> Skew3<Rational> {
        Skew3::from_axial(Vec3::zero())
    }

    fn annihilated(family: KernelFamily, t: &PolyMat3) -> bool {
        family.defects(t).iter().all(Mat3::is_zero)
    }

    #[test]
    fn ds_c_examples() {
        let id = kernel_ds_c(&no_rot(), &Vec3::zero(), &q(1));
        assert_eq!(id, PolyMat3::identity());
        assert!(annihilated(KernelFamily::DevSymCurl, &id));

        let t = kernel_ds_c(&Skew3::from_axial(Vec3::unit(2)), &Vec3::zero(), &q(0));
        let x = position();
        let expected = anti_field(&cross(&lift_vec(&Vec3::unit(2)), &x)) + scalar_id(&x[2]);
        assert_eq!(t, expected);
        assert!(annihilated(KernelFamily::DevSymCurl, &t));

        let t = kernel_ds_c(&no_rot(), &Vec3::unit(0), &q(0));
        assert!(curl_mat(&t).is_zero());
        assert!(t.entries().all(|p| p.degree().unwrap_or(0) == 0));
    }

    #[test]
    fn s_dc_examples() {
        let t = kernel_s_dc(&q(1), &Vec3::zero());
        assert_eq!(curl_mat(&t), PolyMat3::identity().scale(&Poly::from_int(2)));
        assert!(annihilated(KernelFamily::SymDevCurl, &t));
        let t = kernel_s_dc(&q(0), &Vec3::unit(1));
        assert!(curl_mat(&t).is_zero());
        let t = kernel_s_dc(&q(1), &Vec3::unit(0));
        assert!(annihilated(KernelFamily::SymDevCurl, &t));
    }

    #[test]
    fn ds_dc_examples() {
        assert_eq!(kernel_ds_dc(&no_rot(), &Vec3::zero(), &q(0), &q(1)), PolyMat3::identity());
        assert_eq!(kernel_ds_dc(&no_rot(), &Vec3::zero(), &q(1), &q(0)), anti_field(&position()));
        let t = kernel_ds_dc(&Skew3::from_axial(Vec3::unit(0)), &Vec3::unit(1), &q(1), &q(-1));
        assert!(annihilated(KernelFamily::DevSymDevCurl, &t));
        assert!(!annihilated(KernelFamily::DevSymCurl, &t));
    }

    #[test]
    fn bases_have_expected_dimensions() {
        let cube = Aabb::unit_cube();
        for family in KernelFamily::ALL {
            let basis = family.basis();
            assert_eq!(basis.len(), family.dimension());
            for t in &basis {
                assert!(annihilated(family, t), "{family:?}");
            }
            assert_eq!(rational_rank(&gram_matrix(&basis, &cube)), family.dimension());
        }
    }

    #[test]
    fn conformal_killing_examples() {
        let z = || Vec3::<Rational>::zero();
        assert_eq!(conformal_killing(&z(), &z(), &z(), &q(1)), position());
        let phi = conformal_killing(&Vec3::unit(0), &z(), &z(), &q(0));
        assert!(dev(&sym(&jac(&phi))).is_zero());
        assert!(!sym(&jac(&phi)).is_zero());
        let rot = conformal_killing(&z(), &Vec3::unit(2), &z(), &q(0));
        assert!(sym(&jac(&rot)).is_zero());
    }

    #[test]
    fn rank_of_singular_matrix() {
        let m = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert_eq!(rational_rank(&m), 1);
        assert_eq!(rational_rank(&[vec![q(0), q(0)]]), 0);
    }
}
