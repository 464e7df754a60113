//! Randomized exact identity suites.
//!
//! Every check draws random rational vectors/matrices or random polynomial
//! fields from a seeded generator and compares both sides with exact
//! arithmetic. Suites are grouped so that the CLI can run a subset.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::poly::{Aabb, Poly};
use crate::poly_fields::{
    self as pf, anti_field, curl_mat, div, gram_matrix, grad, hessian, holomorphic_power, inc, jac, kroener_check,
    laplacian, nye_forward, nye_inverse, planar_cauchy_riemann, rational_rank, reconstruct_d2_axial,
    reconstruct_d2_tr, reconstruct_grad_tr, reconstruct_hessian_zeta, scalar_id, KernelFamily, PolyMat3, PolyTensor3,
    PolyVec3,
};
use crate::scalar::{Rational, Scalar};
use crate::tensor::{
    anti, anti_mat, anti_plus_scaled_id_cross, axial_of_skew_part, axl, cross, cross_zero_equivalence, dev,
    dev_cross_reconstruct, dyad, mat_cross_vec, skew, sym, Mat3, Skew3, Vec3,
};

/// Suite sizes and selection.
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Random instances per pointwise-algebra identity.
    pub algebra_cases: usize,
    /// Random polynomial fields per field identity.
    pub field_cases: usize,
    /// Random `(A, ζ)` pairs per reconstruction.
    pub reconstruction_cases: usize,
    /// Maximum total degree of random fields (skew fields and general fields).
    pub max_degree: u32,
    /// Degree used for the `Curl ∘ D ≡ 0` check.
    pub max_degree_compatible: u32,
    /// Run only groups whose name is listed.
    pub only: Option<Vec<String>>,
    /// Harness self-test: flips the sign of one side of the Nye round trip.
    pub inject_fault: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 2021,
            algebra_cases: 1000,
            field_cases: 200,
            reconstruction_cases: 100,
            max_degree: 5,
            max_degree_compatible: 6,
            only: None,
            inject_fault: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityOutcome {
    pub group: &'static str,
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl IdentityOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

/// Group names accepted by [`SuiteOptions::only`].
pub const GROUPS: [&str; 12] = [
    "algebra",
    "cross",
    "nye",
    "curl-grad",
    "inc",
    "decomposition",
    "kroener",
    "saint-venant",
    "reconstruction",
    "kernels",
    "planar",
    "devcurl",
];

/// Seeded generator of random rationals and polynomial fields.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rational(&mut self) -> Rational {
        let num = self.rng.random_range(-20i64..=20);
        let den = self.rng.random_range(1i64..=12);
        Rational::from_ratio(num, den)
    }

    pub fn nonzero_rational(&mut self) -> Rational {
        loop {
            let r = self.rational();
            if !r.is_zero() {
                return r;
            }
        }
    }

    pub fn vec3(&mut self) -> Vec3<Rational> {
        Vec3::from_fn(|_| self.rational())
    }

    pub fn nonzero_vec3(&mut self) -> Vec3<Rational> {
        loop {
            let v = self.vec3();
            if !v.is_zero() {
                return v;
            }
        }
    }

    pub fn mat3(&mut self) -> Mat3<Rational> {
        Mat3::from_fn(|_, _| self.rational())
    }

    pub fn symmetric(&mut self) -> Mat3<Rational> {
        sym(&self.mat3())
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    /// Random polynomial with total degree ≤ `degree`; each monomial is
    /// present with probability ½ and the top degree is always populated.
    pub fn poly(&mut self, degree: u32) -> Poly {
        let mut p = Poly::zero();
        for a in 0..=degree {
            for b in 0..=degree - a {
                for c in 0..=degree - a - b {
                    if self.rng.random_bool(0.5) {
                        p = p + Poly::monomial([a, b, c], self.rational());
                    }
                }
            }
        }
        let top = self.rng.random_range(0..=degree);
        p + Poly::monomial([top, degree - top, 0], self.nonzero_rational())
    }

    pub fn poly_vec(&mut self, degree: u32) -> PolyVec3 {
        Vec3::from_fn(|_| self.poly(degree))
    }

    pub fn poly_mat(&mut self, degree: u32) -> PolyMat3 {
        Mat3::from_fn(|_, _| self.poly(degree))
    }

    pub fn poly_sym(&mut self, degree: u32) -> PolyMat3 {
        let m = self.poly_mat(degree);
        sym(&m)
    }

    pub fn poly_skew(&mut self, degree: u32) -> PolyMat3 {
        anti_field(&self.poly_vec(degree))
    }
}

struct Recorder<'a> {
    group: &'static str,
    out: &'a mut Vec<IdentityOutcome>,
}

impl Recorder<'_> {
    /// Runs `cases` instances of a check that returns `Err(description)` on failure.
    fn check(
        &mut self,
        name: &'static str,
        cases: usize,
        sampler: &mut Sampler,
        mut f: impl FnMut(&mut Sampler) -> Result<(), String>,
    ) {
        let mut failures = 0;
        let mut first_failure = None;
        for _ in 0..cases {
            if let Err(msg) = f(sampler) {
                failures += 1;
                first_failure.get_or_insert(msg);
            }
        }
        self.out.push(IdentityOutcome { group: self.group, name, cases, failures, first_failure });
    }
}

fn expect_eq<T: PartialEq + std::fmt::Debug>(lhs: T, rhs: T) -> Result<(), String> {
    if lhs == rhs {
        Ok(())
    } else {
        Err(format!("lhs = {lhs:?}, rhs = {rhs:?}"))
    }
}

fn expect(cond: bool, what: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

/// Runs the selected groups and returns one outcome per identity.
pub fn run_suites(opts: &SuiteOptions) -> Vec<IdentityOutcome> {
    let mut out = Vec::new();
    let selected = |g: &str| opts.only.as_ref().is_none_or(|list| list.iter().any(|s| s == g));
    for (i, group) in GROUPS.iter().enumerate() {
        if !selected(group) {
            continue;
        }
        // each group gets its own stream so filtering does not change the instances
        let mut sampler = Sampler::new(opts.seed.wrapping_add(i as u64 * 0x9e37_79b9));
        let mut rec = Recorder { group, out: &mut out };
        match *group {
            "algebra" => algebra_group(&mut rec, &mut sampler, opts),
            "cross" => cross_group(&mut rec, &mut sampler, opts),
            "nye" => nye_group(&mut rec, &mut sampler, opts),
            "curl-grad" => curl_grad_group(&mut rec, &mut sampler, opts),
            "inc" => inc_group(&mut rec, &mut sampler, opts),
            "decomposition" => decomposition_group(&mut rec, &mut sampler, opts),
            "kroener" => kroener_group(&mut rec, &mut sampler, opts),
            "saint-venant" => saint_venant_group(&mut rec, &mut sampler, opts),
            "reconstruction" => reconstruction_group(&mut rec, &mut sampler, opts),
            "kernels" => kernels_group(&mut rec, &mut sampler),
            "planar" => planar_group(&mut rec, &mut sampler),
            "devcurl" => devcurl_group(&mut rec, &mut sampler, opts),
            _ => unreachable!(),
        }
    }
    out
}

fn algebra_group(rec: &mut Recorder<'_>, s: &mut Sampler, opts: &SuiteOptions) {
    let n = opts.algebra_cases;
    rec.check("cross antisymmetric and orthogonal", n, s, |s| {
        let (a, b) = (s.vec3(), s.vec3());
        let ab = cross(&a, &b);
        expect_eq(ab.clone(), -cross(&b, &a))?;
        expect(ab.dot(&a).is_zero(), "<a x b, a> != 0")
    });
    rec.check("Anti(a) b = a x b", n, s, |s| {
        let (a, b) = (s.vec3(), s.vec3());
        expect_eq(anti_mat(&a).mul_vec(&b), cross(&a, &b))
    });
    rec.check("anti/axl round trip", n, s, |s| {
        let a = s.vec3();
        expect_eq(axl(&anti(&a)), a.clone())?;
        let m = anti_mat(&a);
        expect_eq(Skew3::from_mat(&m).map(|k| k.to_mat()), Some(m))
    });
    rec.check("sym + skew = M, orthogonal; tr dev = 0", n, s, |s| {
        let m = s.mat3();
        expect_eq(sym(&m) + skew(&m), m.clone())?;
        expect(sym(&m).dot(&skew(&m)).is_zero(), "<sym M, skew M> != 0")?;
        expect(dev(&m).trace().is_zero(), "tr dev M != 0")
    });
    rec.check("(Anti a) x b = b(x)a - <b,a> id", n, s, |s| {
        let (a, b) = (s.vec3(), s.vec3());
        expect_eq(mat_cross_vec(&anti_mat(&a), &b), dyad(&b, &a) - Mat3::identity().scale(&b.dot(&a)))
    });
    rec.check("(P x b) b = 0", n, s, |s| {
        let (p, b) = (s.mat3(), s.vec3());
        expect(mat_cross_vec(&p, &b).mul_vec(&b).is_zero(), "(P x b) b != 0")
    });
    rec.check("|b|^2 P x b = |b|^2 dev(P x b) - <b, dev(P x b) b> id", n, s, |s| {
        let (p, b) = (s.mat3(), s.vec3());
        let pb = mat_cross_vec(&p, &b);
        let dpb = dev(&pb);
        let nb = b.norm_sq();
        expect_eq(pb.scale(&nb), dpb.scale(&nb) - Mat3::identity().scale(&b.dot(&dpb.mul_vec(&b))))
    });
    rec.check("|sym(a(x)b)|^2 = |a|^2|b|^2/2 + <a,b>^2/2", n, s, |s| {
        let (a, b) = (s.vec3(), s.vec3());
        let half = Rational::from_ratio(1, 2);
        let ab = a.dot(&b);
        expect_eq(sym(&dyad(&a, &b)).norm_sq(), half.clone() * a.norm_sq() * b.norm_sq() + half * ab.clone() * ab)
    });
    rec.check("(Anti a + alpha id) x b = 0 only for a = 0, alpha = 0", n, s, |s| {
        let b = s.nonzero_vec3();
        let a = if s.chance(0.2) { Vec3::zero() } else { s.vec3() };
        let alpha = if s.chance(0.2) { Rational::zero() } else { s.rational() };
        let got = anti_plus_scaled_id_cross(&a, &alpha, &b);
        let direct = mat_cross_vec(&(anti_mat(&a) + Mat3::identity().scale(&alpha)), &b);
        expect_eq(got.clone(), direct)?;
        expect(got.is_zero() == (a.is_zero() && alpha.is_zero()), "zero pattern mismatch")
    });
}

/// Componentwise expansion of `S × b` for symmetric `S`.
fn sym_cross_expanded(s: &Mat3<Rational>, b: &Vec3<Rational>) -> Mat3<Rational> {
    let e = |i: usize, j: usize| s[(i - 1, j - 1)].clone();
    let b = |k: usize| b[k - 1].clone();
    Mat3([
        [
            e(1, 2) * b(3) - e(1, 3) * b(2),
            e(1, 3) * b(1) - e(1, 1) * b(3),
            e(1, 1) * b(2) - e(1, 2) * b(1),
        ],
        [
            e(2, 2) * b(3) - e(2, 3) * b(2),
            e(2, 3) * b(1) - e(1, 2) * b(3),
            e(1, 2) * b(2) - e(2, 2) * b(1),
        ],
        [
            e(2, 3) * b(3) - e(3, 3) * b(2),
            e(3, 3) * b(1) - e(1, 3) * b(3),
            e(1, 3) * b(2) - e(2, 3) * b(1),
        ],
    ])
}

fn cross_group(rec: &mut Recorder<'_>, s: &mut Sampler, opts: &SuiteOptions) {
    let n = opts.algebra_cases;
    let third = |x: Mat3<Rational>| x;
    let cb = |p: &Mat3<Rational>, b: &Vec3<Rational>| mat_cross_vec(p, b);
    let double = |p: &Mat3<Rational>, b: &Vec3<Rational>| cb(&cb(p, b).transpose(), b);

    rec.check("P x b acts row-wise", n, s, |s| {
        let (p, b) = (s.mat3(), s.vec3());
        let rows = Mat3::from_rows([cross(&p.row(0), &b), cross(&p.row(1), &b), cross(&p.row(2), &b)]);
        expect_eq(cb(&p, &b), rows)
    });
    rec.check("id x b = Anti(b)", n, s, |s| {
        let b = s.vec3();
        expect_eq(cb(&Mat3::identity(), &b), anti_mat(&b))
    });
    rec.check("(Anti a) x b = b(x)a - <b,a> id", n, s, |s| {
        let (a, b) = (s.vec3(), s.vec3());
        expect_eq(cb(&anti_mat(&a), &b), dyad(&b, &a) - Mat3::identity().scale(&b.dot(&a)))
    });
    rec.check("tr(S x b) = 0 and componentwise S x b", n, s, |s| {
        let (m, b) = (s.symmetric(), s.vec3());
        let sb = cb(&m, &b);
        expect(sb.trace().is_zero(), "tr(S x b) != 0")?;
        expect_eq(sb, sym_cross_expanded(&m, &b))
    });
    rec.check("(id x b)^T x b = |b|^2 id - b(x)b", n, s, |s| {
        let b = s.vec3();
        let lhs = double(&Mat3::identity(), &b);
        expect(lhs.is_symmetric(), "not symmetric")?;
        expect_eq(lhs, Mat3::identity().scale(&b.norm_sq()) - dyad(&b, &b))
    });
    rec.check("((Anti a) x b)^T x b = -<b,a> Anti(b)", n, s, |s| {
        let (a, b) = (s.vec3(), s.vec3());
        let lhs = double(&anti_mat(&a), &b);
        expect(lhs.is_skew(), "not skew")?;
        expect_eq(lhs, anti_mat(&b).scale(&-b.dot(&a)))
    });
    rec.check("(S x b)^T x b symmetric", n, s, |s| {
        let (m, b) = (s.symmetric(), s.vec3());
        expect(double(&m, &b).is_symmetric(), "not symmetric")
    });
    rec.check("dev(P x b) = P x b + 2/3 <axl skew P, b> id", n, s, |s| {
        let (p, b) = (s.mat3(), s.vec3());
        let closed = cb(&p, &b) + Mat3::identity().scale(&(Rational::from_ratio(2, 3) * axial_of_skew_part(&p).dot(&b)));
        expect_eq(dev(&cb(&p, &b)), closed.clone())?;
        expect_eq(dev_cross_reconstruct(&p, &b), closed)
    });
    rec.check("sym[(P x b)^T x b] = ((sym P) x b)^T x b", n, s, |s| {
        let (p, b) = (s.mat3(), s.vec3());
        expect_eq(sym(&double(&p, &b)), third(double(&sym(&p), &b)))
    });
    rec.check("skew[(P x b)^T x b] = ((skew P) x b)^T x b", n, s, |s| {
        let (p, b) = (s.mat3(), s.vec3());
        expect_eq(skew(&double(&p, &b)), double(&skew(&p), &b))
    });
    rec.check("a(x)b = 0 <=> sym, dev, dev sym of it vanish", n, s, |s| {
        let a = if s.chance(0.25) { Vec3::zero() } else { s.vec3() };
        let b = if s.chance(0.25) { Vec3::zero() } else { s.vec3() };
        let t = dyad(&a, &b);
        let z = t.is_zero();
        expect(sym(&t).is_zero() == z, "sym")?;
        expect(dev(&t).is_zero() == z, "dev")?;
        let ds = dev(&sym(&t));
        expect(ds.is_zero() == z, "dev sym")?;
        // ½|b|⁴|a⊗b|² = |b|⁴|dev sym(a⊗b)|² - ⅜ <b, dev sym(a⊗b) b>²
        let b4 = b.norm_sq() * b.norm_sq();
        let q = b.dot(&ds.mul_vec(&b));
        expect_eq(
            Rational::from_ratio(1, 2) * b4.clone() * t.norm_sq(),
            b4 * ds.norm_sq() - Rational::from_ratio(3, 8) * q.clone() * q,
        )
    });
    rec.check("dev(P x b) = 0 <=> P x b = 0", n, s, |s| {
        let b = s.nonzero_vec3();
        // half of the instances lie in the kernel P = c (x) b
        let p = if s.chance(0.5) { dyad(&s.vec3(), &b) } else { s.mat3() };
        let zero = cross_zero_equivalence(&p, &b).map_err(|e| e.to_string())?;
        expect_eq(zero, cb(&p, &b).is_zero())
    });
}

fn nye_group(rec: &mut Recorder<'_>, s: &mut Sampler, opts: &SuiteOptions) {
    let (n, d) = (opts.field_cases, opts.max_degree);
    let fault = opts.inject_fault;
    rec.check("Nye: Curl A = tr(D axl A) id - (D axl A)^T", n, s, |s| {
        let a = s.poly_vec(d);
        expect_eq(curl_mat(&anti_field(&a)), nye_forward(&a))
    });
    rec.check("Nye: D axl A = tr(Curl A)/2 id - (Curl A)^T", n, s, |s| {
        let a = s.poly_vec(d);
        let expected = if fault { -jac(&a) } else { jac(&a) };
        let got = nye_inverse(&curl_mat(&anti_field(&a))).map_err(|e| e.to_string())?;
        expect_eq(got, expected)
    });
}

/// `P × (-∇)` assembled with the Levi-Civita symbol, independent of [`curl_mat`].
fn curl_levi_civita(p: &PolyMat3) -> PolyMat3 {
    let eps = |i: usize, j: usize, k: usize| -> i64 {
        match (i, j, k) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
            _ => 0,
        }
    };
    Mat3::from_fn(|i, j| {
        let mut acc = Poly::zero();
        for k in 0..3 {
            for l in 0..3 {
                let e = eps(k, j, l);
                if e != 0 {
                    acc = acc + p[(i, k)].derivative(l).scale(&Rational::from_int(e));
                }
            }
        }
        acc
    })
}

fn curl_grad_group(rec: &mut Recorder<'_>, s: &mut Sampler, opts: &SuiteOptions) {
    let n = opts.field_cases;
    rec.check("Curl P = P x (-grad), Levi-Civita form", n, s, |s| {
        let p = s.poly_mat(opts.max_degree);
        expect_eq(curl_mat(&p), curl_levi_civita(&p))
    });
    rec.check("Curl D u = 0", n, s, |s| {
        let u = s.poly_vec(opts.max_degree_compatible);
        expect(curl_mat(&jac(&u)).is_zero(), "Curl D u != 0")
    });
    rec.check("Curl(zeta id) = -Anti(grad zeta)", n, s, |s| {
        let z = s.poly(opts.max_degree);
        expect_eq(curl_mat(&scalar_id(&z)), -anti_field(&grad(&z)))
    });
    rec.check("tr(Curl S) = 0", n, s, |s| {
        let m = s.poly_sym(opts.max_degree);
        expect(curl_mat(&m).trace().is_zero(), "tr Curl S != 0")
    });
    rec.check("dev Curl P = Curl P - 2/3 div(axl skew P) id", n, s, |s| {
        let p = s.poly_mat(opts.max_degree);
        let a = axial_of_skew_part(&p);
        expect_eq(dev(&curl_mat(&p)), curl_mat(&p) - scalar_id(&div(&a).scale(&Rational::from_ratio(2, 3))))
    });
}

fn inc_group(rec: &mut Recorder<'_>, s: &mut Sampler, opts: &SuiteOptions) {
    let (n, d) = (opts.field_cases, opts.max_degree);
    rec.check("inc(zeta id) = lap(zeta) id - D^2 zeta, symmetric", n, s, |s| {
        let z = s.poly(d);
        let got = inc(&scalar_id(&z));
        expect(got.is_symmetric(), "not symmetric")?;
        expect_eq(got, scalar_id(&laplacian(&z)) - hessian(&z))
    });
    rec.check("inc A = -Anti(grad tr(D axl A)), skew", n, s, |s| {
        let a = s.poly_vec(d);
        let got = inc(&anti_field(&a));
        expect(got.is_skew(), "not skew")?;
        expect_eq(got, -anti_field(&grad(&jac(&a).trace())))
    });
    rec.check("inc S symmetric", n, s, |s| {
        let m = s.poly_sym(d);
        expect(inc(&m).is_symmetric(), "inc S not symmetric")
    });
    rec.check("sym inc P = inc sym P", n, s, |s| {
        let p = s.poly_mat(d);
        expect_eq(sym(&inc(&p)), inc(&sym(&p)))
    });
    rec.check("skew inc P = inc skew P", n, s, |s| {
        let p = s.poly_mat(d);
        expect_eq(skew(&inc(&p)), inc(&skew(&p)))
    });
}

fn decomposition_group(rec: &mut Recorder<'_>, s: &mut Sampler, opts: &SuiteOptions) {
    rec.check("|dev sym Du|^2 = |sym Du|^2 - (div u)^2/3", opts.field_cases, s, |s| {
        let u = s.poly_vec(opts.max_degree);
        let e = sym(&jac(&u));
        let dv = div(&u);
        expect_eq(dev(&e).norm_sq(), e.norm_sq() - (dv.clone() * dv).scale(&Rational::from_ratio(1, 3)))
    });
}

fn kroener_group(rec: &mut Recorder<'_>, s: &mut Sampler, opts: &SuiteOptions) {
    rec.check("Kroener: inc(sym e) = -Curl kappa", opts.field_cases, s, |s| {
        let u = s.poly_vec(opts.max_degree);
        let p = s.poly_mat(opts.max_degree);
        kroener_check(&u, &p).map_err(|e| e.to_string())
    });
}

fn saint_venant_group(rec: &mut Recorder<'_>, s: &mut Sampler, opts: &SuiteOptions) {
    rec.check("inc(sym D u) = 0", opts.field_cases, s, |s| {
        let u = s.poly_vec(opts.max_degree);
        expect(inc(&sym(&jac(&u))).is_zero(), "inc sym D u != 0")
    });
}

fn reconstruction_group(rec: &mut Recorder<'_>, s: &mut Sampler, opts: &SuiteOptions) {
    let (n, d) = (opts.reconstruction_cases, opts.max_degree);
    rec.check("grad tr(D axl A) from D dev Curl A", n, s, |s| {
        let a = s.poly_vec(d);
        let got = reconstruct_grad_tr(&anti_field(&a)).map_err(|e| e.to_string())?;
        expect_eq(got, grad(&jac(&a).trace()))
    });
    rec.check("D^2 axl A from D dev Curl A", n, s, |s| {
        let a = s.poly_vec(d);
        let got = reconstruct_d2_axial(&anti_field(&a)).map_err(|e| e.to_string())?;
        expect_eq(got, PolyTensor3::second_derivatives(&a))
    });
    rec.check("D^2 zeta from D dev Curl(A + zeta id)", n, s, |s| {
        let (a, z) = (s.poly_vec(d), s.poly(d));
        let got = reconstruct_hessian_zeta(&anti_field(&a), &z).map_err(|e| e.to_string())?;
        expect_eq(got, hessian(&z))
    });
    rec.check("D^2 tr(D axl A) from D^2 dev Curl(A + zeta id)", n, s, |s| {
        let (a, z) = (s.poly_vec(d), s.poly(d));
        let got = reconstruct_d2_tr(&anti_field(&a), &z).map_err(|e| e.to_string())?;
        expect_eq(got, hessian(&jac(&a).trace()))
    });
}

fn kernels_group(rec: &mut Recorder<'_>, s: &mut Sampler) {
    let cube = Aabb::unit_cube();
    for family in KernelFamily::ALL {
        let name = match family {
            KernelFamily::DevSymCurl => "kernel (dev sym, Curl): annihilated, Gram rank 7",
            KernelFamily::SymDevCurl => "kernel (sym, dev Curl): annihilated, Gram rank 4",
            KernelFamily::DevSymDevCurl => "kernel (dev sym, dev Curl): annihilated, Gram rank 8",
            KernelFamily::SymCurl => "kernel (sym, Curl): annihilated, Gram rank 3",
        };
        rec.check(name, 1, s, |s| {
            let basis = family.basis();
            let rank = rational_rank(&gram_matrix(&basis, &cube));
            expect_eq(rank, family.dimension())?;
            // random members of the span, not just basis vectors
            for _ in 0..20 {
                let t = basis
                    .iter()
                    .fold(PolyMat3::zero(), |acc, b| acc + b.scale(&Poly::constant(s.rational())));
                expect(family.defects(&t).iter().all(Mat3::is_zero), "defect nonzero")?;
            }
            Ok(())
        });
    }
    rec.check("conformal Killing fields: dev sym D phi = 0", 200, s, |s| {
        let phi = pf::conformal_killing(&s.vec3(), &s.vec3(), &s.vec3(), &s.rational());
        expect(dev(&sym(&jac(&phi))).is_zero(), "dev sym D phi != 0")
    });
}

fn planar_group(rec: &mut Recorder<'_>, s: &mut Sampler) {
    rec.check("dev2 sym D (Re z^k, Im z^k) = 0, k = 1..6", 6, s, {
        let mut k = 0;
        move |_| {
            k += 1;
            expect(planar_cauchy_riemann(&holomorphic_power(k)).is_zero(), "not conformal")
        }
    });
    rec.check("perturbed holomorphic pair is not conformal", 6, s, {
        let mut k = 0;
        move |s| {
            k += 1;
            let mut u = holomorphic_power(k);
            // conj-like perturbation c·x1·x2² in the first component breaks Cauchy–Riemann
            u[0] = u[0].clone() + Poly::monomial([1, 2, 0], s.nonzero_rational());
            expect(!planar_cauchy_riemann(&u).is_zero(), "perturbation vanished")
        }
    });
}

fn devcurl_group(rec: &mut Recorder<'_>, s: &mut Sampler, opts: &SuiteOptions) {
    rec.check("Curl P from dev Curl P and axl skew P", opts.field_cases, s, |s| {
        let p = s.poly_mat(opts.max_degree);
        let got = pf::devcurl_to_curl(&p).map_err(|e| e.to_string())?;
        expect_eq(got, curl_mat(&p))
    });
}
