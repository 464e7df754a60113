//! Sparse multivariate polynomials in `x1, x2, x3` with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{Rational, Scalar};

/// Exponents `(α₁, α₂, α₃)` of a monomial `x1^α₁ x2^α₂ x3^α₃`.
pub type Monomial = [u32; 3];

/// Polynomial in canonical form: zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

/// Closed axis-aligned box `[lo₁,hi₁]×[lo₂,hi₂]×[lo₃,hi₃]` with rational corners.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Aabb {
    pub lo: [Rational; 3],
    pub hi: [Rational; 3],
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyParseError {
    #[error("malformed term `{0}`")]
    Term(String),
    #[error("malformed coefficient `{0}`")]
    Coefficient(String),
}

impl Aabb {
    /// Panics if some `lo` is not strictly below its `hi`.
    pub fn new(lo: [Rational; 3], hi: [Rational; 3]) -> Self {
        assert!((0..3).all(|k| lo[k] < hi[k]), "box corners must satisfy lo < hi");
        Aabb { lo, hi }
    }

    pub fn from_ints(lo: [i64; 3], hi: [i64; 3]) -> Self {
        Aabb::new(lo.map(Rational::from_int), hi.map(Rational::from_int))
    }

    pub fn unit_cube() -> Self {
        Aabb::from_ints([0, 0, 0], [1, 1, 1])
    }

    pub fn contains(&self, p: &[Rational; 3]) -> bool {
        (0..3).all(|k| self.lo[k] <= p[k] && p[k] <= self.hi[k])
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Rational) -> Self {
        Poly::monomial([0, 0, 0], c)
    }

    /// The coordinate function `x_{k+1}` (zero-based `k`).
    pub fn var(k: usize) -> Self {
        let mut exp = [0; 3];
        exp[k] = 1;
        Poly::monomial(exp, Rational::one())
    }

    pub fn monomial(exp: Monomial, coeff: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        Poly { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: &Monomial) -> Rational {
        self.terms.get(exp).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    fn accumulate(&mut self, exp: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect(),
        }
    }

    /// Partial derivative `∂/∂x_{k+1}`.
    pub fn derivative(&self, k: usize) -> Poly {
        let mut out = Poly::zero();
        for (exp, c) in &self.terms {
            if exp[k] == 0 {
                continue;
            }
            let mut e = *exp;
            e[k] -= 1;
            out.accumulate(e, c * Rational::from_int(exp[k] as i64));
        }
        out
    }

    pub fn eval(&self, x: &[Rational; 3]) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, (exp, c)| {
            let mut t = c.clone();
            for k in 0..3 {
                t *= rational_pow(&x[k], exp[k]);
            }
            acc + t
        })
    }

    pub fn eval_f64(&self, x: &[f64; 3]) -> f64 {
        use crate::scalar::Field;
        self.terms
            .iter()
            .map(|(exp, c)| {
                c.to_f64() * (0..3).map(|k| x[k].powi(exp[k] as i32)).product::<f64>()
            })
            .sum()
    }

    /// Exact integral over an axis-aligned box, monomial by monomial.
    pub fn integrate(&self, b: &Aabb) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, (exp, c)| {
            let mut t = c.clone();
            for k in 0..3 {
                let p = exp[k] + 1;
                t *= (rational_pow(&b.hi[k], p) - rational_pow(&b.lo[k], p)) / Rational::from_int(p as i64);
            }
            acc + t
        })
    }
}

fn rational_pow(x: &Rational, e: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// `∫_box p dx`, exact.
pub fn box_integrate(p: &Poly, b: &Aabb) -> Rational {
    p.integrate(b)
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for (e, c) in rhs.terms {
            self.accumulate(e, c);
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        for (e, c) in rhs.terms {
            self.accumulate(e, -c);
        }
        self
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(mut self) -> Poly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        let mut out = Poly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.accumulate([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }
}

impl Zero for Poly {
    fn zero() -> Self {
        Poly::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::constant(Rational::one())
    }
}

impl Scalar for Poly {
    fn from_ratio(num: i64, den: i64) -> Self {
        Poly::constant(Rational::from_ratio(num, den))
    }

    fn is_negligible(&self) -> bool {
        self.terms.is_empty()
    }
}

impl From<Rational> for Poly {
    fn from(c: Rational) -> Self {
        Poly::constant(c)
    }
}

/// Textual form: `num/den * x1^a x2^b x3^c` terms joined by ` + `, or `0`.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (exp, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(
                f,
                "{}/{} * x1^{} x2^{} x3^{}",
                c.numer(),
                c.denom(),
                exp[0],
                exp[1],
                exp[2]
            )?;
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Poly {
    type Err = PolyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "0" {
            return Ok(Poly::zero());
        }
        let mut out = Poly::zero();
        for term in s.split(" + ") {
            let (coeff, mono) = term
                .split_once(" * ")
                .ok_or_else(|| PolyParseError::Term(term.to_string()))?;
            let c = parse_rational(coeff.trim())
                .ok_or_else(|| PolyParseError::Coefficient(coeff.to_string()))?;
            let mut exp = [0u32; 3];
            let mut seen = [false; 3];
            for factor in mono.split_whitespace() {
                let (var, power) = factor
                    .split_once('^')
                    .ok_or_else(|| PolyParseError::Term(term.to_string()))?;
                let k = match var {
                    "x1" => 0,
                    "x2" => 1,
                    "x3" => 2,
                    _ => return Err(PolyParseError::Term(term.to_string())),
                };
                if seen[k] {
                    return Err(PolyParseError::Term(term.to_string()));
                }
                seen[k] = true;
                exp[k] = power.parse().map_err(|_| PolyParseError::Term(term.to_string()))?;
            }
            out.accumulate(exp, c);
        }
        Ok(out)
    }
}

/// Parses `num/den`, a plain integer, or a finite decimal such as `0.125`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    use num_bigint::BigInt;
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int.trim_start().starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" { BigInt::zero() } else { int.parse().ok()? };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let f: BigInt = frac.parse().ok()?;
        let magnitude = Rational::new(int.magnitude().clone().into(), BigInt::one()) + Rational::new(f, scale);
        return Some(if negative { -magnitude } else { magnitude });
    }
    s.trim().parse::<BigInt>().ok().map(Rational::from_integer)
}
