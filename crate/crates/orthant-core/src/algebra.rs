//! Exact rational arithmetic: polynomials and rational functions over Q.
//!
//! This is the substrate for the band-renewal algebra, where every identity
//! is checked with exact arithmetic and only the final root extraction drops
//! to floating point.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational number in canonical (reduced) form.
pub type Rational = num_rational::BigRational;

/// Convenience constructor for small rationals.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Nearest f64 image of a rational.
pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("rational out of f64 range")
}

/// Parse `"a/b"` or a plain integer into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    use std::str::FromStr;
    match text.split_once('/') {
        Some((n, d)) => {
            let den = BigInt::from_str(d.trim()).ok()?;
            if den.is_zero() {
                return None;
            }
            Some(Rational::new(BigInt::from_str(n.trim()).ok()?, den))
        }
        None => Some(Rational::from_integer(
            BigInt::from_str(text.trim()).ok()?,
        )),
    }
}

/// A univariate polynomial over Q, coefficients ascending by degree.
///
/// The zero polynomial stores an empty coefficient list; otherwise the
/// leading coefficient is nonzero.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly { coeffs: vec![c] }.trimmed()
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Poly {
            coeffs: vec![Rational::zero(), Rational::one()],
        }
    }

    pub fn new(coeffs: Vec<Rational>) -> Self {
        Poly { coeffs }.trimmed()
    }

    /// Build from integer coefficients, ascending by degree.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| rat(c, 1)).collect())
    }

    /// Build from integer coefficients, descending by degree (as printed).
    pub fn from_ints_desc(coeffs: &[i64]) -> Self {
        let mut asc: Vec<i64> = coeffs.to_vec();
        asc.reverse();
        Poly::from_ints(&asc)
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    /// Horner evaluation at an exact rational point.
    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Horner evaluation in f64, for root finding.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + rational_to_f64(c);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * rat(k as i64, 1))
                .collect(),
        )
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, rhs: &Poly) -> (Poly, Poly) {
        assert!(!rhs.is_zero(), "division by the zero polynomial");
        let mut rem = self.clone();
        let dlead = rhs.leading().unwrap().clone();
        let ddeg = rhs.degree().unwrap();
        let mut quo = vec![
            Rational::zero();
            self.coeffs.len().saturating_sub(rhs.coeffs.len()) + 1
        ];
        while let Some(rdeg) = rem.degree() {
            if rdeg < ddeg {
                break;
            }
            let factor = rem.leading().unwrap() / &dlead;
            let shift = rdeg - ddeg;
            quo[shift] = factor.clone();
            let mut sub = vec![Rational::zero(); shift];
            sub.extend(rhs.coeffs.iter().map(|c| c * &factor));
            rem = rem.sub(&Poly::new(sub));
        }
        (Poly::new(quo), rem)
    }

    /// Monic greatest common divisor by the Euclidean algorithm.
    pub fn gcd(&self, rhs: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = rhs.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Scale so the leading coefficient is 1 (zero stays zero).
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(l) => {
                let inv = Rational::one() / l;
                self.scale(&inv)
            }
        }
    }

    /// Substitute another polynomial for the variable.
    pub fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// Ratio to another polynomial when they differ by a nonzero scalar.
    pub fn scalar_ratio(&self, rhs: &Poly) -> Option<Rational> {
        if self.is_zero() || rhs.is_zero() || self.degree() != rhs.degree() {
            return None;
        }
        let c = self.leading().unwrap() / rhs.leading().unwrap();
        (self == &rhs.scale(&c)).then_some(c)
    }
}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    if k == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// A quotient of two polynomials; the denominator is never identically zero.
#[derive(Clone, PartialEq, Debug)]
pub struct RationalFn {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFn {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        RationalFn { num, den }
    }

    pub fn from_poly(p: Poly) -> Self {
        RationalFn::new(p, Poly::one())
    }

    pub fn constant(c: Rational) -> Self {
        RationalFn::from_poly(Poly::constant(c))
    }

    /// Cancel the polynomial gcd and normalize the denominator to be monic.
    pub fn reduced(&self) -> RationalFn {
        let g = self.num.gcd(&self.den);
        let (num, den) = if g.degree().unwrap_or(0) > 0 {
            (self.num.div_rem(&g).0, self.den.div_rem(&g).0)
        } else {
            (self.num.clone(), self.den.clone())
        };
        let lead = den.leading().expect("nonzero denominator").clone();
        let inv = Rational::one() / lead;
        RationalFn {
            num: num.scale(&inv),
            den: den.scale(&inv),
        }
    }

    /// Exact evaluation; `None` on a zero of the denominator.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(x) / d)
    }

    pub fn add(&self, rhs: &RationalFn) -> RationalFn {
        RationalFn::new(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
    }

    pub fn sub(&self, rhs: &RationalFn) -> RationalFn {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> RationalFn {
        RationalFn::new(self.num.neg(), self.den.clone())
    }

    pub fn mul(&self, rhs: &RationalFn) -> RationalFn {
        RationalFn::new(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }

    pub fn div(&self, rhs: &RationalFn) -> RationalFn {
        assert!(!rhs.num.is_zero(), "division by the zero function");
        RationalFn::new(self.num.mul(&rhs.den), self.den.mul(&rhs.num))
    }

    /// Structural equality of the reduced forms.
    pub fn equivalent(&self, rhs: &RationalFn) -> bool {
        // Cross-multiplied polynomial identity, no reduction needed.
        self.num.mul(&rhs.den) == rhs.num.mul(&self.den)
    }
}
