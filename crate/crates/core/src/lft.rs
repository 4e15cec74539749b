//! Integer linear fractional transformations `x -> (ax + b)/(cx + d)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algorithm::{Algorithm, Digit, Sign};
use crate::error::{Error, Result};

/// An LFT stored in coprime form with a nonnegative denominator at 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lft {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl fmt::Display for Lft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}x + {})/({}x + {})", self.a, self.b, self.c, self.d)
    }
}

impl Lft {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>, d: impl Into<BigInt>) -> Self {
        Lft { a: a.into(), b: b.into(), c: c.into(), d: d.into() }.normalized()
    }

    pub fn identity() -> Self {
        Lft::new(1, 0, 0, 1)
    }

    /// Branch `x -> 1/(m + eps x)` with no digit-condition check.
    pub fn branch(m: &num_bigint::BigUint, eps: Sign) -> Self {
        Lft::new(0, 1, i64::from(eps.to_i8()), BigInt::from(m.clone()))
    }

    fn normalized(mut self) -> Self {
        let g = self.a.gcd(&self.b).gcd(&self.c).gcd(&self.d);
        if !g.is_zero() && !g.is_one() {
            self.a /= &g;
            self.b /= &g;
            self.c /= &g;
            self.d /= &g;
        }
        if self.d.is_negative() || (self.d.is_zero() && self.c.is_negative()) {
            self.a = -self.a;
            self.b = -self.b;
            self.c = -self.c;
            self.d = -self.d;
        }
        self
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Lft) -> Lft {
        Lft {
            a: &self.a * &other.a + &self.b * &other.c,
            b: &self.a * &other.b + &self.b * &other.d,
            c: &self.c * &other.a + &self.d * &other.c,
            d: &self.c * &other.b + &self.d * &other.d,
        }
        .normalized()
    }

    /// The mirror `(ax + c)/(bx + d)`.
    pub fn mirror(&self) -> Lft {
        Lft { a: self.a.clone(), b: self.c.clone(), c: self.b.clone(), d: self.d.clone() }.normalized()
    }

    /// `h(0)` as an unreduced pair `(b, d)`.
    pub fn at_zero(&self) -> (BigInt, BigInt) {
        (self.b.clone(), self.d.clone())
    }

    fn denom_at(&self, x: &BigRational) -> BigRational {
        BigRational::from_integer(self.c.clone()) * x + BigRational::from_integer(self.d.clone())
    }

    pub fn eval(&self, x: &BigRational) -> Result<BigRational> {
        let den = self.denom_at(x);
        if den.is_zero() {
            return Err(Error::Pole(x.to_string()));
        }
        let num = BigRational::from_integer(self.a.clone()) * x + BigRational::from_integer(self.b.clone());
        Ok(num / den)
    }

    /// `|h'(x)| = |det| / (cx + d)^2`.
    pub fn deriv_abs(&self, x: &BigRational) -> Result<BigRational> {
        let den = self.denom_at(x);
        if den.is_zero() {
            return Err(Error::Pole(x.to_string()));
        }
        Ok(BigRational::from_integer(self.det().abs()) / (&den * &den))
    }

    /// `D[h](x) = |cx + d|`.
    pub fn denom(&self, x: &BigRational) -> Result<BigRational> {
        let den = self.denom_at(x);
        if den.is_zero() {
            return Err(Error::Pole(x.to_string()));
        }
        Ok(den.abs())
    }

    pub fn coeffs_f64(&self) -> [f64; 4] {
        [&self.a, &self.b, &self.c, &self.d].map(|v| v.to_f64().unwrap_or(f64::NAN))
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let [a, b, c, d] = self.coeffs_f64();
        (a * x + b) / (c * x + d)
    }

    pub fn deriv_abs_f64(&self, x: f64) -> f64 {
        let [_, _, c, d] = self.coeffs_f64();
        let den = c * x + d;
        self.det().abs().to_f64().unwrap_or(f64::NAN) / (den * den)
    }

    /// `|h''(x)|`, using `h'' = -2c h' / (cx + d)`.
    pub fn second_deriv_abs_f64(&self, x: f64) -> f64 {
        let [_, _, c, d] = self.coeffs_f64();
        (2.0 * c / (c * x + d)).abs() * self.deriv_abs_f64(x)
    }
}

/// The inverse branch of a digit, checked against the generic condition.
pub fn digit_to_lft(algo: Algorithm, digit: &Digit) -> Result<Lft> {
    if !algo.admits_digit(digit) {
        return Err(Error::InvalidDigit { algo: algo.id(), m: digit.m.to_string(), eps: digit.eps.to_i8() });
    }
    Ok(Lft::branch(&digit.m, digit.eps))
}

/// `h_1 ∘ h_2 ∘ ... ∘ h_P` for a digit sequence.
pub fn compose_digits<'a>(digits: impl IntoIterator<Item = &'a Digit>) -> Lft {
    digits
        .into_iter()
        .fold(Lft::identity(), |acc, d| acc.compose(&Lft::branch(&d.m, d.eps)))
}

/// Exact `Δ(h, k) = inf_{x in [lo, hi]} |c1 d2 - c2 d1| / |(c1 x + d1)(c2 x + d2)|`.
///
/// The product in the denominator is a quadratic, so its maximum modulus on
/// the interval is attained at an endpoint or at the vertex.
pub fn lft_delta_exact(h: &Lft, k: &Lft, lo: &BigRational, hi: &BigRational) -> BigRational {
    let num = (&h.c * &k.d - &k.c * &h.d).abs();
    if num.is_zero() {
        return BigRational::zero();
    }
    let q = |x: &BigRational| -> BigRational {
        let f1 = BigRational::from_integer(h.c.clone()) * x + BigRational::from_integer(h.d.clone());
        let f2 = BigRational::from_integer(k.c.clone()) * x + BigRational::from_integer(k.d.clone());
        (f1 * f2).abs()
    };
    let mut best = q(lo).max(q(hi));
    let lead = &h.c * &k.c;
    if !lead.is_zero() {
        let vx = -BigRational::new(&h.c * &k.d + &k.c * &h.d, BigInt::from(2) * lead);
        if &vx > lo && &vx < hi {
            best = best.max(q(&vx));
        }
    }
    BigRational::from_integer(num) / best
}

pub fn lft_delta(h: &Lft, k: &Lft, lo: f64, hi: f64) -> f64 {
    let lo = BigRational::from_float(lo).expect("finite");
    let hi = BigRational::from_float(hi).expect("finite");
    lft_delta_exact(h, k, &lo, &hi).to_f64().unwrap_or(f64::NAN)
}
