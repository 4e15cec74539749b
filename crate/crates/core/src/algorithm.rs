//! The three Euclidean division systems and their digit algebra.
//!
//! Every system divides `v` by `u` as `v = m*u + eps*r` and is described by
//! the interval `I` its map `T` acts on, the open interval `I'` of admissible
//! inputs `u/v`, and two conditions on digits `(m, eps)`: the generic one
//! (all steps) and the final one (last step only).

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) const PHI: f64 = 1.618_033_988_749_895;

/// One of the three Euclidean algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    /// Standard division, quotient = integer part.
    #[serde(rename = "G")]
    Standard,
    /// Centered division, quotient = nearest integer.
    #[serde(rename = "K")]
    Centered,
    /// Odd division, quotient = nearest odd integer.
    #[serde(rename = "O")]
    Odd,
}

/// Sign of a division step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn to_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i8(e: i8) -> Result<Self> {
        match e {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::Parse(format!("sign must be +1 or -1, got {e}"))),
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.to_i8())
    }
}

/// A digit `(m, eps)` produced by one division `v = m*u + eps*r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Digit {
    pub m: BigUint,
    pub eps: Sign,
}

impl Digit {
    pub fn new(m: u64, eps: i8) -> Self {
        Digit {
            m: BigUint::from(m),
            eps: Sign::from_i8(eps).expect("eps must be +1 or -1"),
        }
    }

    /// The quotient as a machine integer when it fits.
    pub fn m_u64(&self) -> Option<u64> {
        self.m.to_u64()
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{:+})", self.m, self.eps.to_i8())
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "G" | "g" | "standard" => Ok(Algorithm::Standard),
            "K" | "k" | "centered" => Ok(Algorithm::Centered),
            "O" | "o" | "odd" => Ok(Algorithm::Odd),
            _ => Err(Error::Parse(format!("unknown algorithm '{s}' (expected G, K or O)"))),
        }
    }
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Standard, Algorithm::Centered, Algorithm::Odd];

    pub fn id(self) -> char {
        match self {
            Algorithm::Standard => 'G',
            Algorithm::Centered => 'K',
            Algorithm::Odd => 'O',
        }
    }

    /// Right endpoint `b` of `I = [0, b]`.
    pub fn interval_end(self) -> f64 {
        match self {
            Algorithm::Centered => 0.5,
            _ => 1.0,
        }
    }

    pub fn interval_end_exact(self) -> BigRational {
        match self {
            Algorithm::Centered => BigRational::new(BigInt::one(), BigInt::from(2)),
            _ => BigRational::one(),
        }
    }

    /// Contraction ratio of the map.
    pub fn contraction_ratio(self) -> f64 {
        match self {
            Algorithm::Centered => {
                let s = 2f64.sqrt() + 1.0;
                1.0 / (s * s)
            }
            _ => 1.0 / (PHI * PHI),
        }
    }

    /// Closed-form entropy `-Λ'(1)`.
    pub fn entropy(self) -> f64 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        match self {
            Algorithm::Standard => pi2 / (6.0 * std::f64::consts::LN_2),
            Algorithm::Centered => pi2 / (6.0 * PHI.ln()),
            Algorithm::Odd => pi2 / (9.0 * PHI.ln()),
        }
    }

    /// Mass of the unnormalized closed-form invariant density over `I`.
    fn density_mass(self) -> f64 {
        match self {
            Algorithm::Standard | Algorithm::Centered => 1.0,
            Algorithm::Odd => 3.0 * PHI.ln(),
        }
    }

    /// Closed-form invariant density, normalized to unit mass on `I`.
    pub fn invariant_density(self, x: f64) -> f64 {
        match self {
            Algorithm::Standard => 1.0 / (std::f64::consts::LN_2 * (1.0 + x)),
            Algorithm::Centered => (1.0 / (PHI + x) + 1.0 / (PHI * PHI - x)) / PHI.ln(),
            Algorithm::Odd => {
                (1.0 / (PHI - 1.0 + x) + 1.0 / (PHI * PHI - x)) / self.density_mass()
            }
        }
    }

    /// Antiderivative of the normalized invariant density.
    pub fn density_primitive(self, x: f64) -> f64 {
        match self {
            Algorithm::Standard => (1.0 + x).ln() / std::f64::consts::LN_2,
            Algorithm::Centered => ((PHI + x).ln() - (PHI * PHI - x).ln()) / PHI.ln(),
            Algorithm::Odd => {
                ((PHI - 1.0 + x).ln() - (PHI * PHI - x).ln()) / self.density_mass()
            }
        }
    }

    /// Invariant mass of the interval `[lo, hi]`.
    pub fn density_mass_between(self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        self.density_primitive(hi) - self.density_primitive(lo)
    }

    /// Whether `(m, eps)` satisfies the generic digit condition.
    pub fn admits(self, m: u64, eps: Sign) -> bool {
        match self {
            Algorithm::Standard => m >= 1 && eps == Sign::Plus,
            Algorithm::Centered => m >= 3 || (m == 2 && eps == Sign::Plus),
            Algorithm::Odd => m % 2 == 1 && (m >= 3 || eps == Sign::Plus),
        }
    }

    pub fn admits_digit(self, d: &Digit) -> bool {
        match d.m.to_u64() {
            Some(m) => self.admits(m, d.eps),
            // any huge quotient is >= 3
            None => match self {
                Algorithm::Standard => d.eps == Sign::Plus,
                Algorithm::Centered => true,
                Algorithm::Odd => d.m.is_odd(),
            },
        }
    }

    /// Whether `(m, eps)` may end an execution.
    pub fn admits_final(self, d: &Digit) -> bool {
        if !self.admits_digit(d) {
            return false;
        }
        match self {
            Algorithm::Standard => d.m >= BigUint::from(2u8),
            Algorithm::Centered | Algorithm::Odd => d.eps == Sign::Plus,
        }
    }

    /// Whether `u/v` lies in the open input interval `I'`.
    pub fn accepts<T: Integer + Clone>(self, u: &T, v: &T) -> bool {
        if u.is_zero() || v.is_zero() {
            return false;
        }
        match self {
            Algorithm::Standard => u < v,
            Algorithm::Centered => u.clone() + u.clone() <= *v,
            Algorithm::Odd => u <= v,
        }
    }

    /// All digits with quotient at most `m_max` admitted by the generic condition.
    pub fn digits_up_to(self, m_max: u64) -> Vec<(u64, Sign)> {
        let mut out = Vec::new();
        for m in 1..=m_max {
            for eps in [Sign::Plus, Sign::Minus] {
                if self.admits(m, eps) {
                    out.push((m, eps));
                }
            }
        }
        out
    }

    /// Sanity bound on the depth of any input with denominator `v`.
    pub fn depth_bound(self, v: f64) -> f64 {
        let k0 = 1.0 / (1.0 / self.contraction_ratio().sqrt()).ln();
        k0 * v.max(1.0).ln() + 2.0
    }
}

/// Raw division on any integer type: returns `(m, eps, r)`.
pub(crate) fn divide_raw<T: Integer + Clone>(algo: Algorithm, u: &T, v: &T) -> Result<(T, Sign, T)> {
    if u.is_zero() || v.is_zero() {
        return Err(Error::Domain("division with a zero operand".into()));
    }
    if !algo.accepts(u, v) {
        return Err(Error::Domain(format!("input outside I' for algorithm {algo}")));
    }
    let (q, r0) = v.div_rem(u);
    Ok(match algo {
        Algorithm::Standard => (q, Sign::Plus, r0),
        Algorithm::Centered => {
            // s in [-u/2, u/2)
            if r0.clone() + r0.clone() < *u {
                (q, Sign::Plus, r0)
            } else {
                (q + T::one(), Sign::Minus, u.clone() - r0)
            }
        }
        Algorithm::Odd => {
            // s in [-u, u) with m odd
            if q.is_odd() {
                (q, Sign::Plus, r0)
            } else {
                (q + T::one(), Sign::Minus, u.clone() - r0)
            }
        }
    })
}

/// One Euclidean division of `v` by `u`.
pub fn divide(algo: Algorithm, u: &BigUint, v: &BigUint) -> Result<(Digit, BigUint)> {
    let (m, eps, r) = divide_raw(algo, u, v)?;
    Ok((Digit { m, eps }, r))
}

/// Machine-integer division used on hot paths.
pub fn divide_u64(algo: Algorithm, u: u64, v: u64) -> Result<(u64, Sign, u64)> {
    divide_raw(algo, &u, &v)
}

/// The digit sequence of one execution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub algo: Algorithm,
    pub digits: Vec<Digit>,
}

impl Trajectory {
    pub fn new(algo: Algorithm, digits: Vec<Digit>) -> Self {
        Trajectory { algo, digits }
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    /// Checks the digit conditions: generic everywhere, final on the last digit.
    pub fn validate(&self) -> Result<()> {
        let n = self.digits.len();
        for (i, d) in self.digits.iter().enumerate() {
            let ok = if i + 1 == n {
                self.algo.admits_final(d)
            } else {
                self.algo.admits_digit(d)
            };
            if !ok {
                return Err(Error::InvalidDigit {
                    algo: self.algo.id(),
                    m: d.m.to_string(),
                    eps: d.eps.to_i8(),
                });
            }
        }
        Ok(())
    }
}

/// Runs the algorithm on `(u, v)` until the remainder vanishes.
pub fn decompose(algo: Algorithm, u: &BigUint, v: &BigUint) -> Result<Trajectory> {
    let mut digits = Vec::new();
    let (mut u, mut v) = (u.clone(), v.clone());
    loop {
        let (d, r) = divide(algo, &u, &v)?;
        digits.push(d);
        if r.is_zero() {
            break;
        }
        v = std::mem::replace(&mut u, r);
    }
    Ok(Trajectory { algo, digits })
}

pub fn decompose_u64(algo: Algorithm, u: u64, v: u64) -> Result<Trajectory> {
    decompose(algo, &BigUint::from(u), &BigUint::from(v))
}

/// Inverse of [`decompose`]: folds the digit branches and evaluates at 0.
pub fn reconstruct(traj: &Trajectory) -> (BigUint, BigUint) {
    let h = crate::lft::compose_digits(traj.digits.iter());
    let (num, den) = h.at_zero();
    (
        num.abs().to_biguint().expect("nonnegative"),
        den.abs().to_biguint().expect("nonnegative"),
    )
}

/// The interval map `T` on rationals of `I`.
pub fn map_step(algo: Algorithm, x: &BigRational) -> Result<BigRational> {
    if x.is_negative() || *x > algo.interval_end_exact() {
        return Err(Error::Domain(format!("{x} is outside I for algorithm {algo}")));
    }
    if x.is_zero() {
        return Ok(BigRational::zero());
    }
    let u = x.numer().to_biguint().expect("positive");
    let v = x.denom().to_biguint().expect("positive");
    if !algo.accepts(&u, &v) {
        // only x = 1 for the standard map: 1/1 - floor(1) = 0
        return Ok(BigRational::zero());
    }
    let (_, r) = divide(algo, &u, &v)?;
    Ok(BigRational::new(BigInt::from(r), BigInt::from(u)))
}
