//! Digit costs and additive total costs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use sha2::{Digest, Sha256};

use crate::algorithm::{Algorithm, Digit, Sign, Trajectory};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum CostKind {
    /// `c ≡ 1`: the total cost is the number of steps.
    Unit,
    /// Characteristic function of the quotient `m0` (sign ignored).
    Indicator(u64),
    /// Binary length `floor(log2 m) + 1` of the quotient.
    BinaryLength,
    /// Explicit values; a `None` sign matches both signs.
    Table(BTreeMap<(u64, Option<Sign>), BigRational>),
}

/// A nonnegative digit cost, optionally scaled by a positive rational.
#[derive(Clone, Debug, PartialEq)]
pub struct DigitCost {
    pub kind: CostKind,
    pub scale: BigRational,
}

/// Range `[lo, hi)` of quotients (all signs) carrying one cost value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostBlock {
    pub lo: u64,
    /// Exclusive upper end, `None` for an unbounded block.
    pub hi: Option<u64>,
    pub value: f64,
    /// True when `value` is an upper envelope rather than the exact cost.
    pub envelope: bool,
}

impl fmt::Display for DigitCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.descriptor())
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a nonnegative rational: '{s}'"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(n, d));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

fn rational_gcd(a: &BigRational, b: &BigRational) -> BigRational {
    let num = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
    BigRational::new(num, a.denom() * b.denom())
}

impl DigitCost {
    pub fn unit() -> Self {
        DigitCost { kind: CostKind::Unit, scale: BigRational::one() }
    }

    pub fn indicator(m0: u64) -> Self {
        assert!(m0 >= 1, "indicator digit must be positive");
        DigitCost { kind: CostKind::Indicator(m0), scale: BigRational::one() }
    }

    pub fn binary_length() -> Self {
        DigitCost { kind: CostKind::BinaryLength, scale: BigRational::one() }
    }

    pub fn table(entries: BTreeMap<(u64, Option<Sign>), BigRational>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Parse("empty cost table".into()));
        }
        if entries.values().any(|v| v.is_negative()) {
            return Err(Error::Parse("cost values must be nonnegative".into()));
        }
        if entries.values().all(|v| v.is_zero()) {
            return Err(Error::Parse("cost table is identically zero".into()));
        }
        Ok(DigitCost { kind: CostKind::Table(entries), scale: BigRational::one() })
    }

    /// The same cost multiplied by a positive rational.
    pub fn scaled(mut self, factor: BigRational) -> Self {
        assert!(factor.is_positive(), "scale must be positive");
        self.scale *= factor;
        self
    }

    /// Parses `"m,value"` or `"m,eps,value"` lines; `#` starts a comment.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let err = |what: &str| Error::Parse(format!("line {}: {what}: '{raw}'", lineno + 1));
            let (m, eps, value) = match fields.as_slice() {
                [m, v] => (m, None, v),
                [m, e, v] => {
                    let e: i8 = e.trim_start_matches('+').parse().map_err(|_| err("bad sign"))?;
                    (m, Some(Sign::from_i8(e).map_err(|_| err("bad sign"))?), v)
                }
                _ => return Err(err("expected 2 or 3 comma-separated fields")),
            };
            let m: u64 = m.parse().map_err(|_| err("bad quotient"))?;
            if m == 0 {
                return Err(err("quotient must be positive"));
            }
            let value = parse_rational(value)?;
            if entries.insert((m, eps), value).is_some() {
                return Err(err("duplicate entry"));
            }
        }
        DigitCost::table(entries)
    }

    pub fn load_table(path: &Path) -> Result<Self> {
        DigitCost::parse_table(&std::fs::read_to_string(path)?)
    }

    /// Parses the CLI grammar `unit | indicator:m | bits` (tables need a file).
    pub fn parse_spec(spec: &str) -> Result<Self> {
        match spec {
            "unit" => Ok(DigitCost::unit()),
            "bits" | "binary_length" => Ok(DigitCost::binary_length()),
            _ => {
                if let Some(m) = spec.strip_prefix("indicator:") {
                    let m: u64 = m
                        .parse()
                        .ok()
                        .filter(|&m| m >= 1)
                        .ok_or_else(|| Error::Parse(format!("bad indicator digit in '{spec}'")))?;
                    Ok(DigitCost::indicator(m))
                } else if let Some(path) = spec.strip_prefix("table:") {
                    DigitCost::load_table(Path::new(path))
                } else {
                    Err(Error::Parse(format!(
                        "unknown cost '{spec}' (expected unit, indicator:m, bits or table:<path>)"
                    )))
                }
            }
        }
    }

    /// Stable identifier used in caches and reports.
    pub fn descriptor(&self) -> String {
        let base = match &self.kind {
            CostKind::Unit => "unit".to_string(),
            CostKind::Indicator(m) => format!("indicator:{m}"),
            CostKind::BinaryLength => "bits".to_string(),
            CostKind::Table(entries) => {
                let mut h = Sha256::new();
                for ((m, e), v) in entries {
                    h.update(format!("{m},{:?},{v};", e.map(Sign::to_i8)));
                }
                format!("table:{}", &hex::encode(h.finalize())[..16])
            }
        };
        if self.scale.is_one() {
            base
        } else {
            format!("{base}*{}", self.scale)
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, CostKind::Unit)
    }

    fn raw_value(&self, m: &BigUint, eps: Sign) -> Result<BigRational> {
        Ok(match &self.kind {
            CostKind::Unit => BigRational::one(),
            CostKind::Indicator(m0) => {
                if *m == BigUint::from(*m0) {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }
            CostKind::BinaryLength => BigRational::from_integer(BigInt::from(m.bits())),
            CostKind::Table(entries) => {
                let missing = || Error::MissingTableEntry { m: m.to_string(), eps: eps.to_i8() };
                let key = m.to_u64().ok_or_else(missing)?;
                entries
                    .get(&(key, Some(eps)))
                    .or_else(|| entries.get(&(key, None)))
                    .cloned()
                    .ok_or_else(missing)?
            }
        })
    }

    /// Exact cost of a digit.
    pub fn eval(&self, digit: &Digit) -> Result<BigRational> {
        Ok(self.raw_value(&digit.m, digit.eps)? * &self.scale)
    }

    pub fn eval_m(&self, m: u64, eps: Sign) -> Result<BigRational> {
        Ok(self.raw_value(&BigUint::from(m), eps)? * &self.scale)
    }

    pub fn eval_f64(&self, m: u64, eps: Sign) -> Result<f64> {
        Ok(self.eval_m(m, eps)?.to_f64().unwrap_or(f64::NAN))
    }

    /// Largest cost value that can occur past quotient `m_cap`.
    fn tail_envelope(&self) -> f64 {
        match &self.kind {
            CostKind::Table(entries) => {
                let max = entries.values().max().cloned().unwrap_or_else(BigRational::zero);
                (max * &self.scale).to_f64().unwrap_or(f64::NAN)
            }
            _ => unreachable!("envelope only used for tables"),
        }
    }

    /// Direct-summation cutoff actually usable: tables stop at their last entry.
    pub fn effective_cap(&self, m_cap: u64) -> u64 {
        match &self.kind {
            CostKind::Table(entries) => entries.keys().map(|k| k.0).max().map_or(m_cap, |t| t.min(m_cap)),
            _ => m_cap,
        }
    }

    /// Cost blocks covering every quotient `m > m_cap`.
    ///
    /// Exact for unit, indicator and binary-length costs. Tables only know a
    /// finite range, so past `m_cap` their largest value is used as an envelope.
    pub fn tail_blocks(&self, m_cap: u64) -> Vec<CostBlock> {
        let s = self.scale.to_f64().unwrap_or(f64::NAN);
        let start = m_cap + 1;
        match &self.kind {
            CostKind::Unit => vec![CostBlock { lo: start, hi: None, value: s, envelope: false }],
            CostKind::Indicator(m0) => {
                if *m0 <= m_cap {
                    vec![CostBlock { lo: start, hi: None, value: 0.0, envelope: false }]
                } else {
                    let mut out = Vec::new();
                    if *m0 > start {
                        out.push(CostBlock { lo: start, hi: Some(*m0), value: 0.0, envelope: false });
                    }
                    out.push(CostBlock { lo: *m0, hi: Some(m0 + 1), value: s, envelope: false });
                    out.push(CostBlock { lo: m0 + 1, hi: None, value: 0.0, envelope: false });
                    out
                }
            }
            CostKind::BinaryLength => {
                let mut out = Vec::new();
                let mut lo = start;
                loop {
                    let bits = 64 - lo.leading_zeros() as u64;
                    if bits >= 62 {
                        out.push(CostBlock { lo, hi: None, value: s * bits as f64, envelope: true });
                        break;
                    }
                    let hi = 1u64 << bits;
                    out.push(CostBlock { lo, hi: Some(hi), value: s * bits as f64, envelope: false });
                    lo = hi;
                }
                out
            }
            CostKind::Table(_) => {
                vec![CostBlock { lo: start, hi: None, value: self.tail_envelope(), envelope: true }]
            }
        }
    }

    /// Warns when tabulated values grow faster than `O(log m)`.
    pub fn moderate_growth_warning(&self) -> Option<String> {
        let CostKind::Table(entries) = &self.kind else {
            return None;
        };
        let ratio = |m: u64, v: &BigRational| v.to_f64().unwrap_or(0.0) / (1.0 + (m as f64).ln());
        let max_m = entries.keys().map(|k| k.0).max()?;
        let head = entries
            .iter()
            .filter(|((m, _), _)| *m <= (max_m / 8).max(4))
            .map(|((m, _), v)| ratio(*m, v))
            .fold(0.0, f64::max);
        let tail = entries
            .iter()
            .filter(|((m, _), _)| 2 * m >= max_m)
            .map(|((m, _), v)| ratio(*m, v))
            .fold(0.0, f64::max);
        (head > 0.0 && tail > 4.0 * head).then(|| {
            format!("table values grow faster than O(log m) (tail ratio {tail:.3} vs head {head:.3})")
        })
    }
}

/// Sum of the digit costs along a trajectory.
pub fn total_cost(cost: &DigitCost, traj: &Trajectory) -> Result<BigRational> {
    traj.digits.iter().try_fold(BigRational::zero(), |acc, d| Ok(acc + cost.eval(d)?))
}

/// Largest `L` such that every value on quotients `m <= m_max` is a multiple of `L`.
pub fn detect_span(cost: &DigitCost, m_max: u64) -> Option<BigRational> {
    let mut g: Option<BigRational> = None;
    for m in 1..=m_max {
        for eps in [Sign::Plus, Sign::Minus] {
            let Ok(v) = cost.eval_m(m, eps) else { continue };
            if v.is_zero() {
                continue;
            }
            g = Some(match g {
                None => v,
                Some(g) => rational_gcd(&g, &v),
            });
        }
    }
    g
}

/// Per-quotient lattice indices `c(m, eps) / L` for `m <= m_max`.
///
/// Index `[0][m]` is for `eps = +1`, `[1][m]` for `eps = -1`; entries for
/// inadmissible digits are `u32::MAX`.
pub fn lattice_indices(
    cost: &DigitCost,
    algo: Algorithm,
    m_max: u64,
    span: &BigRational,
) -> Result<[Vec<u32>; 2]> {
    let mut out = [vec![u32::MAX; m_max as usize + 1], vec![u32::MAX; m_max as usize + 1]];
    for m in 1..=m_max {
        for (slot, eps) in [Sign::Plus, Sign::Minus].into_iter().enumerate() {
            if !algo.admits(m, eps) {
                continue;
            }
            let j = cost.eval_m(m, eps)? / span;
            if !j.is_integer() {
                return Err(Error::Config(format!(
                    "cost of ({m},{:+}) is not a multiple of the span {span}",
                    eps.to_i8()
                )));
            }
            out[slot][m as usize] = j
                .to_integer()
                .to_u32()
                .ok_or_else(|| Error::Config("lattice index overflow".into()))?;
        }
    }
    Ok(out)
}
