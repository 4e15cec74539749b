//! Exact moments, generating functions and the smoothed model.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::enumerate::{CostProfile, InputSet};
use crate::algorithm::Algorithm;
use crate::cost::DigitCost;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

mod rational_str {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom(format!("bad rational '{s}'")))
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&r.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
            Vec::<String>::deserialize(d)?
                .into_iter()
                .map(|s| s.parse().map_err(|_| D::Error::custom(format!("bad rational '{s}'"))))
                .collect()
        }
    }
}

/// Exact statistics of a total cost over an input set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub schema_version: u32,
    pub algo: Algorithm,
    pub cost: String,
    #[serde(rename = "N")]
    pub n: u64,
    pub reduced: bool,
    pub count: u64,
    #[serde(with = "rational_str")]
    pub span: BigRational,
    /// Raw moments `E[C^k]`, `k = 1..=k_max`.
    #[serde(with = "rational_str::vec")]
    pub moments: Vec<BigRational>,
    /// `j -> #{inputs with C = j·span}`; zero bins omitted.
    pub histogram: BTreeMap<u64, u64>,
}

impl EnsembleSummary {
    pub fn input_set(&self) -> InputSet {
        InputSet::new(self.algo, self.n, self.reduced)
    }

    pub fn span_f64(&self) -> f64 {
        self.span.to_f64().unwrap_or(f64::NAN)
    }

    pub fn mean(&self) -> f64 {
        self.moments.first().and_then(|m| m.to_f64()).unwrap_or(f64::NAN)
    }

    /// Exact variance `E[C²] − E[C]²`.
    pub fn variance_exact(&self) -> Option<BigRational> {
        let m1 = self.moments.first()?;
        let m2 = self.moments.get(1)?;
        Some(m2 - m1 * m1)
    }

    pub fn variance(&self) -> f64 {
        self.variance_exact().and_then(|v| v.to_f64()).unwrap_or(f64::NAN)
    }

    /// `Φ_w(N) = Σ_j hist[j]·exp(w·j·L)`.
    pub fn phi(&self, w: Complex64) -> Complex64 {
        let l = self.span_f64();
        self.histogram.iter().map(|(&j, &c)| (w * (j as f64 * l)).exp() * c as f64).sum()
    }

    /// `E_N[exp(wC)] = Φ_w / Φ_0`.
    pub fn mgf(&self, w: Complex64) -> Complex64 {
        self.phi(w) / self.count as f64
    }

    /// Structural invariants that every summary satisfies.
    pub fn check_invariants(&self) -> Result<()> {
        let total: u64 = self.histogram.values().sum();
        if total != self.count {
            return Err(Error::Inconsistency(format!("histogram sums to {total}, count {}", self.count)));
        }
        if self.count > 0 {
            let sum: BigRational = self
                .histogram
                .iter()
                .map(|(&j, &c)| BigRational::from_integer(BigInt::from(j) * BigInt::from(c)) * &self.span)
                .sum();
            if &self.moments[0] * BigRational::from_integer(BigInt::from(self.count)) != sum {
                return Err(Error::Inconsistency("first moment disagrees with histogram".into()));
            }
        }
        Ok(())
    }
}

/// Exact summary of `set` read off a profile.
pub fn summarize_profile(profile: &CostProfile, set: &InputSet, k_max: usize) -> Result<EnsembleSummary> {
    if k_max < 2 {
        return Err(Error::Config("k_max must be at least 2".into()));
    }
    let hist = profile.histogram(set)?;
    let count: u64 = hist.iter().sum();
    let mut power_sums = vec![BigInt::zero(); k_max];
    for (j, &c) in hist.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mut jp = BigInt::from(c);
        for s in power_sums.iter_mut() {
            jp *= j;
            *s += &jp;
        }
    }
    let moments = power_sums
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            if count == 0 {
                BigRational::zero()
            } else {
                let lk = num_traits::pow(profile.span.clone(), k + 1);
                BigRational::new(s, BigInt::from(count)) * lk
            }
        })
        .collect();
    let histogram = hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(j, &c)| (j as u64, c))
        .collect();
    Ok(EnsembleSummary {
        schema_version: SCHEMA_VERSION,
        algo: set.algo,
        cost: profile.cost.clone(),
        n: set.n,
        reduced: set.reduced,
        count,
        span: profile.span.clone(),
        moments,
        histogram,
    })
}

/// Exhaustive summary of `set` under `cost`.
pub fn summarize(set: &InputSet, cost: &DigitCost, k_max: usize) -> Result<EnsembleSummary> {
    let profile = CostProfile::build(set.algo, cost, set.n)?;
    summarize_profile(&profile, set, k_max)
}

/// Evaluates `Σ_j c_j·exp(w·j·span)`.
pub fn eval_poly(coeffs: &[u64], span: f64, w: Complex64) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(j, &c)| (w * (j as f64 * span)).exp() * c as f64)
        .sum()
}

/// Evaluates a `u128` coefficient polynomial like [`eval_poly`].
pub fn eval_poly_wide(coeffs: &[u128], span: f64, w: Complex64) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(j, &c)| (w * (j as f64 * span)).exp() * c as f64)
        .sum()
}

/// `Φ_w(N)` as an exact polynomial in `z = exp(w·span)`.
pub fn phi_poly(profile: &CostProfile, set: &InputSet) -> Result<Vec<u64>> {
    profile.histogram(set)
}

pub fn phi(profile: &CostProfile, set: &InputSet, w: Complex64) -> Result<Complex64> {
    Ok(eval_poly(&phi_poly(profile, set)?, profile.span.to_f64().unwrap_or(f64::NAN), w))
}

fn add_into(acc: &mut Vec<u128>, c: &[u64], weight: u128) {
    if acc.len() < c.len() {
        acc.resize(c.len(), 0);
    }
    for (a, &x) in acc.iter_mut().zip(c) {
        *a += x as u128 * weight;
    }
}

fn trimmed(mut v: Vec<u128>) -> Vec<u128> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

/// Cesàro sum `Ψ_w(T) = Σ_{n<=T} c_n(w)·(T − n)` as an exact polynomial,
/// computed from the Dirichlet coefficients.
pub fn psi_poly(profile: &CostProfile, set: &InputSet, t: u64) -> Result<Vec<u128>> {
    let mut acc = Vec::new();
    // the n = T term carries weight zero
    for n in 1..t {
        let c = profile.dirichlet_coeff(set, n)?;
        add_into(&mut acc, &c, (t - n) as u128);
    }
    Ok(trimmed(acc))
}

/// `Σ_{Q<T} Φ_w(Q)`, the partial-sum form of the Cesàro sum.
pub fn psi_poly_from_phi(profile: &CostProfile, set: &InputSet, t: u64) -> Result<Vec<u128>> {
    let mut acc = Vec::new();
    for q in 1..t {
        add_into(&mut acc, &profile.histogram(&set.with_n(q))?, 1);
    }
    Ok(trimmed(acc))
}

pub fn psi(profile: &CostProfile, set: &InputSet, t: u64, w: Complex64) -> Result<Complex64> {
    Ok(eval_poly_wide(&psi_poly(profile, set, t)?, profile.span.to_f64().unwrap_or(f64::NAN), w))
}

/// Width `⌊N^{1−γ}⌋` of the smoothing window.
pub fn smoothing_window(n: u64, gamma: f64) -> Result<u64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Config(format!("gamma must be positive, got {gamma}")));
    }
    let w = (n as f64).powf(1.0 - gamma);
    // guard against powf landing just below an exact integer
    let w = (w * (1.0 + 1e-12)).floor() as u64;
    if w == 0 {
        return Err(Error::DegenerateWindow { n, gamma });
    }
    Ok(w)
}

/// Mass of each single pair, by exact denominator, under some distribution on pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct PairMeasure {
    /// `pairs[n]`: number of pairs with denominator `n`.
    pub pairs: Vec<u64>,
    /// `mass[n]`: probability of each one of those pairs.
    pub mass: Vec<f64>,
}

impl PairMeasure {
    pub fn total(&self) -> f64 {
        self.pairs.iter().zip(&self.mass).map(|(&c, &m)| c as f64 * m).sum()
    }
}

/// `½ Σ |p − q|` over all pairs.
pub fn total_variation(a: &PairMeasure, b: &PairMeasure) -> Result<f64> {
    let len = a.pairs.len().max(b.pairs.len());
    let mut s = 0.0;
    for n in 0..len {
        let ca = a.pairs.get(n).copied().unwrap_or(0);
        let cb = b.pairs.get(n).copied().unwrap_or(0);
        let (ma, mb) = (a.mass.get(n).copied().unwrap_or(0.0), b.mass.get(n).copied().unwrap_or(0.0));
        if ca != cb && ma != 0.0 && mb != 0.0 {
            return Err(Error::Config(format!("measures disagree on the support at denominator {n}")));
        }
        let c = ca.max(cb) as f64;
        s += c * (ma - mb).abs();
    }
    Ok(0.5 * s)
}

/// Uniform law on the pairs of `set`.
pub fn uniform_measure(profile: &CostProfile, set: &InputSet) -> Result<PairMeasure> {
    let pairs = profile.pairs_by_denominator(set)?;
    let total: u64 = pairs.iter().sum();
    let mass = pairs.iter().map(|&c| if c > 0 { 1.0 / total as f64 } else { 0.0 }).collect();
    Ok(PairMeasure { pairs, mass })
}

/// Smoothed model around `N`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothedSummary {
    pub schema_version: u32,
    pub algo: Algorithm,
    pub cost: String,
    #[serde(rename = "N")]
    pub n: u64,
    pub reduced: bool,
    pub gamma: f64,
    pub window: u64,
    /// Window values `Q` with nonempty `Ω_Q`; each carries mixture weight `1/len`.
    pub q_values: Vec<u64>,
    /// Mixture probability of cost index `j`.
    pub mixture: Vec<f64>,
    pub mixture_mean: f64,
    pub mixture_variance: f64,
    /// `Σ_{Q=N−W}^{N} Φ(Q)`, exact polynomial in `exp(w·span)`.
    pub barphi_numerator: Vec<u128>,
    pub span: f64,
}

impl SmoothedSummary {
    /// `Φ̄_w(N)`.
    pub fn barphi(&self, w: Complex64) -> Complex64 {
        eval_poly_wide(&self.barphi_numerator, self.span, w) / self.window as f64
    }
}

fn smoothing_weights(pairs: &[u64], n: u64, window: u64) -> (Vec<u64>, Vec<f64>) {
    let lo = n.saturating_sub(window);
    let mut omega = vec![0u64; n as usize + 1];
    for q in 1..=n as usize {
        omega[q] = omega[q - 1] + pairs[q];
    }
    let qs: Vec<u64> = (lo..=n).filter(|&q| omega[q as usize] > 0).collect();
    // mass[v] = (1/K) Σ_{Q in window, Q >= v} 1/|Ω_Q|
    let mut mass = vec![0.0; n as usize + 1];
    if !qs.is_empty() {
        let k = qs.len() as f64;
        let mut suffix = 0.0;
        let mut qi = qs.len();
        for v in (1..=n).rev() {
            while qi > 0 && qs[qi - 1] >= v {
                qi -= 1;
                suffix += 1.0 / omega[qs[qi] as usize] as f64;
            }
            mass[v as usize] = if pairs[v as usize] > 0 { suffix / k } else { 0.0 };
        }
    }
    (qs, mass)
}

/// Two-stage law: `Q` uniform over the window, then `(u, v)` uniform on `Ω_Q`.
pub fn smoothed_measure(profile: &CostProfile, set: &InputSet, gamma: f64) -> Result<PairMeasure> {
    let window = smoothing_window(set.n, gamma)?;
    let pairs = profile.pairs_by_denominator(set)?;
    let (_, mass) = smoothing_weights(&pairs, set.n, window);
    Ok(PairMeasure { pairs, mass })
}

pub fn smoothed(profile: &CostProfile, set: &InputSet, gamma: f64) -> Result<SmoothedSummary> {
    let window = smoothing_window(set.n, gamma)?;
    let n = set.n;
    let pairs = profile.pairs_by_denominator(set)?;
    let (q_values, mass) = smoothing_weights(&pairs, n, window);

    // Per reduced denominator v, the mass carried by all pairs built on it.
    let mut reduced_mass = vec![0.0; n as usize + 1];
    for v in 1..=n {
        reduced_mass[v as usize] = if set.reduced {
            mass[v as usize]
        } else {
            (1..=n / v).map(|k| mass[(k * v) as usize]).sum()
        };
    }
    let bins = profile.bins();
    let mut mixture = vec![0.0; bins];
    for (j, slot) in mixture.iter_mut().enumerate() {
        *slot = (1..=n).map(|v| profile.at(j, v) as f64 * reduced_mass[v as usize]).sum();
    }
    let span = profile.span.to_f64().unwrap_or(f64::NAN);
    let mixture_mean: f64 = mixture.iter().enumerate().map(|(j, p)| p * j as f64 * span).sum();
    let mixture_variance: f64 = mixture
        .iter()
        .enumerate()
        .map(|(j, p)| p * (j as f64 * span - mixture_mean).powi(2))
        .sum();

    let mut barphi_numerator = Vec::new();
    for q in n.saturating_sub(window)..=n {
        if q > 0 {
            add_into(&mut barphi_numerator, &profile.histogram(&set.with_n(q))?, 1);
        }
    }
    Ok(SmoothedSummary {
        schema_version: SCHEMA_VERSION,
        algo: set.algo,
        cost: profile.cost.clone(),
        n,
        reduced: set.reduced,
        gamma,
        window,
        q_values,
        mixture,
        mixture_mean,
        mixture_variance,
        barphi_numerator,
        span,
    })
}

/// Checks `W·Φ̄(N) = Ψ(N+1) − Ψ(N−W)` coefficientwise.
pub fn trans1_holds(profile: &CostProfile, s: &SmoothedSummary) -> Result<bool> {
    let set = InputSet::new(s.algo, s.n, s.reduced);
    let hi = psi_poly(profile, &set, s.n + 1)?;
    let lo = psi_poly(profile, &set, s.n.saturating_sub(s.window))?;
    let len = hi.len().max(lo.len()).max(s.barphi_numerator.len());
    Ok((0..len).all(|j| {
        let h = hi.get(j).copied().unwrap_or(0);
        let l = lo.get(j).copied().unwrap_or(0);
        h.checked_sub(l) == Some(s.barphi_numerator.get(j).copied().unwrap_or(0))
    }))
}
