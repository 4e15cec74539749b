//! Truncated trajectories of real inputs: Birkhoff sums, Monte-Carlo CLT
//! checks and closed-form invariant averages of digit costs.

use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithm::{divide, divide_raw, Algorithm, Sign};
use crate::cost::DigitCost;
use crate::error::{Error, Result};
use crate::spectral::{FdSteps, OperatorConfig, SpectralOperator};
use crate::stats::ks_samples;

/// Default seed precision in bits.
pub const DEFAULT_SEED_BITS: u32 = 1024;

/// `C_n(x)` for rational `x ∈ I'`, with the number of steps actually taken.
pub fn birkhoff_sum(algo: Algorithm, cost: &DigitCost, x0: &BigRational, n: usize) -> Result<(BigRational, usize)> {
    if x0.numer() <= &BigInt::zero() {
        return Err(Error::Domain(format!("{x0} is not in I'")));
    }
    let mut u = x0.numer().to_biguint().expect("positive");
    let mut v = x0.denom().to_biguint().expect("positive");
    if !algo.accepts(&u, &v) {
        return Err(Error::Domain(format!("{x0} is not in I' for algorithm {algo}")));
    }
    let mut sum = BigRational::zero();
    let mut steps = 0;
    while steps < n && !u.is_zero() {
        let (d, r) = divide(algo, &u, &v)?;
        sum += cost.eval(&d)?;
        v = u;
        u = r;
        steps += 1;
    }
    Ok((sum, steps))
}

/// A random real standing in for a uniform draw from `I`, with its truncated costs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealSample {
    pub seed: BigRational,
    pub n: usize,
    pub costs: Vec<f64>,
}

impl RealSample {
    pub fn total(&self) -> f64 {
        self.costs.iter().sum()
    }
}

fn random_numerator(rng: &mut ChaCha8Rng, bits: u32) -> BigUint {
    let words = bits.div_ceil(32) as usize;
    let mut digits: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
    let extra = words as u32 * 32 - bits;
    if extra > 0 {
        if let Some(top) = digits.last_mut() {
            *top >>= extra;
        }
    }
    BigUint::new(digits)
}

/// Draws sample `index` of stream `rng_seed`: a rational `k/2^bits` uniform on
/// `I` whose trajectory survives `n` steps.
pub fn draw_sample(algo: Algorithm, cost: &DigitCost, n: usize, bits: u32, rng_seed: u64, index: u64) -> Result<RealSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(index);
    let den = BigUint::from(1u8) << bits as usize;
    // I = [0, 1/2] for the centered algorithm
    let num_bits = if algo == Algorithm::Centered { bits - 1 } else { bits };
    for _ in 0..1000 {
        let k = random_numerator(&mut rng, num_bits);
        if k.is_zero() {
            continue;
        }
        let g = k.gcd(&den);
        let (mut u, mut v) = (&k / &g, &den / &g);
        let seed = BigRational::new(BigInt::from(u.clone()), BigInt::from(v.clone()));
        let mut costs = Vec::with_capacity(n);
        while costs.len() < n && !u.is_zero() {
            let (m, eps, r) = divide_raw(algo, &u, &v)?;
            costs.push(cost_of(cost, &m, eps)?);
            v = u;
            u = r;
        }
        if costs.len() == n {
            return Ok(RealSample { seed, n, costs });
        }
    }
    Err(Error::Config(format!("seeds of {bits} bits cannot sustain {n} steps")))
}

fn cost_of(cost: &DigitCost, m: &BigUint, eps: Sign) -> Result<f64> {
    match m.to_u64() {
        Some(m) => cost.eval_f64(m, eps),
        None => Ok(cost.eval(&crate::algorithm::Digit { m: m.clone(), eps })?.to_f64().unwrap_or(f64::NAN)),
    }
}

/// Closed-form invariant average of a cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuHat {
    pub value: f64,
    /// Bound on the error from envelope-valued tail blocks.
    pub tail_bound: f64,
}

/// Points `x ∈ I` whose first digit is `(m, ε)`.
fn branch_interval(algo: Algorithm, m: u64, eps: Sign) -> (f64, f64) {
    let m = m as f64;
    let b = algo.interval_end();
    // x = 1/(m + εy), y ∈ [0, b]
    let (a, c) = match eps {
        Sign::Plus => (1.0 / (m + b), 1.0 / m),
        Sign::Minus => (1.0 / m, 1.0 / (m - b)),
    };
    (a.min(b), c.min(b))
}

/// Points whose first quotient lies in `[lo, hi)`, any sign.
fn block_interval(algo: Algorithm, lo: u64, hi: Option<u64>) -> (f64, f64) {
    let inv = |m: f64| if m.is_finite() { 1.0 / m } else { 0.0 };
    let hi = hi.map_or(f64::INFINITY, |h| h as f64);
    let lo = lo as f64;
    match algo {
        Algorithm::Standard => (inv(hi), 1.0 / lo),
        Algorithm::Centered => (inv(hi - 0.5), 1.0 / (lo - 0.5)),
        Algorithm::Odd => {
            let odd = |m: f64| if m % 2.0 == 0.0 { m + 1.0 } else { m };
            (inv(odd(hi) - 1.0), 1.0 / (odd(lo) - 1.0))
        }
    }
}

/// `μ̂(c) = Σ_q c(q) ∫_{I_q} f₁` from the closed-form densities.
pub fn mu_hat_closed_form(algo: Algorithm, cost: &DigitCost, m_cap: u64) -> Result<MuHat> {
    let m_cap = cost.effective_cap(m_cap);
    let mut value = 0.0;
    for (m, eps) in algo.digits_up_to(m_cap) {
        let c = cost.eval_f64(m, eps)?;
        if c != 0.0 {
            let (a, b) = branch_interval(algo, m, eps);
            value += c * algo.density_mass_between(a, b);
        }
    }
    let mut tail_bound = 0.0;
    for blk in cost.tail_blocks(m_cap) {
        if blk.value == 0.0 {
            continue;
        }
        let (a, b) = block_interval(algo, blk.lo, blk.hi);
        let mass = algo.density_mass_between(a, b);
        value += blk.value * mass;
        if blk.envelope {
            tail_bound += blk.value.abs() * mass;
        }
    }
    Ok(MuHat { value, tail_bound })
}

/// Outcome of a Monte-Carlo CLT run on real inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealCltReport {
    pub algo: Algorithm,
    pub cost: String,
    pub n: usize,
    pub samples: usize,
    pub rng_seed: u64,
    pub seed_bits: u32,
    pub mean_rate: f64,
    pub var_rate: f64,
    /// Standard error of `mean_rate`.
    pub mean_rate_se: f64,
    pub mu_hat: f64,
    pub delta_hat2: f64,
    /// KS distance of the standardized values to `N(0, 1)`; absent for degenerate costs.
    pub ks: Option<f64>,
    #[serde(skip)]
    pub totals: Vec<f64>,
}

impl RealCltReport {
    pub fn standardized(&self, c_n: f64) -> f64 {
        let n = self.n as f64;
        (c_n - self.mu_hat * n) / (self.delta_hat2 * n).sqrt()
    }

    /// Whether the sample mean rate lies within `k` standard errors of `μ̂`.
    pub fn mean_within(&self, k: f64) -> bool {
        (self.mean_rate - self.mu_hat).abs() <= k * self.mean_rate_se
    }
}

pub fn real_clt_check(algo: Algorithm, cost: &DigitCost, n: usize, samples: usize, rng_seed: u64) -> Result<RealCltReport> {
    real_clt_check_with(algo, cost, n, samples, rng_seed, DEFAULT_SEED_BITS, &OperatorConfig::default())
}

pub fn real_clt_check_with(
    algo: Algorithm,
    cost: &DigitCost,
    n: usize,
    samples: usize,
    rng_seed: u64,
    seed_bits: u32,
    cfg: &OperatorConfig,
) -> Result<RealCltReport> {
    if samples < 1000 {
        return Err(Error::Config(format!("need at least 1000 samples, got {samples}")));
    }
    if n == 0 || seed_bits < 8 {
        return Err(Error::Config("n must be positive and seeds at least 8 bits".into()));
    }
    let totals: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| draw_sample(algo, cost, n, seed_bits, rng_seed, i).map(|s| s.total()))
        .collect::<Result<_>>()?;
    let nf = n as f64;
    let k = samples as f64;
    let mean = totals.iter().sum::<f64>() / k;
    let var = totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (k - 1.0);

    let mu_hat = mu_hat_closed_form(algo, cost, cfg.m_cap)?.value;
    let (delta_hat2, ks) = if cost.is_constant() {
        (0.0, None)
    } else {
        let op = SpectralOperator::new(algo, cost.clone(), cfg.clone())?;
        let d = op.pressure_derivatives(FdSteps::default())?;
        if d.d_ww > 1e-12 {
            let z: Vec<f64> = totals.iter().map(|t| (t - mu_hat * nf) / (d.d_ww * nf).sqrt()).collect();
            (d.d_ww, Some(ks_samples(&z)))
        } else {
            // the cost never fires for this algorithm
            (d.d_ww.max(0.0), None)
        }
    };
    Ok(RealCltReport {
        algo,
        cost: cost.descriptor(),
        n,
        samples,
        rng_seed,
        seed_bits,
        mean_rate: mean / nf,
        var_rate: var / nf,
        mean_rate_se: (var / k).sqrt() / nf,
        mu_hat,
        delta_hat2,
        ks,
        totals,
    })
}

/// Writes `sample_index,Cn,standardized`.
pub fn write_samples_csv(report: &RealCltReport, mut out: impl Write) -> Result<()> {
    writeln!(out, "sample_index,Cn,standardized")?;
    for (i, c) in report.totals.iter().enumerate() {
        if report.ks.is_some() {
            writeln!(out, "{i},{c},{}", report.standardized(*c))?;
        } else {
            writeln!(out, "{i},{c},")?;
        }
    }
    Ok(())
}
