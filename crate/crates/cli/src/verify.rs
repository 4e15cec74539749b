//! Verification suites behind `euclid verify`.

use clap::ValueEnum;
use euclid_dyn::ensemble::{
    growth_regression, gaussian_diagnostics, smoothed_measure, summarize_profile, total_variation, uni_check,
    uniform_measure, CostProfile, InputSet,
};
use euclid_dyn::identities::identity_checks;
use euclid_dyn::realdyn::{mu_hat_closed_form, real_clt_check_with, DEFAULT_SEED_BITS};
use euclid_dyn::spectral::{constants, invariant_density, lambda_fn, pressure_derivatives, FdSteps, OperatorConfig};
use euclid_dyn::stats::Check;
use euclid_dyn::{Algorithm, DigitCost, Result};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Spectral,
    Identities,
    Clt,
    Slopes,
    Smoothing,
    Uni,
    Real,
    All,
}

/// Inputs shared by the suites.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub algo: Algorithm,
    pub cost: String,
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub degree: usize,
    pub m_cap: u64,
    pub seed: u64,
    pub samples: usize,
}

impl VerifyConfig {
    fn operator(&self) -> OperatorConfig {
        OperatorConfig { degree: self.degree, m_cap: self.m_cap, ..Default::default() }
    }
}

pub fn run(cfg: &VerifyConfig, cost: &DigitCost) -> Result<Vec<Check>> {
    let mut rows = Vec::new();
    let all = cfg.suite == Suite::All;
    if all || cfg.suite == Suite::Spectral {
        rows.extend(spectral(cfg)?);
    }
    if all || cfg.suite == Suite::Identities {
        rows.extend(identity_checks(cfg.n.unwrap_or(300))?);
    }
    if all || cfg.suite == Suite::Clt {
        rows.extend(clt(cfg, cost)?);
    }
    if all || cfg.suite == Suite::Slopes {
        rows.extend(slopes(cfg, cost)?);
    }
    if all || cfg.suite == Suite::Smoothing {
        rows.extend(smoothing(cfg)?);
    }
    if all || cfg.suite == Suite::Uni {
        rows.extend(uni(cfg)?);
    }
    if all || cfg.suite == Suite::Real {
        rows.extend(real(cfg)?);
    }
    Ok(rows)
}

fn spectral(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let op = cfg.operator();
    let mut rows = Vec::new();
    for algo in Algorithm::ALL {
        let unit = DigitCost::unit();
        let tol = if algo == Algorithm::Standard { 1e-6 } else { 1e-4 };
        let d = pressure_derivatives(algo, &unit, &op, FdSteps::default())?;
        rows.push(Check::relative(&format!("{algo} entropy |Lambda'(1)|"), d.d_s.abs(), algo.entropy(), tol));

        let f = invariant_density(algo, &op)?;
        let b = algo.interval_end();
        let err = (0..100)
            .map(|k| {
                let x = b * k as f64 / 99.0;
                (f.eval(x) - algo.invariant_density(x)).abs()
            })
            .fold(0.0, f64::max);
        let tol = if algo == Algorithm::Standard { 1e-10 } else { 1e-8 };
        rows.push(Check::at_most(&format!("{algo} invariant density sup error"), err, tol));
        rows.push(Check::absolute(&format!("{algo} lambda(1,0)"), lambda_fn(algo, &unit, 1.0, 0.0, &op)?, 1.0, 1e-9));

        for m in 1..=5u64 {
            if !algo.digits_up_to(m).iter().any(|d| d.0 == m) {
                continue;
            }
            let cost = DigitCost::indicator(m);
            let dw = pressure_derivatives(algo, &cost, &op, FdSteps::default())?.d_w;
            let (target, tol) = if algo == Algorithm::Standard {
                let mf = m as f64;
                ((1.0 + 1.0 / (mf * (mf + 2.0))).log2(), 1e-6)
            } else {
                (mu_hat_closed_form(algo, &cost, cfg.m_cap)?.value, 1e-7)
            };
            rows.push(Check::absolute(&format!("{algo} digit frequency of {m}"), dw, target, tol));
        }
        let bits = constants(algo, &DigitCost::binary_length(), &op)?;
        for c in bits.checks {
            rows.push(Check { name: format!("{algo} bits: {}", c.name), ..c });
        }
    }
    Ok(rows)
}

fn clt(cfg: &VerifyConfig, cost: &DigitCost) -> Result<Vec<Check>> {
    let n_max = cfg.n.unwrap_or(100_000);
    let k = constants(cfg.algo, cost, &cfg.operator())?;
    let profile = CostProfile::build(cfg.algo, cost, n_max)?;
    let mut grid: Vec<u64> = [1_000, 10_000, 100_000].into_iter().filter(|&n| n < n_max).collect();
    grid.push(n_max);
    let mut rows = Vec::new();
    let mut prev = f64::INFINITY;
    for &n in &grid {
        let s = summarize_profile(&profile, &InputSet::reduced(cfg.algo, n), 2)?;
        let diag = gaussian_diagnostics(&s, k.mu_c, k.delta2_c.sqrt())?;
        let bound = 1.2 / (n as f64).ln().sqrt();
        rows.push(Check::at_most(&format!("{} KS at N = {n}", cfg.algo), diag.ks, bound));
        rows.push(Check::holds(&format!("{} KS non-increasing at N = {n}", cfg.algo), diag.ks <= prev));
        prev = diag.ks;
        if n == n_max {
            rows.push(Check::at_most(&format!("{} LLT sup error |x| <= 2 at N = {n}", cfg.algo), diag.llt_sup_error(2.0), 0.1));
        }
    }
    Ok(rows)
}

/// Powers of two from `2^lo` up to `n_max`.
fn dyadic_grid(lo: u32, n_max: u64) -> Vec<u64> {
    (lo..63).map(|k| 1u64 << k).take_while(|&n| n <= n_max).collect()
}

fn slopes(cfg: &VerifyConfig, cost: &DigitCost) -> Result<Vec<Check>> {
    let n_max = cfg.n.unwrap_or(1 << 17);
    let op = cfg.operator();
    let k = constants(cfg.algo, cost, &op)?;
    let profile = CostProfile::build(cfg.algo, cost, n_max)?;
    let mut mean = Vec::new();
    let mut var = Vec::new();
    for n in dyadic_grid(10, n_max) {
        let s = summarize_profile(&profile, &InputSet::reduced(cfg.algo, n), 2)?;
        mean.push((n, s.mean()));
        var.push((n, s.variance()));
    }
    let mut rows = vec![
        Check::relative(&format!("{} mean growth slope", cfg.algo), growth_regression(&mean)?.slope, k.mu_c, 0.02),
        Check::relative(&format!("{} variance growth slope", cfg.algo), growth_regression(&var)?.slope, k.delta2_c, 0.10),
    ];

    let nu = 0.05;
    let sigma = euclid_dyn::spectral::solve_sigma(cfg.algo, cost, nu, &op)?;
    let span = num_traits::ToPrimitive::to_f64(&profile.span).unwrap_or(f64::NAN);
    let mut pts = Vec::new();
    for n in dyadic_grid(12, n_max) {
        let h = profile.histogram(&InputSet::reduced(cfg.algo, n))?;
        let total: u64 = h.iter().sum();
        let weighted: f64 = h.iter().enumerate().map(|(j, &c)| c as f64 * (nu * span * j as f64).exp()).sum();
        pts.push((n, (weighted / total as f64).ln()));
    }
    rows.push(Check::relative(
        &format!("{} quasi-power exponent at nu = {nu}", cfg.algo),
        growth_regression(&pts)?.slope,
        2.0 * (sigma - 1.0),
        0.05,
    ));
    Ok(rows)
}

/// Bound on `TV·√N` across the smoothing grid.
pub const TV_CONSTANT: f64 = 5.0;

fn smoothing(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let grid = [100u64, 1_000, 10_000];
    let profile = CostProfile::build(cfg.algo, &DigitCost::unit(), *grid.last().unwrap())?;
    let mut rows = Vec::new();
    let mut prev = f64::INFINITY;
    for n in grid {
        let set = InputSet::reduced(cfg.algo, n);
        let tv = total_variation(&uniform_measure(&profile, &set)?, &smoothed_measure(&profile, &set, 0.5)?)?;
        rows.push(Check::holds(&format!("{} TV decreasing at N = {n}", cfg.algo), tv < prev));
        rows.push(Check::at_most(&format!("{} TV * sqrt(N) at N = {n}", cfg.algo), tv * (n as f64).sqrt(), TV_CONSTANT));
        prev = tv;
    }
    Ok(rows)
}

/// Allowed spread `max/min` of the UNI ratio across depths.
pub const UNI_SPREAD: f64 = 2.0;

fn uni(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let ratios: Vec<f64> = (2..=4u32).map(|n| uni_check(cfg.algo, n, 0.5, 30).map(|r| r.worst_ratio)).collect::<Result<_>>()?;
    let mut rows: Vec<Check> = ratios
        .iter()
        .zip(2..)
        .map(|(&r, n)| Check { name: format!("{} UNI ratio at n = {n}", cfg.algo), observed: r, target: r, tolerance: 0.0, pass: r.is_finite() })
        .collect();
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    rows.push(Check::at_most(&format!("{} UNI ratio spread max/min", cfg.algo), max / min, UNI_SPREAD));
    Ok(rows)
}

fn real(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let cost = DigitCost::indicator(1);
    let r = real_clt_check_with(Algorithm::Standard, &cost, 200, cfg.samples, cfg.seed, DEFAULT_SEED_BITS, &cfg.operator())?;
    let target = (4.0f64 / 3.0).log2();
    Ok(vec![
        Check::absolute("G real trajectories: mean rate of indicator(1)", r.mean_rate, target, 3.0 * r.mean_rate_se),
        Check::at_most("G real trajectories: KS of indicator(1)", r.ks.unwrap_or(f64::NAN), 0.05),
    ])
}
