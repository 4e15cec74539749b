//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any failure.

use std::time::{Duration, Instant};

use euclid_dyn::ensemble::{
    gaussian_diagnostics, growth_regression, smoothed_measure, summarize_profile, total_variation, uni_check,
    uniform_measure, CostProfile, InputSet,
};
use euclid_dyn::identities::identity_checks;
use euclid_dyn::realdyn::real_clt_check;
use euclid_dyn::spectral::{
    constants, invariant_density, lambda_fn, pressure_derivatives, solve_sigma, ConstantsBundle, FdSteps,
    OperatorConfig,
};
use euclid_dyn::{Algorithm, DigitCost, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

struct Ctx {
    cfg: OperatorConfig,
    /// G, unit cost, every N up to 2^17.
    profile: CostProfile,
    g_unit: ConstantsBundle,
}

const N_MAX: u64 = 1 << 17;

fn entropy(ctx: &Ctx) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for algo in Algorithm::ALL {
        let t = Instant::now();
        let d = pressure_derivatives(algo, &DigitCost::unit(), &ctx.cfg, FdSteps::default())?;
        let elapsed = t.elapsed();
        let rel = (d.d_s.abs() - algo.entropy()).abs() / algo.entropy();
        let tol = if algo == Algorithm::Standard { 1e-6 } else { 1e-4 };
        pass &= rel <= tol && elapsed <= Duration::from_secs(60);
        parts.push(format!("{algo} rel {rel:.1e} (tol {tol:.0e}, {elapsed:.1?})"));
    }
    outcome(pass, parts.join("; "))
}

fn densities(ctx: &Ctx) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for algo in Algorithm::ALL {
        let f = invariant_density(algo, &ctx.cfg)?;
        let b = algo.interval_end();
        let err = (0..100)
            .map(|k| {
                let x = b * k as f64 / 99.0;
                (f.eval(x) - algo.invariant_density(x)).abs()
            })
            .fold(0.0, f64::max);
        let tol = if algo == Algorithm::Standard { 1e-10 } else { 1e-8 };
        pass &= err <= tol;
        parts.push(format!("{algo} sup err {err:.1e} (tol {tol:.0e})"));
    }
    outcome(pass, parts.join("; "))
}

fn lambda_one(ctx: &Ctx) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for algo in Algorithm::ALL {
        worst = worst.max((lambda_fn(algo, &DigitCost::unit(), 1.0, 0.0, &ctx.cfg)? - 1.0).abs());
    }
    outcome(worst <= 1e-9, format!("max |lambda(1,0) - 1| = {worst:.1e} (tol 1e-9)"))
}

fn digit_frequencies(ctx: &Ctx) -> Result<Outcome> {
    let mut g_err: f64 = 0.0;
    let mut ko_err: f64 = 0.0;
    for algo in Algorithm::ALL {
        for m in 1..=5u64 {
            let d = pressure_derivatives(algo, &DigitCost::indicator(m), &ctx.cfg, FdSteps::default())?;
            if algo == Algorithm::Standard {
                let mf = m as f64;
                g_err = g_err.max((d.d_w - (1.0 + 1.0 / (mf * (mf + 2.0))).log2()).abs());
            } else {
                ko_err = ko_err.max((d.d_w - d.mu_hat_closed_form).abs());
            }
        }
    }
    outcome(
        g_err <= 1e-6 && ko_err <= 1e-7,
        format!("G vs log2(1 + 1/(m(m+2))) {g_err:.1e} (tol 1e-6); K, O vs closed-form average {ko_err:.1e} (tol 1e-7)"),
    )
}

fn dyadic(lo: u32) -> Vec<u64> {
    (lo..=17).map(|k| 1u64 << k).collect()
}

fn growth_points(ctx: &Ctx) -> Result<(Vec<(u64, f64)>, Vec<(u64, f64)>)> {
    let mut mean = Vec::new();
    let mut var = Vec::new();
    for n in dyadic(10) {
        let s = summarize_profile(&ctx.profile, &InputSet::reduced(Algorithm::Standard, n), 2)?;
        mean.push((n, s.mean()));
        var.push((n, s.variance()));
    }
    Ok((mean, var))
}

fn mean_slope(ctx: &Ctx) -> Result<Outcome> {
    let slope = growth_regression(&growth_points(ctx)?.0)?.slope;
    let rel = (slope - ctx.g_unit.mu).abs() / ctx.g_unit.mu;
    outcome(rel <= 0.02, format!("slope {slope:.6} vs mu {:.6}, rel {rel:.1e} (tol 2e-2)", ctx.g_unit.mu))
}

fn variance_slope(ctx: &Ctx) -> Result<Outcome> {
    let slope = growth_regression(&growth_points(ctx)?.1)?.slope;
    let rel = (slope - ctx.g_unit.delta2).abs() / ctx.g_unit.delta2;
    outcome(rel <= 0.10, format!("slope {slope:.6} vs delta^2 {:.6}, rel {rel:.1e} (tol 1e-1)", ctx.g_unit.delta2))
}

fn clt(ctx: &Ctx) -> Result<Outcome> {
    let mut pass = true;
    let mut prev = f64::INFINITY;
    let mut parts = Vec::new();
    for n in [1_000u64, 10_000, 100_000] {
        let s = summarize_profile(&ctx.profile, &InputSet::reduced(Algorithm::Standard, n), 2)?;
        let ks = gaussian_diagnostics(&s, ctx.g_unit.mu_c, ctx.g_unit.delta2_c.sqrt())?.ks;
        let bound = 1.2 / (n as f64).ln().sqrt();
        pass &= ks <= bound && ks <= prev;
        prev = ks;
        parts.push(format!("N={n} ks {ks:.4} (bound {bound:.4})"));
    }
    outcome(pass, parts.join("; "))
}

fn llt(ctx: &Ctx) -> Result<Outcome> {
    let s = summarize_profile(&ctx.profile, &InputSet::reduced(Algorithm::Standard, 100_000), 2)?;
    let err = gaussian_diagnostics(&s, ctx.g_unit.mu_c, ctx.g_unit.delta2_c.sqrt())?.llt_sup_error(2.0);
    outcome(err <= 0.1, format!("sup over |x| <= 2 of |scaled prob - gauss| = {err:.4} (tol 0.1)"))
}

fn identities(_: &Ctx) -> Result<Outcome> {
    let t = Instant::now();
    let rows = identity_checks(300)?;
    let elapsed = t.elapsed();
    let failed: Vec<_> = rows.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    outcome(
        failed.is_empty() && elapsed <= Duration::from_secs(60),
        format!("{} identities, {} failing {:?}, {elapsed:.1?}", rows.len(), failed.len(), failed),
    )
}

/// Bound on `TV·√N` across the grid.
const TV_CONSTANT: f64 = 5.0;

fn smoothing_distance(ctx: &Ctx) -> Result<Outcome> {
    let mut pass = true;
    let mut prev = f64::INFINITY;
    let mut parts = Vec::new();
    for n in [100u64, 1_000, 10_000] {
        let set = InputSet::reduced(Algorithm::Standard, n);
        let tv = total_variation(&uniform_measure(&ctx.profile, &set)?, &smoothed_measure(&ctx.profile, &set, 0.5)?)?;
        let scaled = tv * (n as f64).sqrt();
        pass &= tv < prev && scaled <= TV_CONSTANT;
        prev = tv;
        parts.push(format!("N={n} tv {tv:.5} tv*sqrt(N) {scaled:.3}"));
    }
    outcome(pass, format!("{} (bound {TV_CONSTANT})", parts.join("; ")))
}

fn real_clt(_: &Ctx) -> Result<Outcome> {
    let r = real_clt_check(Algorithm::Standard, &DigitCost::indicator(1), 200, 10_000, 20240601)?;
    let target = (4.0f64 / 3.0).log2();
    let z = (r.mean_rate - target) / r.mean_rate_se;
    let ks = r.ks.unwrap_or(f64::NAN);
    outcome(
        z.abs() <= 3.0 && ks <= 0.05,
        format!("mean rate {:.5} vs {target:.5} ({z:+.2} s.e.); ks {ks:.4} (tol 0.05)", r.mean_rate),
    )
}

fn quasi_power(ctx: &Ctx) -> Result<Outcome> {
    let nu = 0.05;
    let sigma = solve_sigma(Algorithm::Standard, &DigitCost::unit(), nu, &ctx.cfg)?;
    let mut pts = Vec::new();
    for n in dyadic(12) {
        let h = ctx.profile.histogram(&InputSet::reduced(Algorithm::Standard, n))?;
        let count: u64 = h.iter().sum();
        let phi_nu: f64 = h.iter().enumerate().map(|(j, &c)| c as f64 * (nu * j as f64).exp()).sum();
        pts.push((n, (phi_nu / count as f64).ln()));
    }
    let slope = growth_regression(&pts)?.slope;
    let target = 2.0 * (sigma - 1.0);
    let rel = (slope - target).abs() / target;
    outcome(rel <= 0.05, format!("slope {slope:.6} vs 2(sigma(nu) - 1) {target:.6}, rel {rel:.1e} (tol 5e-2)"))
}

/// Allowed spread `max/min` of the worst ratio across depths.
const UNI_SPREAD: f64 = 2.0;

fn uni(_: &Ctx) -> Result<Outcome> {
    let mut ratios = Vec::new();
    for n in 2..=4 {
        ratios.push(uni_check(Algorithm::Standard, n, 0.5, 30)?.worst_ratio);
    }
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        max / min <= UNI_SPREAD,
        format!("ratios {ratios:.3?} at n = 2, 3, 4; max/min {:.3} (bound {UNI_SPREAD})", max / min),
    )
}

type Criterion = (&'static str, fn(&Ctx) -> Result<Outcome>);

fn main() {
    let t0 = Instant::now();
    let cfg = OperatorConfig::default();
    let ctx = Ctx {
        g_unit: constants(Algorithm::Standard, &DigitCost::unit(), &cfg).expect("constants for G, unit cost"),
        profile: CostProfile::build(Algorithm::Standard, &DigitCost::unit(), N_MAX).expect("profile"),
        cfg,
    };
    println!("shared setup: {:.1?}", t0.elapsed());

    let criteria: [Criterion; 13] = [
        ("entropy", entropy),
        ("invariant densities", densities),
        ("lambda(1,0) = 1", lambda_one),
        ("digit frequencies", digit_frequencies),
        ("mean growth slope", mean_slope),
        ("variance growth slope", variance_slope),
        ("CLT speed", clt),
        ("local limit", llt),
        ("exact identities", identities),
        ("smoothing distance", smoothing_distance),
        ("real-trajectory CLT", real_clt),
        ("quasi-power exponent", quasi_power),
        ("UNI ratio", uni),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match run(&ctx) {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!pass);
        println!(
            "criterion {:>2} {:<22} {}  {detail}  [{:.1?}]",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            t.elapsed()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
