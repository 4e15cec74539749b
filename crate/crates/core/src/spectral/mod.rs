//! Discretized transfer operators, their dominant eigenvalues and the
//! pressure-derived limit constants.

mod chebyshev;
mod eigen;
mod operator;
mod zeta;

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

pub use chebyshev::{clenshaw, FunctionModel};
pub use eigen::{power_iteration, EigenPair};
pub use operator::{assemble, check_convergence, OperatorConfig, OperatorMatrix};
pub use zeta::{hurwitz_family, hurwitz_zeta};

use crate::algorithm::Algorithm;
use crate::cost::DigitCost;
use crate::error::{Error, Result};
use crate::realdyn::mu_hat_closed_form;
use crate::stats::Check;
use operator::{assemble_weighted, Weighting};

/// Dominant eigenpair of `H_{σ,ν}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralModel {
    pub algo: Algorithm,
    pub cost: String,
    pub sigma: f64,
    pub nu: f64,
    pub lambda: f64,
    /// Eigenfunction with unit Lebesgue integral over `I`.
    pub eigenfunction: FunctionModel,
    /// Estimate of `|λ₂/λ₁|` from the power-iteration contraction.
    pub subdominant_gap_estimate: f64,
    pub residual: f64,
    pub tail_bound: f64,
}

/// Power iteration from the constant function on an assembled matrix.
pub fn dominant_eigen(matrix: &OperatorMatrix, cfg: &OperatorConfig) -> Result<(f64, FunctionModel, f64, f64)> {
    let pair = power_iteration(
        |v| matrix.apply(v),
        &matrix.quadrature,
        vec![1.0; matrix.dim],
        cfg.eig_tol,
        cfg.max_iter,
    )?;
    let b = matrix.algo.interval_end();
    Ok((pair.lambda, FunctionModel::from_values(b, pair.vector), pair.residual, pair.gap_ratio))
}

/// Eigen-solver for one `(algorithm, cost, config)` with memoized `λ(σ, ν)`.
pub struct SpectralOperator {
    pub algo: Algorithm,
    pub cost: DigitCost,
    pub cfg: OperatorConfig,
    memo: Mutex<HashMap<(u64, u64), f64>>,
}

impl SpectralOperator {
    pub fn new(algo: Algorithm, cost: DigitCost, cfg: OperatorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(SpectralOperator { algo, cost, cfg, memo: Mutex::new(HashMap::new()) })
    }

    pub fn model(&self, sigma: f64, nu: f64) -> Result<SpectralModel> {
        let h = assemble(self.algo, &self.cost, sigma, nu, &self.cfg)?;
        let (lambda, f, residual, gap) = dominant_eigen(&h, &self.cfg)?;
        if residual > 1e-10 {
            return Err(Error::NonConvergence { iterations: self.cfg.max_iter, residual });
        }
        if f.values.iter().any(|&v| v <= 0.0) {
            return Err(Error::Inconsistency(format!("eigenfunction not positive at (σ, ν) = ({sigma}, {nu})")));
        }
        self.memo.lock().unwrap().insert((sigma.to_bits(), nu.to_bits()), lambda);
        Ok(SpectralModel {
            algo: self.algo,
            cost: self.cost.descriptor(),
            sigma,
            nu,
            lambda,
            eigenfunction: f.normalized(),
            subdominant_gap_estimate: gap,
            residual,
            tail_bound: h.tail_bound,
        })
    }

    /// `λ(σ, ν)`.
    pub fn lambda(&self, sigma: f64, nu: f64) -> Result<f64> {
        if let Some(&l) = self.memo.lock().unwrap().get(&(sigma.to_bits(), nu.to_bits())) {
            return Ok(l);
        }
        Ok(self.model(sigma, nu)?.lambda)
    }

    /// Pressure `Λ(σ, ν) = log λ(σ, ν)`.
    pub fn pressure(&self, sigma: f64, nu: f64) -> Result<f64> {
        Ok(self.lambda(sigma, nu)?.ln())
    }

    /// `∂λ/∂ν` at `(1, 0)` from the cost-weighted operator applied to the invariant density.
    pub fn lambda_w_analytic(&self) -> Result<f64> {
        let m = self.model(1.0, 0.0)?;
        let hc = assemble_weighted(self.algo, &self.cost, 1.0, 0.0, &self.cfg, Weighting::CostExp)?;
        let hf = hc.apply(&m.eigenfunction.values);
        let num: f64 = hf.iter().zip(&hc.quadrature).map(|(a, w)| a * w).sum();
        Ok(num / m.eigenfunction.integral() / m.lambda)
    }
}

/// `λ(σ, ν)` for a one-off evaluation.
pub fn lambda_fn(algo: Algorithm, cost: &DigitCost, sigma: f64, nu: f64, cfg: &OperatorConfig) -> Result<f64> {
    SpectralOperator::new(algo, cost.clone(), cfg.clone())?.lambda(sigma, nu)
}

/// Normalized eigenfunction of `H_{1,0}`.
pub fn invariant_density(algo: Algorithm, cfg: &OperatorConfig) -> Result<FunctionModel> {
    Ok(SpectralOperator::new(algo, DigitCost::unit(), cfg.clone())?.model(1.0, 0.0)?.eigenfunction)
}

/// Finite-difference steps for first and second derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdSteps {
    pub first: f64,
    pub second: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        FdSteps { first: 1e-3, second: 1e-2 }
    }
}

/// Partial derivatives of `Λ = log λ` at `(1, 0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureDerivatives {
    pub lambda_at_1: f64,
    pub residual: f64,
    pub subdominant_gap_estimate: f64,
    /// `Λ'(1)`.
    pub d_s: f64,
    /// `Λ'_w(1, 0)`.
    pub d_w: f64,
    /// `Λ'_w(1, 0)` from the cost-weighted operator.
    pub d_w_analytic: f64,
    /// `Λ''(1)`.
    pub d_ss: f64,
    /// `Λ''_{w²}(1, 0)`.
    pub d_ww: f64,
    /// `Λ''_{sw}(1, 0)`.
    pub d_sw: f64,
    /// Closed-form invariant average of the cost and its tail bound.
    pub mu_hat_closed_form: f64,
    pub mu_hat_tail: f64,
}

fn richardson(d: impl Fn(f64) -> Result<f64>, h: f64) -> Result<f64> {
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Entropy tolerance of the closed-form cross-check.
fn entropy_tolerance(algo: Algorithm) -> f64 {
    match algo {
        Algorithm::Standard => 1e-6,
        _ => 1e-4,
    }
}

impl SpectralOperator {
    pub fn pressure_derivatives(&self, steps: FdSteps) -> Result<PressureDerivatives> {
        let center = self.model(1.0, 0.0)?;
        let p = |s: f64, w: f64| self.pressure(s, w);
        let p0 = center.lambda.ln();
        let d_s = richardson(|h| Ok((p(1.0 + h, 0.0)? - p(1.0 - h, 0.0)?) / (2.0 * h)), steps.first)?;
        let d_w = richardson(|h| Ok((p(1.0, h)? - p(1.0, -h)?) / (2.0 * h)), steps.first)?;
        let d_ss = richardson(|h| Ok((p(1.0 + h, 0.0)? - 2.0 * p0 + p(1.0 - h, 0.0)?) / (h * h)), steps.second)?;
        let d_ww = richardson(|h| Ok((p(1.0, h)? - 2.0 * p0 + p(1.0, -h)?) / (h * h)), steps.second)?;
        let d_sw = richardson(
            |h| Ok((p(1.0 + h, h)? - p(1.0 + h, -h)? - p(1.0 - h, h)? + p(1.0 - h, -h)?) / (4.0 * h * h)),
            steps.second,
        )?;
        let d_w_analytic = self.lambda_w_analytic()?;
        let mu_hat = mu_hat_closed_form(self.algo, &self.cost, self.cfg.m_cap)?;
        Ok(PressureDerivatives {
            lambda_at_1: center.lambda,
            residual: center.residual,
            subdominant_gap_estimate: center.subdominant_gap_estimate,
            d_s,
            d_w,
            d_w_analytic,
            d_ss,
            d_ww,
            d_sw,
            mu_hat_closed_form: mu_hat.value,
            mu_hat_tail: mu_hat.tail_bound,
        })
    }

    /// `σ(ν)` solving `λ(σ, ν) = 1`.
    pub fn solve_sigma(&self, nu: f64) -> Result<f64> {
        let g = |s: f64| -> Result<f64> { Ok(self.lambda(s, nu)? - 1.0) };
        let floor = 0.5 + 1e-3;
        let admissible = |s: f64| s > floor && check_convergence(&self.cost, s, nu).is_ok();
        let g1 = g(1.0)?;
        if g1 == 0.0 {
            return Ok(1.0);
        }
        // λ decreases in σ: walk away from 1 until the sign changes
        let (mut lo, mut hi, mut glo, mut ghi);
        let mut step = 0.05;
        if g1 > 0.0 {
            lo = 1.0;
            glo = g1;
            loop {
                hi = lo + step;
                ghi = g(hi)?;
                if ghi < 0.0 {
                    break;
                }
                lo = hi;
                glo = ghi;
                step *= 2.0;
                if hi > 20.0 {
                    return Err(Error::Bracketing(format!("no root above 1 for ν = {nu}")));
                }
            }
        } else {
            hi = 1.0;
            ghi = g1;
            loop {
                lo = hi - step;
                if !admissible(lo) {
                    lo = 0.5 * (hi + floor.max(hi - step));
                    if !admissible(lo) || hi - lo < 1e-6 {
                        return Err(Error::Bracketing(format!("no root below 1 for ν = {nu}")));
                    }
                }
                glo = g(lo)?;
                if glo > 0.0 {
                    break;
                }
                hi = lo;
                ghi = glo;
                step *= 2.0;
            }
        }
        // bisection down to a narrow bracket, then safeguarded secant
        while hi - lo > 1e-4 {
            let mid = 0.5 * (lo + hi);
            let gm = g(mid)?;
            if gm > 0.0 {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
                ghi = gm;
            }
        }
        let (mut a, mut fa, mut b, mut fb) = (lo, glo, hi, ghi);
        for _ in 0..60 {
            let mut c = b - fb * (b - a) / (fb - fa);
            if !(c > lo && c < hi) {
                c = 0.5 * (lo + hi);
            }
            let fc = g(c)?;
            if fc.abs() < 1e-15 || (c - b).abs() < 1e-15 {
                return Ok(c);
            }
            if fc > 0.0 {
                lo = c;
            } else {
                hi = c;
            }
            a = b;
            fa = fb;
            b = c;
            fb = fc;
        }
        Ok(b)
    }
}

pub fn pressure_derivatives(
    algo: Algorithm,
    cost: &DigitCost,
    cfg: &OperatorConfig,
    steps: FdSteps,
) -> Result<PressureDerivatives> {
    let op = SpectralOperator::new(algo, cost.clone(), cfg.clone())?;
    let d = op.pressure_derivatives(steps)?;
    cross_validate(algo, &d)?;
    Ok(d)
}

fn cross_validate(algo: Algorithm, d: &PressureDerivatives) -> Result<()> {
    let ent = algo.entropy();
    let rel = (d.d_s.abs() - ent).abs() / ent;
    if rel > entropy_tolerance(algo) {
        return Err(Error::Inconsistency(format!(
            "|Λ'(1)| = {} differs from the closed-form entropy {ent} (relative {rel:e})",
            d.d_s.abs()
        )));
    }
    let gap = (d.d_w - d.mu_hat_closed_form).abs();
    if gap > 1e-7 + d.mu_hat_tail {
        return Err(Error::Inconsistency(format!(
            "Λ'_w(1,0) = {} differs from the closed-form average {} by {gap:e}",
            d.d_w, d.mu_hat_closed_form
        )));
    }
    Ok(())
}

pub fn solve_sigma(algo: Algorithm, cost: &DigitCost, nu: f64, cfg: &OperatorConfig) -> Result<f64> {
    SpectralOperator::new(algo, cost.clone(), cfg.clone())?.solve_sigma(nu)
}

/// Limit constants of the Gaussian laws and their internal consistency checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsBundle {
    pub schema_version: u32,
    pub algo: Algorithm,
    pub cost: String,
    pub config: OperatorConfig,
    pub steps: FdSteps,
    pub derivatives: PressureDerivatives,
    /// `μ = 2/|Λ'(1)|`.
    pub mu: f64,
    /// `δ² = 2Λ''(1)/|Λ'(1)|³`.
    pub delta2: f64,
    /// `μ(c) = −2Λ'_w/Λ'`.
    pub mu_c: f64,
    /// `δ²(c)` from the pressure derivatives.
    pub delta2_c: f64,
    /// `δ²(c)` from `μ̂²δ² + μδ̂² + μ²μ̂χ` with the closed-form `μ̂`.
    pub delta2_c_decomposition: f64,
    /// `χ(c) = Λ''_{sw}(1, 0)`.
    pub chi_c: f64,
    /// Closed-form `μ̂(c)`.
    pub mu_hat: f64,
    /// `δ̂²(c) = Λ''_{w²}(1, 0)`.
    pub delta_hat2: f64,
    pub muc_check: String,
    pub checks: Vec<Check>,
}

impl ConstantsBundle {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn vanishes(algo: Algorithm, cost: &DigitCost, m_cap: u64) -> Result<bool> {
    let m_cap = cost.effective_cap(m_cap);
    for (m, eps) in algo.digits_up_to(m_cap) {
        if cost.eval_f64(m, eps)? != 0.0 {
            return Ok(false);
        }
    }
    Ok(cost.tail_blocks(m_cap).iter().all(|b| b.value == 0.0))
}

/// Evaluates the constant formulas from the pressure derivatives.
pub fn constants(algo: Algorithm, cost: &DigitCost, cfg: &OperatorConfig) -> Result<ConstantsBundle> {
    constants_with(algo, cost, cfg, FdSteps::default())
}

pub fn constants_with(algo: Algorithm, cost: &DigitCost, cfg: &OperatorConfig, steps: FdSteps) -> Result<ConstantsBundle> {
    if vanishes(algo, cost, cfg.m_cap)? {
        // e.g. indicator(1) under the centered algorithm: the cost never fires
        return Err(Error::DegenerateVariance);
    }
    let d = pressure_derivatives(algo, cost, cfg, steps)?;
    let a = d.d_s.abs();
    let mu = 2.0 / a;
    let delta2 = 2.0 * d.d_ss / a.powi(3);
    let mu_c = -2.0 * d.d_w / d.d_s;
    let delta2_c = 2.0 * d.d_w * d.d_w * d.d_ss / a.powi(3) + 4.0 * d.d_w * d.d_sw / (a * a) + 2.0 * d.d_ww / a;
    let mu_hat = d.mu_hat_closed_form;
    let delta_hat2 = d.d_ww;
    let chi_c = d.d_sw;
    let decomposition = mu_hat * mu_hat * delta2 + mu * delta_hat2 + mu * mu * mu_hat * chi_c;

    let muc_tol = 1e-8 + d.mu_hat_tail * mu / mu_c.abs().max(f64::MIN_POSITIVE);
    let muc = Check::relative("mu_c = mu * mu_hat", mu_c, mu * mu_hat, muc_tol);
    let checks = vec![
        Check::relative("entropy |Lambda'(1)|", a, algo.entropy(), entropy_tolerance(algo)),
        Check::absolute("Lambda'_w finite difference vs closed form", d.d_w, mu_hat, 1e-7 + d.mu_hat_tail),
        Check::absolute("Lambda'_w analytic vs finite difference", d.d_w_analytic, d.d_w, 1e-7),
        muc.clone(),
        Check::relative("delta2_c decomposition", decomposition, delta2_c, 1e-8),
        Check { name: "Lambda'(1) < 0".into(), observed: d.d_s, target: 0.0, tolerance: 0.0, pass: d.d_s < 0.0 },
        Check { name: "Lambda''(1) > 0".into(), observed: d.d_ss, target: 0.0, tolerance: 0.0, pass: d.d_ss > 0.0 },
        Check { name: "delta2_c > 0".into(), observed: delta2_c, target: 0.0, tolerance: 0.0, pass: delta2_c > 0.0 },
    ];
    if !(delta2_c > 0.0) {
        return Err(Error::Inconsistency(format!("δ²(c) = {delta2_c} is not positive")));
    }
    Ok(ConstantsBundle {
        schema_version: crate::ensemble::SCHEMA_VERSION,
        algo,
        cost: cost.descriptor(),
        config: cfg.clone(),
        steps,
        derivatives: d,
        mu,
        delta2,
        mu_c,
        delta2_c,
        delta2_c_decomposition: decomposition,
        chi_c,
        mu_hat,
        delta_hat2,
        muc_check: if muc.pass { "pass".into() } else { "fail".into() },
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_is_one_at_the_density_point() {
        for algo in Algorithm::ALL {
            let l = lambda_fn(algo, &DigitCost::unit(), 1.0, 0.0, &OperatorConfig::default()).unwrap();
            assert!((l - 1.0).abs() < 1e-9, "{algo}: {l}");
        }
    }

    #[test]
    fn lambda_monotonicity() {
        let cfg = OperatorConfig { degree: 24, ..Default::default() };
        let op = SpectralOperator::new(Algorithm::Standard, DigitCost::indicator(1), cfg).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..5 {
            let l = op.lambda(0.8 + 0.1 * k as f64, 0.0).unwrap();
            assert!(l < prev);
            prev = l;
        }
        assert!(op.lambda(1.0, 0.1).unwrap() > op.lambda(1.0, 0.0).unwrap());
    }

    #[test]
    fn standard_density_and_entropy() {
        let f = invariant_density(Algorithm::Standard, &OperatorConfig::default()).unwrap();
        for k in 0..100 {
            let x = k as f64 / 99.0;
            assert!((f.eval(x) - Algorithm::Standard.invariant_density(x)).abs() < 1e-10);
        }
        assert!((f.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn costs_that_never_fire_are_degenerate() {
        let cfg = OperatorConfig { degree: 16, ..Default::default() };
        assert!(matches!(constants(Algorithm::Centered, &DigitCost::indicator(1), &cfg), Err(Error::DegenerateVariance)));
        assert!(matches!(constants(Algorithm::Odd, &DigitCost::indicator(2), &cfg), Err(Error::DegenerateVariance)));
    }

    #[test]
    fn sigma_at_zero_is_one() {
        let s = solve_sigma(Algorithm::Standard, &DigitCost::unit(), 0.0, &OperatorConfig::default()).unwrap();
        assert!((s - 1.0).abs() < 1e-9);
    }
}
