//! Collocation matrix of the weighted transfer operator.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chebyshev::{bary_weights, coefficients, lagrange_row, nodes, quadrature_weights, taylor_at_zero};
use super::zeta::hurwitz_family;
use crate::algorithm::{Algorithm, Sign};
use crate::cost::{CostKind, DigitCost};
use crate::error::{Error, Result};

/// Discretization parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorConfig {
    /// Polynomial degree of the interpolant (`degree + 1` nodes).
    pub degree: usize,
    /// Branches `m <= m_cap` are summed directly, the rest through zeta tails.
    pub m_cap: u64,
    pub tail_tol: f64,
    /// Power-iteration cap.
    pub max_iter: usize,
    /// Relative nodal change at which power iteration stops.
    pub eig_tol: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig { degree: 40, m_cap: 64, tail_tol: 1e-14, max_iter: 5000, eig_tol: 1e-14 }
    }
}

impl OperatorConfig {
    pub const MIN_DEGREE: usize = 8;

    pub fn validate(&self) -> Result<()> {
        if self.degree < Self::MIN_DEGREE {
            return Err(Error::Discretization(format!(
                "degree {} is below the minimum {}",
                self.degree,
                Self::MIN_DEGREE
            )));
        }
        if self.m_cap < 4 {
            return Err(Error::Discretization(format!("m_cap {} is below the minimum 4", self.m_cap)));
        }
        if !(self.tail_tol > 0.0) || !(self.eig_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config("tolerances and iteration cap must be positive".into()));
        }
        Ok(())
    }
}

/// How each branch is weighted: `e^{νc}` or its `ν`-derivative `c·e^{νc}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Weighting {
    Exp,
    CostExp,
}

impl Weighting {
    fn weight(self, nu: f64, c: f64) -> f64 {
        match self {
            Weighting::Exp => (nu * c).exp(),
            Weighting::CostExp => c * (nu * c).exp(),
        }
    }
}

/// `H_{σ,ν}` acting on nodal values.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub algo: Algorithm,
    pub sigma: f64,
    pub nu: f64,
    /// Number of nodes.
    pub dim: usize,
    /// Row-major `dim × dim` entries.
    pub data: Vec<f64>,
    pub nodes: Vec<f64>,
    /// Clenshaw–Curtis weights on the nodes.
    pub quadrature: Vec<f64>,
    /// Bound on the branch mass not represented exactly (skipped blocks, envelopes).
    pub tail_bound: f64,
}

impl OperatorMatrix {
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.data.chunks(self.dim).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Rejects `(σ, ν)` where the branch series diverges.
pub fn check_convergence(cost: &DigitCost, sigma: f64, nu: f64) -> Result<()> {
    if !sigma.is_finite() || !nu.is_finite() {
        return Err(Error::Divergence { sigma, nu, reason: "non-finite parameters".into() });
    }
    if sigma <= 0.5 {
        return Err(Error::Divergence { sigma, nu, reason: "requires sigma > 1/2".into() });
    }
    if let CostKind::BinaryLength = cost.kind {
        // e^{ν·s·(log2 m + 1)} m^{−2σ} is summable iff ν·s/ln 2 < 2σ − 1
        let s = num_traits::ToPrimitive::to_f64(&cost.scale).unwrap_or(f64::NAN);
        if nu * s >= (2.0 * sigma - 1.0) * std::f64::consts::LN_2 {
            return Err(Error::Divergence {
                sigma,
                nu,
                reason: "binary-length weights outgrow the branch derivatives".into(),
            });
        }
    }
    Ok(())
}

fn tail_parity(algo: Algorithm) -> u64 {
    match algo {
        Algorithm::Odd => 2,
        _ => 1,
    }
}

fn tail_signs(algo: Algorithm) -> &'static [Sign] {
    match algo {
        Algorithm::Standard => &[Sign::Plus],
        _ => &[Sign::Plus, Sign::Minus],
    }
}

/// `Σ (m + εx)^{−(s+p)}`, `p = 0..=p_max`, over admissible `m` in `[lo, hi)`.
fn block_sums(parity: u64, lo: u64, hi: Option<u64>, shift: f64, s: f64, p_max: usize) -> Vec<f64> {
    let first = |m: u64| if parity == 2 && m % 2 == 0 { m + 1 } else { m };
    let lo = first(lo);
    let hi = hi.map(first);
    if let Some(hi) = hi {
        if hi <= lo {
            return vec![0.0; p_max + 1];
        }
        if (hi - lo) / parity <= 64 {
            let mut out = vec![0.0; p_max + 1];
            let mut m = lo;
            while m < hi {
                let y = m as f64 + shift;
                let inv = 1.0 / y;
                let mut t = y.powf(-s);
                for o in out.iter_mut() {
                    *o += t;
                    t *= inv;
                }
                m += parity;
            }
            return out;
        }
    }
    let family = |start: u64| -> Vec<f64> {
        if parity == 1 {
            hurwitz_family(s, start as f64 + shift, p_max)
        } else {
            let mut z = hurwitz_family(s, 0.5 * (start as f64 + shift), p_max);
            let mut scale = 2f64.powf(-s);
            for v in z.iter_mut() {
                *v *= scale;
                scale *= 0.5;
            }
            z
        }
    };
    let mut out = family(lo);
    if let Some(hi) = hi {
        for (o, h) in out.iter_mut().zip(family(hi)) {
            *o -= h;
        }
    }
    out
}

/// Assembles `H_{σ,ν}` on `degree + 1` Chebyshev nodes.
pub fn assemble(algo: Algorithm, cost: &DigitCost, sigma: f64, nu: f64, cfg: &OperatorConfig) -> Result<OperatorMatrix> {
    assemble_weighted(algo, cost, sigma, nu, cfg, Weighting::Exp)
}

pub(crate) fn assemble_weighted(
    algo: Algorithm,
    cost: &DigitCost,
    sigma: f64,
    nu: f64,
    cfg: &OperatorConfig,
    weighting: Weighting,
) -> Result<OperatorMatrix> {
    cfg.validate()?;
    check_convergence(cost, sigma, nu)?;
    let n = cfg.degree;
    let dim = n + 1;
    let b = algo.interval_end();
    let xs = nodes(n, b);
    let ws = bary_weights(n);
    let s2 = 2.0 * sigma;
    let m_cap = cost.effective_cap(cfg.m_cap);

    let mut branches = Vec::new();
    for (m, eps) in algo.digits_up_to(m_cap) {
        let c = cost.eval_f64(m, eps)?;
        branches.push((m as f64, eps.as_f64(), weighting.weight(nu, c)));
    }

    // Taylor coefficients at 0 of every Lagrange basis polynomial: tau[k][p].
    let tz = taylor_at_zero(n, b);
    let tau: Vec<Vec<f64>> = (0..dim)
        .map(|k| {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            let a = coefficients(&e);
            (0..dim).map(|p| (0..dim).map(|i| a[i] * tz[i][p]).sum()).collect()
        })
        .collect();

    let blocks = cost.tail_blocks(m_cap);
    let parity = tail_parity(algo);
    let min_weight = match weighting {
        Weighting::Exp => 1.0,
        Weighting::CostExp => 0.0,
    };

    let rows: Vec<(Vec<f64>, f64)> = xs
        .par_iter()
        .map(|&x| {
            let mut row = vec![0.0; dim];
            let mut ell = vec![0.0; dim];
            for &(m, e, w) in &branches {
                let d = m + e * x;
                let y = 1.0 / d;
                let g = w * d.powf(-s2);
                lagrange_row(y, &xs, &ws, &mut ell);
                for (r, l) in row.iter_mut().zip(&ell) {
                    *r += g * l;
                }
            }
            // tail: z[p] = Σ_{m > m_cap} w(m) (m + εx)^{−(2σ+p)}
            let mut z = vec![0.0; dim];
            let mut bound = 0.0;
            for &eps in tail_signs(algo) {
                let shift = eps.as_f64() * x;
                for blk in &blocks {
                    let w = weighting.weight(nu, blk.value);
                    // Σ_{m >= lo} (m − 1)^{−2σ} <= (lo − 2)^{1−2σ}/(2σ − 1)
                    let est = w.abs() * ((blk.lo as f64 - 2.0).max(1.0)).powf(1.0 - s2) / (s2 - 1.0);
                    if est < 1e-22 {
                        bound += est;
                        continue;
                    }
                    let sums = block_sums(parity, blk.lo, blk.hi, shift, s2, n);
                    if blk.envelope {
                        bound += (w - min_weight).abs() * sums[0];
                    }
                    for (zp, sp) in z.iter_mut().zip(&sums) {
                        *zp += w * sp;
                    }
                }
            }
            for (k, r) in row.iter_mut().enumerate() {
                *r += tau[k].iter().zip(&z).map(|(t, zp)| t * zp).sum::<f64>();
            }
            (row, bound)
        })
        .collect();

    let tail_bound = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let data = rows.into_iter().flat_map(|r| r.0).collect();
    Ok(OperatorMatrix {
        algo,
        sigma,
        nu,
        dim,
        data,
        nodes: xs,
        quadrature: quadrature_weights(n, b),
        tail_bound,
    })
}
