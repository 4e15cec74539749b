//! Power iteration for the dominant eigenpair of a positive operator.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    /// Eigenvector normalized so that `Σ weights·v = 1`.
    pub vector: Vec<f64>,
    /// `‖A v − λ v‖∞ / ‖v‖∞`.
    pub residual: f64,
    /// Observed contraction of successive iterates, an estimate of `|λ₂/λ₁|`.
    pub gap_ratio: f64,
    pub iterations: usize,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Power iteration from `start`, renormalized each step by the linear
/// functional `weights`.
pub fn power_iteration(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    weights: &[f64],
    start: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<EigenPair> {
    let dot = |v: &[f64]| -> f64 { v.iter().zip(weights).map(|(a, b)| a * b).sum() };
    let mut v = start;
    let s = dot(&v);
    if s == 0.0 || !s.is_finite() {
        return Err(Error::Inconsistency("start vector has zero weight".into()));
    }
    v.iter_mut().for_each(|x| *x /= s);

    let mut lambda = f64::NAN;
    let mut prev_diff = f64::INFINITY;
    let mut ratios: Vec<f64> = Vec::new();
    let mut stalled = 0;
    for it in 1..=max_iter {
        let w = apply(&v);
        let lam = dot(&w);
        if lam == 0.0 || !lam.is_finite() {
            return Err(Error::Inconsistency(format!("power iteration produced λ = {lam}")));
        }
        let next: Vec<f64> = w.iter().map(|x| x / lam).collect();
        let diff = sup(&next.iter().zip(&v).map(|(a, b)| a - b).collect::<Vec<_>>()) / sup(&next);
        if prev_diff.is_finite() && prev_diff > 0.0 && diff > 0.0 {
            ratios.push(diff / prev_diff);
        }
        stalled = if diff >= prev_diff { stalled + 1 } else { 0 };
        v = next;
        lambda = lam;
        let converged = diff <= tol || (diff <= 1e3 * tol && stalled >= 8);
        if converged {
            let av = apply(&v);
            let residual = sup(&av.iter().zip(&v).map(|(a, b)| a - lambda * b).collect::<Vec<_>>()) / sup(&v);
            // take the contraction from the clean geometric phase, before rounding noise
            let clean: Vec<f64> = ratios.iter().copied().take(ratios.len().saturating_sub(3)).collect();
            let gap_ratio = clean.last().copied().or(ratios.first().copied()).unwrap_or(0.0);
            return Ok(EigenPair { lambda, vector: v, residual, gap_ratio, iterations: it });
        }
        prev_diff = diff;
    }
    let av = apply(&v);
    let residual = sup(&av.iter().zip(&v).map(|(a, b)| a - lambda * b).collect::<Vec<_>>()) / sup(&v);
    Err(Error::NonConvergence { iterations: max_iter, residual })
}
