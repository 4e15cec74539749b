//! Gaussian limit diagnostics and growth regressions.

use serde::{Deserialize, Serialize};

use super::summary::EnsembleSummary;
use crate::error::{Error, Result};
use crate::stats::{ks_against_normal, least_squares, LinearFit};

/// One lattice bin compared with the Gaussian density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LltRow {
    pub j: u64,
    pub x: f64,
    pub scaled_prob: f64,
    pub gauss_density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianDiagnostics {
    pub ks: f64,
    pub llt_table: Vec<LltRow>,
}

impl GaussianDiagnostics {
    /// Largest `|scaled_prob − e^{−x²/2}|` over bins with `|x| <= x_max`.
    pub fn llt_sup_error(&self, x_max: f64) -> f64 {
        self.llt_table
            .iter()
            .filter(|r| r.x.abs() <= x_max)
            .map(|r| (r.scaled_prob - r.gauss_density).abs())
            .fold(0.0, f64::max)
    }
}

/// Compares the cost law of `summary` with `N(μ(c) log N, δ²(c) log N)`.
///
/// `delta_c` is the standard-deviation constant `δ(c)`, not its square.
pub fn gaussian_diagnostics(summary: &EnsembleSummary, mu_c: f64, delta_c: f64) -> Result<GaussianDiagnostics> {
    if !(delta_c > 0.0) {
        return Err(Error::Config(format!("delta(c) must be positive, got {delta_c}")));
    }
    if summary.histogram.len() < 2 {
        return Err(Error::DegenerateVariance);
    }
    let log_n = (summary.n as f64).ln();
    let l = summary.span_f64();
    let scale = delta_c * log_n.sqrt();
    let count = summary.count as f64;
    let standardize = |j: u64| (j as f64 * l - mu_c * log_n) / scale;

    let mut atoms: Vec<(f64, f64)> = summary.histogram.iter().map(|(&j, &c)| (standardize(j), c as f64)).collect();
    let ks = ks_against_normal(&mut atoms);

    let factor = scale * (2.0 * std::f64::consts::PI).sqrt() / l;
    let llt_table = summary
        .histogram
        .iter()
        .map(|(&j, &c)| {
            let x = standardize(j);
            LltRow { j, x, scaled_prob: factor * c as f64 / count, gauss_density: (-0.5 * x * x).exp() }
        })
        .collect();
    Ok(GaussianDiagnostics { ks, llt_table })
}

/// OLS of `y` against `log N` over an increasing grid of `N`.
pub fn growth_regression(points: &[(u64, f64)]) -> Result<LinearFit> {
    if points.len() < 3 {
        return Err(Error::Config("growth regression needs at least 3 grid points".into()));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Config("grid must be strictly increasing".into()));
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|&(n, y)| ((n as f64).ln(), y)).collect();
    least_squares(&pts)
}

/// Regression of the mean and variance of the summaries against `log N`.
pub fn moment_growth(summaries: &[EnsembleSummary]) -> Result<(LinearFit, LinearFit)> {
    let mean: Vec<_> = summaries.iter().map(|s| (s.n, s.mean())).collect();
    let var: Vec<_> = summaries.iter().map(|s| (s.n, s.variance())).collect();
    Ok((growth_regression(&mean)?, growth_regression(&var)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::Algorithm;
    use crate::ensemble::summary::SCHEMA_VERSION;
    use crate::stats::normal_cdf;
    use num_rational::BigRational;
    use num_traits::One;
    use std::collections::BTreeMap;

    fn summary(n: u64, hist: &[(u64, u64)]) -> EnsembleSummary {
        EnsembleSummary {
            schema_version: SCHEMA_VERSION,
            algo: Algorithm::Standard,
            cost: "unit".into(),
            n,
            reduced: true,
            count: hist.iter().map(|h| h.1).sum(),
            span: BigRational::one(),
            moments: vec![],
            histogram: hist.iter().copied().collect::<BTreeMap<_, _>>(),
        }
    }

    #[test]
    fn point_mass_is_degenerate() {
        assert!(matches!(gaussian_diagnostics(&summary(100, &[(3, 10)]), 1.0, 1.0), Err(Error::DegenerateVariance)));
    }

    #[test]
    fn symmetric_two_point_law() {
        // N = e: log N = 1, so j = 1, 3 standardize to -1, +1 with mu = 2, delta = 1
        let s = summary(0, &[(1, 5), (3, 5)]);
        let s = EnsembleSummary { n: 3, ..s };
        let log_n = 3f64.ln();
        let d = gaussian_diagnostics(&s, 2.0 / log_n, 1.0 / log_n.sqrt()).unwrap();
        assert!((d.ks - (0.5 - normal_cdf(-1.0))).abs() < 1e-12);
        assert_eq!(d.llt_table.len(), 2);
        assert!((d.llt_table[0].x + 1.0).abs() < 1e-12);
    }

    #[test]
    fn synthetic_regression() {
        let pts: Vec<_> = (10..=17).map(|k| {
            let n = 1u64 << k;
            (n, 2.0 * (n as f64).ln() + 3.0)
        }).collect();
        let f = growth_regression(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 3.0).abs() < 1e-10 && f.residual < 1e-10);
        assert!(growth_regression(&pts[..2]).is_err());
    }
}
