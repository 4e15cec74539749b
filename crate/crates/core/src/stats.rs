//! Small statistical helpers shared by the ensemble and real-trajectory checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov–Smirnov distance between a discrete law and `N(0, 1)`.
///
/// `atoms` are `(x, mass)` pairs; masses are normalized internally. Both
/// one-sided limits of the empirical CDF are compared at every jump.
pub fn ks_against_normal(atoms: &mut [(f64, f64)]) -> f64 {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    let mut cum = 0.0;
    let mut sup: f64 = 0.0;
    for &(x, p) in atoms.iter() {
        let g = normal_cdf(x);
        sup = sup.max((cum / total - g).abs());
        cum += p;
        sup = sup.max((cum / total - g).abs());
    }
    sup
}

/// KS distance of equally weighted samples to `N(0, 1)`.
pub fn ks_samples(samples: &[f64]) -> f64 {
    let mut atoms: Vec<(f64, f64)> = samples.iter().map(|&x| (x, 1.0)).collect();
    ks_against_normal(&mut atoms)
}

/// One named check with its outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn relative(name: &str, observed: f64, target: f64, tolerance: f64) -> Self {
        let err = if target == 0.0 { observed.abs() } else { ((observed - target) / target).abs() };
        Check { name: name.into(), observed, target, tolerance, pass: err <= tolerance }
    }

    pub fn absolute(name: &str, observed: f64, target: f64, tolerance: f64) -> Self {
        Check { name: name.into(), observed, target, tolerance, pass: (observed - target).abs() <= tolerance }
    }

    /// `observed <= bound`.
    pub fn at_most(name: &str, observed: f64, bound: f64) -> Self {
        Check { name: name.into(), observed, target: bound, tolerance: 0.0, pass: observed <= bound }
    }

    /// A yes/no condition, recorded as 1 or 0.
    pub fn holds(name: &str, ok: bool) -> Self {
        Check { name: name.into(), observed: f64::from(u8::from(ok)), target: 1.0, tolerance: 0.0, pass: ok }
    }
}

/// Ordinary least squares fit `y = slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

pub fn least_squares(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::Config("regression needs at least two points".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("regression abscissae are all equal".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    Ok(LinearFit { slope, intercept, residual: (rss / n).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-16);
    }

    #[test]
    fn two_point_ks() {
        let mut atoms = vec![(1.0, 1.0), (-1.0, 1.0)];
        let ks = ks_against_normal(&mut atoms);
        assert!((ks - (0.5 - normal_cdf(-1.0))).abs() < 1e-15);
    }

    #[test]
    fn exact_line() {
        let pts: Vec<_> = (1..6).map(|k| {
            let x = (1u64 << (10 + k)) as f64;
            (x.ln(), 2.0 * x.ln() + 3.0)
        }).collect();
        let f = least_squares(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 3.0).abs() < 1e-10);
        assert!(f.residual < 1e-10);
    }
}
