//! Exhaustive statistics of total costs over rational inputs.

mod cache;
mod diagnostics;
mod enumerate;
mod summary;
mod uni;

use std::io::Write;

pub use cache::SummaryCache;
pub use diagnostics::{gaussian_diagnostics, growth_regression, moment_growth, GaussianDiagnostics, LltRow};
pub use enumerate::{enumerate_inputs, CostProfile, InputSet};
pub use summary::{
    eval_poly, eval_poly_wide, phi, phi_poly, psi, psi_poly, psi_poly_from_phi, smoothed, smoothed_measure,
    smoothing_window, summarize, summarize_profile, total_variation, trans1_holds, uniform_measure,
    EnsembleSummary, PairMeasure, SmoothedSummary, SCHEMA_VERSION,
};
pub use uni::{uni_check, UniReport};

use crate::error::Result;

/// Writes `j,cost_value,count` rows.
pub fn write_histogram_csv(summary: &EnsembleSummary, mut out: impl Write) -> Result<()> {
    writeln!(out, "j,cost_value,count")?;
    for (&j, &c) in &summary.histogram {
        let value = num_rational::BigRational::from_integer(j.into()) * &summary.span;
        writeln!(out, "{j},{value},{c}")?;
    }
    Ok(())
}

/// Writes `x,scaled_prob,gauss_density` rows.
pub fn write_llt_csv(diag: &GaussianDiagnostics, mut out: impl Write) -> Result<()> {
    writeln!(out, "x,scaled_prob,gauss_density")?;
    for r in &diag.llt_table {
        writeln!(out, "{},{},{}", r.x, r.scaled_prob, r.gauss_density)?;
    }
    Ok(())
}

/// `|Ω_N| / N²`.
pub fn coprime_density(summary: &EnsembleSummary) -> f64 {
    summary.count as f64 / (summary.n as f64 * summary.n as f64)
}
