//! Least-squares power-law fits on log-log axes.

use serde::Serialize;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    /// Natural log of the prefactor.
    pub intercept: f64,
    pub r2: f64,
    /// Points dropped because `x` or `y` was not positive.
    pub excluded: usize,
}

/// Fits `y = exp(intercept) x^slope`. Pairs with a nonpositive or
/// non-finite coordinate are skipped with a warning; at least two usable
/// points with distinct `x` are required.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerFit> {
    if x.len() != y.len() {
        return Err(LabError::InvalidArgument(format!("{} abscissae but {} ordinates", x.len(), y.len())));
    }
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite() && **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let excluded = x.len() - pts.len();
    if excluded > 0 {
        log::warn!("power-law fit: skipped {excluded} nonpositive or non-finite points");
    }
    if pts.len() < 2 {
        return Err(LabError::InvalidArgument(format!("only {} usable points for a fit", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LabError::InvalidArgument("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(PowerFit { slope, intercept, r2, excluded })
}
