//! Log–log least squares for decay exponents.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least 3 points with positive magnitude for a fit, have {usable} ({dropped} dropped)")]
    TooFewPoints { usable: usize, dropped: usize },
    #[error("degenerate design: all h values are equal")]
    DegenerateDesign,
    #[error("non-positive or non-finite h = {0}")]
    BadH(f64),
}

/// `log|I| ≈ slope·log h + intercept_log_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept_log_c: f64,
    pub r_squared: f64,
    /// Points discarded for zero or non-finite magnitude.
    pub dropped: usize,
}

/// Fits `magnitude ≈ C·h^slope` over `(h, magnitude)` pairs.
///
/// Points are sorted before summation so the result does not depend on
/// their order.
pub fn fit_decay(points: &[(f64, f64)]) -> Result<DecayFit, FitError> {
    if let Some(&(h, _)) = points.iter().find(|(h, _)| !(*h > 0.0 && h.is_finite())) {
        return Err(FitError::BadH(h));
    }
    let mut usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, m)| *m > 0.0 && m.is_finite())
        .map(|&(h, m)| (h.ln(), m.ln()))
        .collect();
    let dropped = points.len() - usable.len();
    if usable.len() < 3 {
        return Err(FitError::TooFewPoints {
            usable: usable.len(),
            dropped,
        });
    }
    usable.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let n = usable.len() as f64;
    let mean_x = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let spread = usable.last().unwrap().0 - usable[0].0;
    if !(spread > 1e-12 * (1.0 + mean_x.abs())) {
        return Err(FitError::DegenerateDesign);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual: f64 = usable
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - residual / syy } else { 1.0 };
    Ok(DecayFit {
        slope,
        intercept_log_c: intercept,
        r_squared,
        dropped,
    })
}
