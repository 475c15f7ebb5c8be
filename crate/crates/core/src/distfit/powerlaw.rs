use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares line `log10 y = n·log10 x + log10 k` through binned points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub slope_n: f64,
    pub intercept_log10k: f64,
    pub r_squared: f64,
    pub points_used: usize,
    pub excluded_top_bins: usize,
}

impl PowerLawFit {
    /// `k·x^n`
    pub fn predict(&self, x: f64) -> f64 {
        10f64.powf(self.intercept_log10k + self.slope_n * x.log10())
    }
}

/// Fits `y = k·x^n` by ordinary least squares on `(log10 x, log10 y)`.
///
/// The `exclude_top` points with the largest x are dropped first. Points
/// need not be sorted.
pub fn fit_power_law(points: &[(f64, f64)], exclude_top: usize) -> Result<PowerLawFit> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let keep = sorted.len().saturating_sub(exclude_top);
    let used = &sorted[..keep];
    if used.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs at least 2 points, {} remain after excluding {exclude_top}",
            used.len()
        )));
    }
    if let Some(&(x, y)) = used
        .iter()
        .find(|(x, y)| !(x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0))
    {
        return Err(Error::Domain(format!(
            "power-law point ({x}, {y}) must have positive finite coordinates"
        )));
    }

    let logs: Vec<(f64, f64)> = used.iter().map(|&(x, y)| (x.log10(), y.log10())).collect();
    let m = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "power-law fit needs at least 2 distinct x values".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(PowerLawFit {
        slope_n: slope,
        intercept_log10k: intercept,
        r_squared,
        points_used: used.len(),
        excluded_top_bins: sorted.len() - keep,
    })
}
