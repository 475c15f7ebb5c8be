//! Finite-sample stand-in for the "decays slower than every exponential" test.
//!
//! An exponential with rate `mu_hat` is fitted to the upper tail and the
//! ratio `ccdf(x) / exp(-mu_hat·x)` is tracked over the tail points:
//!
//! * heavy: the ratio at the largest x exceeds `threshold_m` and is no
//!   smaller than at the start of the tail's last quartile;
//! * light: the ratio never exceeds 1 over the last quartile;
//! * inconclusive: anything else, fewer than [`MIN_SAMPLES`] samples, or a
//!   tail with a single distinct value.

use serde::Serialize;

use crate::binning::EmpiricalCcdf;
use crate::error::{Error, Result};

pub const MIN_SAMPLES: u64 = 50;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
pub const DEFAULT_THRESHOLD_M: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Heavy,
    Light,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioPoint {
    pub x: f64,
    /// `ln[ccdf(x) / exp(-mu_hat·x)]`, kept in log space to avoid overflow.
    pub ln_ratio: f64,
}

impl RatioPoint {
    pub fn ratio(&self) -> f64 {
        self.ln_ratio.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailDiagnostic {
    pub mu_hat: f64,
    pub ratio_curve: Vec<RatioPoint>,
    pub verdict: Verdict,
    pub threshold_m: f64,
    pub tail_fraction: f64,
    pub sample_count: u64,
}

pub fn heavy_tail_diagnostic(
    c: &EmpiricalCcdf,
    tail_fraction: f64,
    threshold_m: f64,
) -> Result<TailDiagnostic> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "tail fraction {tail_fraction} must lie in (0, 1)"
        )));
    }
    if !(threshold_m > 0.0 && threshold_m.is_finite()) {
        return Err(Error::Domain(format!(
            "threshold M {threshold_m} must be positive"
        )));
    }
    if c.is_empty() {
        return Err(Error::Domain("diagnostic needs a nonempty ccdf".into()));
    }

    let n = c.n as f64;
    // suffix of distinct values whose tail probability is within the fraction,
    // never empty because the maximum has ccdf 1/n
    let start = c
        .points
        .iter()
        .position(|p| p.at_least as f64 / n <= tail_fraction)
        .unwrap_or(c.points.len() - 1);
    let tail = &c.points[start..];

    let mut weighted = 0.0;
    for (i, p) in tail.iter().enumerate() {
        let next = tail.get(i + 1).map_or(0, |q| q.at_least);
        weighted += (p.at_least - next) as f64 * p.x;
    }
    let mu_hat = tail[0].at_least as f64 / weighted;

    let ratio_curve: Vec<RatioPoint> = tail
        .iter()
        .map(|p| RatioPoint {
            x: p.x,
            ln_ratio: (p.at_least as f64 / n).ln() + mu_hat * p.x,
        })
        .collect();

    let verdict = if c.n < MIN_SAMPLES || ratio_curve.len() < 2 {
        Verdict::Inconclusive
    } else {
        let q = ratio_curve.len().div_ceil(4).max(2);
        let quartile = &ratio_curve[ratio_curve.len() - q..];
        let (first, last) = (quartile[0], quartile[q - 1]);
        if last.ln_ratio > threshold_m.ln() && last.ln_ratio >= first.ln_ratio {
            Verdict::Heavy
        } else if quartile.iter().all(|p| p.ln_ratio <= 0.0) {
            Verdict::Light
        } else {
            Verdict::Inconclusive
        }
    };

    Ok(TailDiagnostic {
        mu_hat,
        ratio_curve,
        verdict,
        threshold_m,
        tail_fraction,
        sample_count: c.n,
    })
}
