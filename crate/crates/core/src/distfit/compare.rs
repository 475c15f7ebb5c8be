use serde::Serialize;

use super::censored::{aic, CensoredBins, CensoredFitResult, Family};
use super::powerlaw::PowerLawFit;
use crate::binning::{PointConvention, Scale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    PowerLaw,
    #[serde(untagged)]
    Family(Family),
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::PowerLaw => "power-law",
            ModelKind::Family(f) => f.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelScore {
    pub model: ModelKind,
    pub n_params: usize,
    pub log_likelihood: f64,
    pub aic: f64,
}

/// Multinomial log-likelihood of the bins under the fitted power-law line.
///
/// Bin `b` receives probability proportional to its predicted mass
/// `k·x_b^n` (times the bin width when the line was fitted to densities),
/// normalized over the occupied bins. `None` when a representative is not
/// positive.
pub fn power_law_log_likelihood(
    fit: &PowerLawFit,
    convention: PointConvention,
    bins: &CensoredBins,
) -> Option<f64> {
    let mut log_mass = Vec::with_capacity(bins.len());
    for iv in bins.intervals() {
        let x = convention.x(iv.lower, iv.upper);
        if !(x > 0.0 && x.is_finite()) {
            return None;
        }
        let width = match convention.scale {
            Scale::Frequency => 0.0,
            Scale::Density => (iv.upper - iv.lower).ln(),
        };
        log_mass.push(fit.slope_n * x.ln() + width);
    }
    let peak = log_mass.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return None;
    }
    let log_norm = peak + log_mass.iter().map(|m| (m - peak).exp()).sum::<f64>().ln();
    Some(
        bins.intervals()
            .iter()
            .zip(&log_mass)
            .map(|(iv, m)| iv.count as f64 * (m - log_norm))
            .sum(),
    )
}

/// Ranks models by ascending AIC; ties keep input order, power law last.
pub fn compare_models(
    results: &[CensoredFitResult],
    power_law: Option<&PowerLawFit>,
    convention: PointConvention,
    bins: &CensoredBins,
) -> Vec<ModelScore> {
    let mut scores: Vec<ModelScore> = results
        .iter()
        .map(|r| ModelScore {
            model: ModelKind::Family(r.family),
            n_params: r.family.n_params(),
            log_likelihood: r.log_likelihood,
            aic: r.aic,
        })
        .collect();
    if let Some(ll) = power_law.and_then(|pl| power_law_log_likelihood(pl, convention, bins)) {
        scores.push(ModelScore {
            model: ModelKind::PowerLaw,
            n_params: 2,
            log_likelihood: ll,
            aic: aic(2, ll),
        });
    }
    scores.sort_by(|a, b| a.aic.total_cmp(&b.aic));
    scores
}
