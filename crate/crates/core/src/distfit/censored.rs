//! Interval-censored maximum likelihood for light-tailed families.
//!
//! Each bin contributes `count · ln[F(upper) − F(lower)]`. Scale parameters
//! are optimized on the log scale; locations of the half-normal and
//! exponential families are fixed at zero.

use serde::Serialize;

use super::nelder_mead::{self, NelderMeadOptions};
use crate::binning::LogBinnedHistogram;
use crate::error::{Error, Result};

/// Interval probabilities below this count as zero.
pub const MIN_PROBABILITY: f64 = 1e-300;
/// Log-likelihood charged per observation in a zero-probability bin.
pub const ZERO_PROBABILITY_PENALTY: f64 = -700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
}

impl Interval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Observations known only up to the `[lower, upper)` bin holding them.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CensoredBins {
    intervals: Vec<Interval>,
}

impl CensoredBins {
    /// Validates finite, ascending, non-overlapping intervals with positive counts.
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        for (i, iv) in intervals.iter().enumerate() {
            if !(iv.lower.is_finite() && iv.upper.is_finite() && iv.lower < iv.upper) {
                return Err(Error::Domain(format!(
                    "interval #{i} [{}, {}) is not a finite nonempty range",
                    iv.lower, iv.upper
                )));
            }
            if iv.count == 0 {
                return Err(Error::Domain(format!("interval #{i} has zero count")));
            }
        }
        if let Some(i) = intervals.windows(2).position(|w| w[1].lower < w[0].upper) {
            return Err(Error::Domain(format!(
                "intervals #{i} and #{} overlap or are out of order",
                i + 1
            )));
        }
        Ok(Self { intervals })
    }

    /// Occupied power-of-two bins as real intervals `[2^d, 2^(d+1))`.
    pub fn from_histogram(h: &LogBinnedHistogram) -> Self {
        Self {
            intervals: h
                .bins
                .iter()
                .filter(|b| b.count > 0)
                .map(|b| Interval {
                    lower: b.lower() as f64,
                    upper: b.upper() as f64,
                    count: b.count,
                })
                .collect(),
        }
    }

    /// Bins positive real samples into `[2^d, 2^(d+1))` for integer `d`.
    pub fn from_pow2_samples(samples: &[f64]) -> Result<Self> {
        let mut exponents = Vec::with_capacity(samples.len());
        for (i, &x) in samples.iter().enumerate() {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::Domain(format!(
                    "sample #{i} = {x} is not positive and finite"
                )));
            }
            exponents.push(floor_log2_real(x));
        }
        exponents.sort_unstable();
        let mut intervals: Vec<Interval> = Vec::new();
        for d in exponents {
            let lower = 2f64.powi(d);
            match intervals.last_mut() {
                Some(last) if last.lower == lower => last.count += 1,
                _ => intervals.push(Interval {
                    lower,
                    upper: 2.0 * lower,
                    count: 1,
                }),
            }
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn total(&self) -> u64 {
        self.intervals.iter().map(|iv| iv.count).sum()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// `d` with `2^d <= x < 2^(d+1)`, exact for positive finite `x`.
pub fn floor_log2_real(x: f64) -> i32 {
    let mut d = x.log2().floor() as i32;
    while 2f64.powi(d) > x {
        d -= 1;
    }
    while 2f64.powi(d + 1) <= x {
        d += 1;
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Uniform,
    Normal,
    HalfNormal,
    Exponential,
    Laplace,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Uniform,
        Family::Normal,
        Family::HalfNormal,
        Family::Exponential,
        Family::Laplace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::Normal => "normal",
            Family::HalfNormal => "half-normal",
            Family::Exponential => "exponential",
            Family::Laplace => "laplace",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Uniform => &["a", "b"],
            Family::Normal => &["mu", "sigma"],
            Family::HalfNormal => &["sigma"],
            Family::Exponential => &["lambda"],
            Family::Laplace => &["mu", "b"],
        }
    }

    pub fn n_params(self) -> usize {
        self.param_names().len()
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// `P(lower <= X < upper)`, evaluated without cancellation in either tail.
    pub fn interval_probability(self, params: &[f64], lower: f64, upper: f64) -> f64 {
        let p = match self {
            Family::Uniform => {
                let (a, b) = (params[0], params[1]);
                let overlap = upper.min(b) - lower.max(a);
                if overlap > 0.0 {
                    overlap / (b - a)
                } else {
                    0.0
                }
            }
            Family::Normal => normal_mass(
                (lower - params[0]) / params[1],
                (upper - params[0]) / params[1],
            ),
            Family::HalfNormal => {
                let s = params[0] * std::f64::consts::SQRT_2;
                let (l, u) = (lower.max(0.0) / s, upper.max(0.0) / s);
                if l > 0.5 {
                    libm::erfc(l) - libm::erfc(u)
                } else {
                    libm::erf(u) - libm::erf(l)
                }
            }
            Family::Exponential => {
                let rate = params[0];
                let (l, u) = (lower.max(0.0), upper.max(0.0));
                if u <= l {
                    0.0
                } else {
                    (-rate * l).exp() * -(-rate * (u - l)).exp_m1()
                }
            }
            Family::Laplace => {
                let (mu, b) = (params[0], params[1]);
                let (l, u) = ((lower - mu) / b, (upper - mu) / b);
                if l >= 0.0 {
                    0.5 * ((-l).exp() - (-u).exp())
                } else if u <= 0.0 {
                    0.5 * (u.exp() - l.exp())
                } else {
                    1.0 - 0.5 * l.exp() - 0.5 * (-u).exp()
                }
            }
        };
        p.max(0.0)
    }

    /// Maps unconstrained optimizer coordinates to family parameters.
    fn params_from_free(self, free: &[f64]) -> Vec<f64> {
        match self {
            Family::Uniform => free.to_vec(),
            Family::Normal | Family::Laplace => vec![free[0], free[1].exp()],
            Family::HalfNormal | Family::Exponential => vec![free[0].exp()],
        }
    }

    fn to_free(self, params: &[f64]) -> Vec<f64> {
        match self {
            Family::Uniform => params.to_vec(),
            Family::Normal | Family::Laplace => vec![params[0], params[1].ln()],
            Family::HalfNormal | Family::Exponential => vec![params[0].ln()],
        }
    }
}

/// `Φ(z2) − Φ(z1)`
fn normal_mass(z1: f64, z2: f64) -> f64 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    if z1 >= 0.0 {
        0.5 * (libm::erfc(z1 * r) - libm::erfc(z2 * r))
    } else if z2 <= 0.0 {
        0.5 * (libm::erfc(-z2 * r) - libm::erfc(-z1 * r))
    } else {
        0.5 * (libm::erf(z2 * r) - libm::erf(z1 * r))
    }
}

/// Censored log-likelihood with the zero-probability penalty applied.
pub fn log_likelihood(family: Family, params: &[f64], bins: &CensoredBins) -> f64 {
    bins.intervals
        .iter()
        .map(|iv| {
            let p = family.interval_probability(params, iv.lower, iv.upper);
            let per_obs = if p >= MIN_PROBABILITY {
                p.ln()
            } else {
                ZERO_PROBABILITY_PENALTY
            };
            iv.count as f64 * per_obs
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensoredFitResult {
    pub family: Family,
    pub params: Vec<f64>,
    pub log_likelihood: f64,
    /// `2·k − 2·log_likelihood`
    pub aic: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl CensoredFitResult {
    pub fn interval_probability(&self, lower: f64, upper: f64) -> f64 {
        self.family.interval_probability(&self.params, lower, upper)
    }
}

pub fn aic(n_params: usize, log_likelihood: f64) -> f64 {
    2.0 * n_params as f64 - 2.0 * log_likelihood
}

/// Method-of-moments start from count-weighted interval midpoints.
///
/// The uniform family starts (and ends) at the covered range.
pub fn initial_params(family: Family, bins: &CensoredBins) -> Vec<f64> {
    let ivs = bins.intervals();
    let n = bins.total() as f64;
    let mean = ivs
        .iter()
        .map(|iv| iv.count as f64 * iv.midpoint())
        .sum::<f64>()
        / n;
    let var = ivs
        .iter()
        .map(|iv| iv.count as f64 * (iv.midpoint() - mean).powi(2))
        .sum::<f64>()
        / n;
    let sd = if var > 0.0 {
        var.sqrt()
    } else {
        // one occupied bin: spread of a uniform over it
        ivs.first()
            .map_or(1.0, |iv| (iv.upper - iv.lower) / 12f64.sqrt())
    };
    match family {
        Family::Uniform => vec![
            ivs.first().map_or(0.0, |iv| iv.lower),
            ivs.last().map_or(1.0, |iv| iv.upper),
        ],
        Family::Normal => vec![mean, sd],
        Family::HalfNormal => {
            let second = ivs
                .iter()
                .map(|iv| iv.count as f64 * iv.midpoint().powi(2))
                .sum::<f64>()
                / n;
            vec![if second > 0.0 { second.sqrt() } else { sd }]
        }
        Family::Exponential => vec![if mean > 0.0 { 1.0 / mean } else { 1.0 }],
        Family::Laplace => vec![mean, sd / std::f64::consts::SQRT_2],
    }
}

/// Maximizes the censored log-likelihood of `family` over `bins`.
///
/// Exhausting the iteration budget yields `converged = false`, not an error.
pub fn fit_censored(bins: &CensoredBins, family: Family) -> Result<CensoredFitResult> {
    fit_censored_with(bins, family, &NelderMeadOptions::default())
}

pub fn fit_censored_with(
    bins: &CensoredBins,
    family: Family,
    options: &NelderMeadOptions,
) -> Result<CensoredFitResult> {
    if bins.is_empty() {
        return Err(Error::InsufficientData(
            "censored fit needs at least one interval".into(),
        ));
    }
    if bins.total() < 2 {
        return Err(Error::InsufficientData(format!(
            "censored fit needs at least 2 observations, got {}",
            bins.total()
        )));
    }
    if family == Family::HalfNormal && bins.intervals().iter().any(|iv| iv.lower < 0.0) {
        return Err(Error::Domain(
            "half-normal fit needs nonnegative interval bounds".into(),
        ));
    }

    let start = initial_params(family, bins);
    if family == Family::Uniform {
        // the likelihood only grows as [a, b] shrinks onto the covered range
        let ll = log_likelihood(family, &start, bins);
        return Ok(CensoredFitResult {
            family,
            aic: aic(family.n_params(), ll),
            params: start,
            log_likelihood: ll,
            converged: true,
            iterations: 0,
        });
    }

    let objective = |free: &[f64]| -log_likelihood(family, &family.params_from_free(free), bins);
    let min = nelder_mead::minimize(objective, &family.to_free(&start), options);
    let params = family.params_from_free(&min.x);
    let ll = log_likelihood(family, &params, bins);
    Ok(CensoredFitResult {
        family,
        aic: aic(family.n_params(), ll),
        params,
        log_likelihood: ll,
        converged: min.converged,
        iterations: min.iterations,
    })
}
