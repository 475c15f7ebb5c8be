//! Power-of-two binning and the empirical CCDF.

use serde::Serialize;

use crate::error::{Error, Result};

/// Bin `[2^exponent, 2^(exponent+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LogBin {
    pub exponent: u32,
    pub count: u64,
}

impl LogBin {
    pub fn lower(&self) -> u128 {
        1u128 << self.exponent
    }

    pub fn upper(&self) -> u128 {
        1u128 << (self.exponent + 1)
    }

    pub fn width(&self) -> u128 {
        self.lower()
    }

    pub fn contains(&self, n: u64) -> bool {
        let n = u128::from(n);
        self.lower() <= n && n < self.upper()
    }
}

/// Frequencies over contiguous power-of-two bins.
///
/// Bins span the occupied exponent range; interior bins may hold zero.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct LogBinnedHistogram {
    pub bins: Vec<LogBin>,
    pub total: u64,
}

/// `floor(log2 n)` from the bit length, exact at powers of two.
pub fn floor_log2(n: u64) -> Option<u32> {
    n.checked_ilog2()
}

/// Bins every value into `2^d <= n < 2^(d+1)`.
pub fn log_bin(values: &[u64]) -> Result<LogBinnedHistogram> {
    let mut counts = [0u64; 64];
    for (i, &n) in values.iter().enumerate() {
        let d = floor_log2(n)
            .ok_or_else(|| Error::Domain(format!("value #{i} is 0; log binning needs n >= 1")))?;
        counts[d as usize] += 1;
    }
    let Some(lo) = counts.iter().position(|&c| c > 0) else {
        return Ok(LogBinnedHistogram::default());
    };
    let hi = counts.iter().rposition(|&c| c > 0).unwrap_or(lo);
    let bins = (lo..=hi)
        .map(|d| LogBin {
            exponent: d as u32,
            count: counts[d],
        })
        .collect();
    Ok(LogBinnedHistogram {
        bins,
        total: values.len() as u64,
    })
}

/// Abscissa used for a bin when it becomes a single plotted or fitted point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representative {
    #[default]
    Lower,
    /// `sqrt(lower * upper)`
    Geometric,
}

/// Ordinate used for a bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// Raw count.
    #[default]
    Frequency,
    /// Count divided by bin width.
    Density,
}

/// Maps `(lower, upper, count)` intervals to plot/fit points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PointConvention {
    pub representative: Representative,
    pub scale: Scale,
}

impl PointConvention {
    pub fn x(&self, lower: f64, upper: f64) -> f64 {
        match self.representative {
            Representative::Lower => lower,
            Representative::Geometric => (lower * upper).sqrt(),
        }
    }

    /// Converts an expected or observed bin mass to the chosen ordinate.
    pub fn y(&self, lower: f64, upper: f64, mass: f64) -> f64 {
        match self.scale {
            Scale::Frequency => mass,
            Scale::Density => mass / (upper - lower),
        }
    }

    pub fn point(&self, lower: f64, upper: f64, count: f64) -> (f64, f64) {
        (self.x(lower, upper), self.y(lower, upper, count))
    }
}

impl LogBinnedHistogram {
    /// One `(x_rep, y)` per nonempty bin, ascending in x.
    pub fn representatives(&self, convention: PointConvention) -> Vec<(f64, f64)> {
        self.bins
            .iter()
            .filter(|b| b.count > 0)
            .map(|b| convention.point(b.lower() as f64, b.upper() as f64, b.count as f64))
            .collect()
    }

    pub fn occupied(&self) -> usize {
        self.bins.iter().filter(|b| b.count > 0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcdfPoint {
    pub x: f64,
    /// `#{v : v >= x}`
    pub at_least: u64,
}

/// Inclusive tail probability `P(X >= x)` at each distinct sample value.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EmpiricalCcdf {
    pub points: Vec<CcdfPoint>,
    pub n: u64,
}

impl EmpiricalCcdf {
    fn from_sorted(sorted: &[f64]) -> Self {
        let n = sorted.len();
        let mut points = Vec::new();
        let mut i = 0;
        while i < n {
            let x = sorted[i];
            points.push(CcdfPoint {
                x,
                at_least: (n - i) as u64,
            });
            while i < n && sorted[i] == x {
                i += 1;
            }
        }
        Self {
            points,
            n: n as u64,
        }
    }

    pub fn probability(&self, point: &CcdfPoint) -> f64 {
        point.at_least as f64 / self.n as f64
    }

    /// `(x, P(X >= x))` pairs, ascending in x.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().map(|p| (p.x, self.probability(p)))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Empirical CCDF of positive integer samples.
pub fn ccdf(values: &[u64]) -> Result<EmpiricalCcdf> {
    if values.is_empty() {
        return Err(Error::Domain("ccdf of an empty sample".into()));
    }
    if values.contains(&0) {
        return Err(Error::Domain("ccdf input must be positive integers".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let as_real: Vec<f64> = sorted.into_iter().map(|v| v as f64).collect();
    Ok(EmpiricalCcdf::from_sorted(&as_real))
}

/// Empirical CCDF of positive finite real samples.
pub fn ccdf_real(values: &[f64]) -> Result<EmpiricalCcdf> {
    if values.is_empty() {
        return Err(Error::Domain("ccdf of an empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::Domain(
            "ccdf input must be positive and finite".into(),
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(EmpiricalCcdf::from_sorted(&sorted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_lands_in_first_bin() {
        let h = log_bin(&[1]).unwrap();
        assert_eq!(
            h.bins,
            vec![LogBin {
                exponent: 0,
                count: 1
            }]
        );
        assert_eq!((h.bins[0].lower(), h.bins[0].upper()), (1, 2));
    }

    #[test]
    fn five_lands_in_four_to_eight() {
        let h = log_bin(&[5]).unwrap();
        assert_eq!(
            (h.bins[0].lower(), h.bins[0].upper(), h.bins[0].count),
            (4, 8, 1)
        );
    }

    #[test]
    fn zero_is_a_domain_error() {
        assert!(matches!(log_bin(&[3, 0]), Err(Error::Domain(_))));
    }

    #[test]
    fn powers_of_two_open_their_own_bin() {
        for d in 0..64u32 {
            let n = 1u64 << d;
            let h = log_bin(&[n]).unwrap();
            assert_eq!(h.bins[0].exponent, d);
            if n > 1 {
                assert_eq!(log_bin(&[n - 1]).unwrap().bins[0].exponent, d - 1);
            }
        }
        let h = log_bin(&[u64::MAX]).unwrap();
        assert_eq!(h.bins[0].upper(), 1u128 << 64);
    }

    #[test]
    fn interior_empty_bins_are_kept() {
        let h = log_bin(&[1, 9]).unwrap();
        let counts: Vec<u64> = h.bins.iter().map(|b| b.count).collect();
        assert_eq!(counts, [1, 0, 0, 1]);
        assert_eq!(h.occupied(), 2);
    }

    #[test]
    fn random_values_match_bit_length_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let values: Vec<u64> = (0..10_000)
            .map(|_| rng.random_range(1..=1_000_000))
            .collect();
        let h = log_bin(&values).unwrap();
        let mut oracle = [0u64; 64];
        for &v in &values {
            let bit_length = 64 - v.leading_zeros();
            oracle[(bit_length - 1) as usize] += 1;
        }
        for b in &h.bins {
            assert_eq!(b.count, oracle[b.exponent as usize]);
        }
        assert_eq!(h.bins.iter().map(|b| b.count).sum::<u64>(), 10_000);
    }

    #[test]
    fn representatives() {
        let h = LogBinnedHistogram {
            bins: vec![LogBin {
                exponent: 2,
                count: 3,
            }],
            total: 3,
        };
        assert_eq!(
            h.representatives(PointConvention::default()),
            vec![(4.0, 3.0)]
        );
        let geo = PointConvention {
            representative: Representative::Geometric,
            ..Default::default()
        };
        let (x, y) = h.representatives(geo)[0];
        assert!((x - 32f64.sqrt()).abs() < 1e-12 && y == 3.0);
        let density = PointConvention {
            scale: Scale::Density,
            ..Default::default()
        };
        assert_eq!(h.representatives(density), vec![(4.0, 0.75)]);
        let empty = LogBinnedHistogram {
            bins: vec![LogBin {
                exponent: 1,
                count: 0,
            }],
            total: 0,
        };
        assert!(empty.representatives(PointConvention::default()).is_empty());
    }

    #[test]
    fn ccdf_examples() {
        let c = ccdf(&[1, 2, 3]).unwrap();
        let pts: Vec<(f64, u64)> = c.points.iter().map(|p| (p.x, p.at_least)).collect();
        assert_eq!(pts, [(1.0, 3), (2.0, 2), (3.0, 1)]);
        assert_eq!(c.n, 3);
        let c = ccdf(&[7, 7, 7]).unwrap();
        assert_eq!(c.iter().collect::<Vec<_>>(), [(7.0, 1.0)]);
        assert!(ccdf(&[]).is_err());
        assert!(ccdf(&[0, 1]).is_err());
        assert!(ccdf_real(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn ccdf_matches_quadratic_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // Pareto-like integers: floor(u^(-1/1.2))
        let values: Vec<u64> = (0..10_000)
            .map(|_| {
                let u: f64 = rng.random_range(f64::EPSILON..1.0);
                u.powf(-1.0 / 1.2).floor().min(1e15) as u64
            })
            .collect();
        let c = ccdf(&values).unwrap();
        for p in &c.points {
            let count = values.iter().filter(|&&v| v as f64 >= p.x).count() as u64;
            assert_eq!(p.at_least, count);
        }
        let mut distinct = values.clone();
        distinct.sort_unstable();
        distinct.dedup();
        assert_eq!(c.len(), distinct.len());
    }

    proptest! {
        #[test]
        fn log_bin_properties(mut values in prop::collection::vec(1u64..u64::MAX, 0..200), seed in any::<u64>()) {
            let h = log_bin(&values).unwrap();
            prop_assert_eq!(h.bins.iter().map(|b| b.count).sum::<u64>(), values.len() as u64);
            for &v in &values {
                prop_assert_eq!(h.bins.iter().filter(|b| b.contains(v)).count(), 1);
            }
            for w in h.bins.windows(2) {
                prop_assert_eq!(w[0].upper(), w[1].lower());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..values.len()).rev() {
                values.swap(i, rng.random_range(0..=i));
            }
            prop_assert_eq!(log_bin(&values).unwrap(), h);
        }

        #[test]
        fn ccdf_is_nonincreasing_and_starts_at_one(values in prop::collection::vec(1u64..1000, 1..300)) {
            let c = ccdf(&values).unwrap();
            let probs: Vec<f64> = c.iter().map(|(_, p)| p).collect();
            prop_assert_eq!(probs[0], 1.0);
            prop_assert!(probs.windows(2).all(|w| w[1] < w[0]));
            prop_assert!(probs.iter().all(|&p| p > 0.0));
        }
    }
}
