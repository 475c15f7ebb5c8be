//! Seeded synthetic traffic.
//!
//! # Generator
//!
//! The stream is xorshift64* seeded through one SplitMix64 step:
//!
//! ```text
//! state = splitmix64(seed)             (0 is replaced by 0x9E3779B97F4A7C15)
//! next:  state ^= state >> 12
//!        state ^= state << 25
//!        state ^= state >> 27
//!        return state * 0x2545F4914F6CDD1D   (mod 2^64)
//! ```
//!
//! Bounded integers use Lemire's widening multiply with rejection, so every
//! draw after table construction is integer arithmetic. Record `i` consumes,
//! in order, one draw for its source and (for the random models) one for its
//! destination.
//!
//! # Models
//!
//! * `Zipf { alpha }`: destination rank `r` (0-based) has weight
//!   `(r + 1)^(-1/(alpha - 1))`, so destination fan-in follows
//!   `P(k) ∝ k^(-alpha)`. Weights are quantized once into an integer
//!   cumulative table and sampled by inverse CDF.
//! * `UniformRandom`: source and destination uniform.
//! * `FixedDegree { k }`: record `i` goes from source `i mod S` to the
//!   `(i div S) mod k`-th of that source's `k` distinct destinations.
//!
//! Every record carries one packet and `time = i`.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::ingest::TrafficRecord;

/// xorshift64* generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorShift64Star {
    state: u64,
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        let state = match splitmix64(seed) {
            0 => 0x9E37_79B9_7F4A_7C15,
            s => s,
        };
        Self { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state ^= self.state >> 12;
        self.state ^= self.state << 25;
        self.state ^= self.state >> 27;
        self.state.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in `[0, bound)`; `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let mut m = u128::from(self.next_u64()) * u128::from(bound);
        if (m as u64) < bound {
            let threshold = bound.wrapping_neg() % bound;
            while (m as u64) < threshold {
                m = u128::from(self.next_u64()) * u128::from(bound);
            }
        }
        (m >> 64) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthModel {
    Zipf { alpha: f64 },
    UniformRandom,
    FixedDegree { k: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    pub n_records: u64,
    pub n_sources: u64,
    pub n_destinations: u64,
    pub model: SynthModel,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.n_records == 0 || self.n_sources == 0 || self.n_destinations == 0 {
            return bad("record, source and destination counts must be positive".into());
        }
        match self.model {
            SynthModel::Zipf { alpha } if !(alpha > 1.0 && alpha.is_finite()) => {
                bad(format!("zipf alpha must be > 1, got {alpha}"))
            }
            SynthModel::FixedDegree { k } if k == 0 || k > self.n_destinations => bad(format!(
                "fixed degree k = {k} must lie in 1..={}",
                self.n_destinations
            )),
            SynthModel::FixedDegree { k } if self.n_records < self.n_sources.saturating_mul(k) => {
                bad(format!(
                    "fixed degree needs n_records >= n_sources * k = {}",
                    self.n_sources.saturating_mul(k)
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Integer cumulative table for inverse-CDF rank sampling.
#[derive(Debug, Clone)]
pub struct RankTable {
    cumulative: Vec<u64>,
}

impl RankTable {
    /// Ranks `0..n` with weight `(r + 1)^(-exponent)`.
    pub fn new(n: u64, exponent: f64) -> Self {
        let weights: Vec<f64> = (1..=n).map(|r| (r as f64).powf(-exponent)).collect();
        let total: f64 = weights.iter().sum();
        let scale = 2f64.powi(62) / total;
        let mut acc = 0u64;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += ((w * scale).round() as u64).max(1);
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn sample(&self, rng: &mut XorShift64Star) -> u64 {
        let total = *self.cumulative.last().expect("nonempty table");
        let u = rng.below(total);
        self.cumulative.partition_point(|&c| c <= u) as u64
    }

    pub fn probability(&self, rank: usize) -> f64 {
        let total = *self.cumulative.last().expect("nonempty table") as f64;
        let prev = if rank == 0 {
            0
        } else {
            self.cumulative[rank - 1]
        };
        (self.cumulative[rank] - prev) as f64 / total
    }
}

/// Destination rank exponent that gives fan-in tail `k^(-alpha)`.
pub fn zipf_rank_exponent(alpha: f64) -> f64 {
    1.0 / (alpha - 1.0)
}

pub fn generate(spec: &SynthSpec) -> Result<Vec<TrafficRecord>> {
    spec.validate()?;
    let mut rng = XorShift64Star::new(spec.seed);
    let record = |i: u64, s: u64, d: u64| TrafficRecord {
        time: i,
        source: format!("s{s}"),
        destination: format!("d{d}"),
        packets: 1,
    };

    let records = match spec.model {
        SynthModel::Zipf { alpha } => {
            let table = RankTable::new(spec.n_destinations, zipf_rank_exponent(alpha));
            (0..spec.n_records)
                .map(|i| {
                    let s = rng.below(spec.n_sources);
                    let d = table.sample(&mut rng);
                    record(i, s, d)
                })
                .collect()
        }
        SynthModel::UniformRandom => (0..spec.n_records)
            .map(|i| {
                let s = rng.below(spec.n_sources);
                let d = rng.below(spec.n_destinations);
                record(i, s, d)
            })
            .collect(),
        SynthModel::FixedDegree { k } => {
            let targets: Vec<Vec<u64>> = (0..spec.n_sources)
                .map(|_| {
                    let mut seen = HashSet::new();
                    let mut picks = Vec::with_capacity(k as usize);
                    while (picks.len() as u64) < k {
                        let d = rng.below(spec.n_destinations);
                        if seen.insert(d) {
                            picks.push(d);
                        }
                    }
                    picks
                })
                .collect();
            (0..spec.n_records)
                .map(|i| {
                    let s = i % spec.n_sources;
                    let d = targets[s as usize][((i / spec.n_sources) % k) as usize];
                    record(i, s, d)
                })
                .collect()
        }
    };
    Ok(records)
}
