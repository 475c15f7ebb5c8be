//! Source- and destination-level network quantities.
//!
//! | quantity          | expression   |
//! |-------------------|--------------|
//! | source packets    | `A·1`        |
//! | source fan-out    | `|A|₀·1`     |
//! | destination packets | `1ᵀ·A`     |
//! | destination fan-in  | `1ᵀ·|A|₀`  |

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{CountVector, TrafficMatrix};

pub fn source_packets(a: &TrafficMatrix) -> CountVector {
    a.row_sum()
}

pub fn dest_packets(a: &TrafficMatrix) -> CountVector {
    a.col_sum()
}

/// Distinct destinations per source.
pub fn source_fanout(a: &TrafficMatrix) -> CountVector {
    a.zero_norm().row_sum()
}

/// Distinct sources per destination.
pub fn dest_fanin(a: &TrafficMatrix) -> CountVector {
    a.zero_norm().col_sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Scalars {
    pub valid_packets: u128,
    pub unique_links: u64,
    pub unique_sources: u64,
    pub unique_destinations: u64,
}

pub fn scalars(a: &TrafficMatrix) -> Scalars {
    scalars_from(a, &source_fanout(a), &dest_fanin(a))
}

fn scalars_from(a: &TrafficMatrix, fanout: &CountVector, fanin: &CountVector) -> Scalars {
    let occupied = |v: &CountVector| v.values().iter().filter(|&&x| x > 0).count() as u64;
    Scalars {
        valid_packets: a.total(),
        unique_links: a.nnz() as u64,
        unique_sources: occupied(fanout),
        unique_destinations: occupied(fanin),
    }
}

/// The four per-entity vectors plus aggregate scalars of one matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuantityReport {
    pub source_packets: CountVector,
    pub source_fanout: CountVector,
    pub dest_packets: CountVector,
    pub dest_fanin: CountVector,
    pub scalars: Scalars,
}

impl QuantityReport {
    pub fn compute(a: &TrafficMatrix) -> Self {
        let source_fanout = source_fanout(a);
        let dest_fanin = dest_fanin(a);
        let scalars = scalars_from(a, &source_fanout, &dest_fanin);
        Self {
            source_packets: source_packets(a),
            source_fanout,
            dest_packets: dest_packets(a),
            dest_fanin,
            scalars,
        }
    }

    /// Checks the conservation identities between vectors and scalars.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let s = &self.scalars;
        if self.source_packets.sum() != s.valid_packets
            || self.dest_packets.sum() != s.valid_packets
        {
            return Err("packet totals disagree".into());
        }
        let links = u128::from(s.unique_links);
        if self.source_fanout.sum() != links || self.dest_fanin.sum() != links {
            return Err("fan-out/fan-in totals disagree with link count".into());
        }
        Ok(())
    }
}

/// Top `k` entries by value, descending; ties keep label order.
pub fn brightness_rank(v: &CountVector, k: usize) -> Result<Vec<(String, u64)>> {
    if k == 0 {
        return Err(Error::Domain("brightness rank needs k >= 1".into()));
    }
    let mut ranked: Vec<(usize, u64)> = v.values().iter().copied().enumerate().collect();
    // stable sort keeps first-appearance order among equal values
    ranked.sort_by_key(|&(_, value)| std::cmp::Reverse(value));
    Ok(ranked
        .into_iter()
        .take(k)
        .map(|(i, value)| (v.labels()[i].clone(), value))
        .collect())
}
