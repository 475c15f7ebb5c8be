//! Sparse associative traffic matrix.
//!
//! Rows are sources, columns are destinations. Labels are kept in
//! first-appearance order and entries are stored row-major, so every
//! reduction iterates in a fixed order.

use std::collections::HashMap;

use indexmap::IndexSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::TrafficRecord;

/// One stored (nonzero) cell of a [`TrafficMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: u64,
}

/// Sparse nonnegative-integer matrix with string-labeled rows and columns.
///
/// Explicit zeros are never stored. The matrix is immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrafficMatrix {
    rows: IndexSet<String>,
    cols: IndexSet<String>,
    entries: Vec<Entry>,
}

impl TrafficMatrix {
    /// Aggregates `(source, destination, packets)` triples.
    ///
    /// Entry `(s, d)` is the sum of packets over all records with that pair.
    /// A zero packet count, an empty id or a `u64` overflow is rejected.
    pub fn build<I, S, D>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, D, u64)>,
        S: AsRef<str>,
        D: AsRef<str>,
    {
        let mut rows = IndexSet::new();
        let mut cols = IndexSet::new();
        let mut cells: HashMap<(usize, usize), u64> = HashMap::new();
        // row and column totals must fit too, so reductions cannot overflow
        let mut row_totals: Vec<u64> = Vec::new();
        let mut col_totals: Vec<u64> = Vec::new();

        for (index, (src, dst, packets)) in records.into_iter().enumerate() {
            let (src, dst) = (src.as_ref(), dst.as_ref());
            if packets == 0 {
                return Err(Error::MalformedRecord {
                    index,
                    reason: "packet count must be at least 1".into(),
                });
            }
            if src.is_empty() || dst.is_empty() {
                return Err(Error::MalformedRecord {
                    index,
                    reason: "empty source or destination id".into(),
                });
            }
            let row = intern(&mut rows, src);
            let col = intern(&mut cols, dst);
            row_totals.resize(rows.len(), 0);
            col_totals.resize(cols.len(), 0);
            let overflow = || Error::Overflow {
                source_id: src.to_string(),
                destination_id: dst.to_string(),
            };
            row_totals[row] = row_totals[row].checked_add(packets).ok_or_else(overflow)?;
            col_totals[col] = col_totals[col].checked_add(packets).ok_or_else(overflow)?;
            *cells.entry((row, col)).or_insert(0) += packets;
        }

        let mut entries: Vec<Entry> = cells
            .into_iter()
            .map(|((row, col), value)| Entry { row, col, value })
            .collect();
        entries.sort_unstable();
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_records(records: &[TrafficRecord]) -> Result<Self> {
        Self::build(
            records
                .iter()
                .map(|r| (r.source.as_str(), r.destination.as_str(), r.packets)),
        )
    }

    pub fn row_labels(&self) -> impl ExactSizeIterator<Item = &str> {
        self.rows.iter().map(String::as_str)
    }

    pub fn col_labels(&self) -> impl ExactSizeIterator<Item = &str> {
        self.cols.iter().map(String::as_str)
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.rows.get_index_of(label)
    }

    pub fn col_index(&self, label: &str) -> Option<usize> {
        self.cols.get_index_of(label)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    /// Stored entries in row-major order.
    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Value at `(source, destination)`, zero when not stored.
    pub fn get(&self, source: &str, destination: &str) -> u64 {
        let (Some(row), Some(col)) = (self.row_index(source), self.col_index(destination)) else {
            return 0;
        };
        self.entries
            .binary_search_by(|e| (e.row, e.col).cmp(&(row, col)))
            .map(|i| self.entries[i].value)
            .unwrap_or(0)
    }

    /// Sum of every stored entry, `1ᵀ·A·1`.
    pub fn total(&self) -> u128 {
        self.entries.iter().map(|e| u128::from(e.value)).sum()
    }

    /// `|A|₀`: same pattern, every stored value replaced by 1.
    pub fn zero_norm(&self) -> Self {
        Self {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            entries: self
                .entries
                .iter()
                .map(|e| Entry { value: 1, ..*e })
                .collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut entries: Vec<Entry> = self
            .entries
            .iter()
            .map(|e| Entry {
                row: e.col,
                col: e.row,
                value: e.value,
            })
            .collect();
        entries.sort_unstable();
        Self {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            entries,
        }
    }

    /// `A·1`, one value per row label.
    pub fn row_sum(&self) -> CountVector {
        let mut values = vec![0u64; self.rows.len()];
        for e in &self.entries {
            values[e.row] += e.value;
        }
        CountVector::from_parts(self.rows.iter().cloned().collect(), values)
    }

    /// `1ᵀ·A`, returned as a vector over column labels.
    pub fn col_sum(&self) -> CountVector {
        let mut values = vec![0u64; self.cols.len()];
        for e in &self.entries {
            values[e.col] += e.value;
        }
        CountVector::from_parts(self.cols.iter().cloned().collect(), values)
    }
}

fn intern(set: &mut IndexSet<String>, label: &str) -> usize {
    match set.get_index_of(label) {
        Some(i) => i,
        None => set.insert_full(label.to_string()).0,
    }
}

/// Labeled vector of nonnegative counts, typically a matrix reduction.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CountVector {
    labels: Vec<String>,
    values: Vec<u64>,
}

impl CountVector {
    /// Pairs labels with values; rejects length mismatch and duplicate labels.
    pub fn new(labels: Vec<String>, values: Vec<u64>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::Domain(format!(
                "{} labels but {} values",
                labels.len(),
                values.len()
            )));
        }
        let mut seen = std::collections::HashSet::with_capacity(labels.len());
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::Domain(format!("duplicate label `{dup}`")));
        }
        Ok(Self { labels, values })
    }

    pub(crate) fn from_parts(labels: Vec<String>, values: Vec<u64>) -> Self {
        debug_assert_eq!(labels.len(), values.len());
        Self { labels, values }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<u64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.labels
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
    }

    pub fn sum(&self) -> u128 {
        self.values.iter().map(|&v| u128::from(v)).sum()
    }

    /// Label → value map, for order-insensitive comparisons.
    pub fn to_map(&self) -> HashMap<&str, u64> {
        self.iter().collect()
    }
}
