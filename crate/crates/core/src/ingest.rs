//! CSV traffic-record ingestion and record-count windowing.

use std::io::{Read, Write};
use std::num::NonZeroUsize;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::TrafficMatrix;

/// Canonical header written by [`write_csv`] and recognised by the default schema.
pub const CANONICAL_HEADER: [&str; 4] = ["time", "source", "destination", "packets"];

/// One observed `(time, source, destination, packets)` event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TrafficRecord {
    pub time: u64,
    pub source: String,
    pub destination: String,
    pub packets: u64,
}

/// How a schema field locates its column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    /// Header name; requires a header row.
    Name(String),
    /// Zero-based field position.
    Index(usize),
    /// Header name when the header has it, otherwise the fixed position.
    Auto { name: &'static str, index: usize },
}

impl ColumnRef {
    /// Interprets a CLI value: all digits is an index, anything else a name.
    pub fn parse(value: &str) -> Self {
        match value.parse::<usize>() {
            Ok(i) => Self::Index(i),
            Err(_) => Self::Name(value.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaConfig {
    pub time: ColumnRef,
    pub source: ColumnRef,
    pub destination: ColumnRef,
    /// `None` means every row is a single packet.
    pub packets: Option<ColumnRef>,
    pub has_header: bool,
    pub delimiter: u8,
    /// Downgrade row errors to skipped rows instead of failing the parse.
    pub skip_bad_rows: bool,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        Self {
            time: ColumnRef::Auto {
                name: CANONICAL_HEADER[0],
                index: 0,
            },
            source: ColumnRef::Auto {
                name: CANONICAL_HEADER[1],
                index: 1,
            },
            destination: ColumnRef::Auto {
                name: CANONICAL_HEADER[2],
                index: 2,
            },
            packets: Some(ColumnRef::Auto {
                name: CANONICAL_HEADER[3],
                index: 3,
            }),
            has_header: true,
            delimiter: b',',
            skip_bad_rows: false,
        }
    }
}

impl SchemaConfig {
    /// Per-packet rows: no packets column, every row counts as one packet.
    pub fn implicit_one(mut self) -> Self {
        self.packets = None;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedRow {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParseOutcome {
    pub records: Vec<TrafficRecord>,
    /// Rows dropped under `skip_bad_rows`, in file order.
    pub skipped: Vec<SkippedRow>,
}

#[derive(Debug, Clone, Copy)]
struct Resolved {
    time: usize,
    source: usize,
    destination: usize,
    packets: Option<usize>,
}

impl Resolved {
    fn max_index(&self) -> usize {
        [self.time, self.source, self.destination]
            .into_iter()
            .chain(self.packets)
            .max()
            .unwrap_or(0)
    }
}

fn resolve(
    field: &str,
    column: &ColumnRef,
    header: Option<&csv::StringRecord>,
    width: usize,
) -> Result<usize> {
    let schema_err = |reason: String| Error::Schema {
        column: field.to_string(),
        reason,
    };
    let index = match column {
        ColumnRef::Name(name) => {
            let header = header
                .ok_or_else(|| schema_err(format!("named `{name}` but the input has no header")))?;
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| schema_err(format!("`{name}` not found in header")))?
        }
        ColumnRef::Index(i) => *i,
        ColumnRef::Auto { name, index } => header
            .and_then(|h| h.iter().position(|f| f == *name))
            .unwrap_or(*index),
    };
    if index >= width {
        return Err(schema_err(format!(
            "at position {index} but rows have only {width} fields"
        )));
    }
    Ok(index)
}

/// Parses traffic records from CSV text.
///
/// Row errors carry the 1-based line number. With `skip_bad_rows` they are
/// collected in [`ParseOutcome::skipped`] instead.
pub fn parse_csv<R: Read>(input: R, schema: &SchemaConfig) -> Result<ParseOutcome> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .delimiter(schema.delimiter)
        .from_reader(input);

    let mut rows = reader.records();
    let mut first_data: Option<csv::StringRecord> = None;
    let header = if schema.has_header {
        match rows.next() {
            Some(row) => Some(row.map_err(csv_err)?),
            None => return Ok(ParseOutcome::default()),
        }
    } else {
        match rows.next() {
            Some(row) => first_data = Some(row.map_err(csv_err)?),
            None => return Ok(ParseOutcome::default()),
        }
        None
    };
    let width = header
        .as_ref()
        .or(first_data.as_ref())
        .map_or(0, |r| r.len());

    let resolved = Resolved {
        time: resolve("time", &schema.time, header.as_ref(), width)?,
        source: resolve("source", &schema.source, header.as_ref(), width)?,
        destination: resolve("destination", &schema.destination, header.as_ref(), width)?,
        packets: schema
            .packets
            .as_ref()
            .map(|c| resolve("packets", c, header.as_ref(), width))
            .transpose()?,
    };
    let mut used = vec![resolved.time, resolved.source, resolved.destination];
    used.extend(resolved.packets);
    used.sort_unstable();
    if used.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Schema {
            column: "*".into(),
            reason: "two fields resolve to the same column".into(),
        });
    }

    let mut outcome = ParseOutcome::default();
    for row in first_data.into_iter().map(Ok).chain(rows) {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row, &resolved) {
            Ok(record) => outcome.records.push(record),
            Err(reason) if schema.skip_bad_rows => {
                outcome.skipped.push(SkippedRow { line, reason })
            }
            Err(reason) => return Err(Error::Row { line, reason }),
        }
    }
    Ok(outcome)
}

fn parse_row(
    row: &csv::StringRecord,
    cols: &Resolved,
) -> std::result::Result<TrafficRecord, String> {
    if row.len() <= cols.max_index() {
        return Err(format!(
            "expected at least {} fields, found {}",
            cols.max_index() + 1,
            row.len()
        ));
    }
    let time = row[cols.time]
        .parse::<u64>()
        .map_err(|_| format!("time `{}` is not a nonnegative integer", &row[cols.time]))?;
    let source = &row[cols.source];
    let destination = &row[cols.destination];
    if source.is_empty() {
        return Err("empty source".into());
    }
    if destination.is_empty() {
        return Err("empty destination".into());
    }
    let packets = match cols.packets {
        None => 1,
        Some(i) => {
            let field = &row[i];
            let packets = field
                .parse::<u64>()
                .map_err(|_| format!("packets `{field}` is not a positive integer"))?;
            if packets == 0 {
                return Err("packets must be at least 1".into());
            }
            packets
        }
    };
    Ok(TrafficRecord {
        time,
        source: source.to_string(),
        destination: destination.to_string(),
        packets,
    })
}

fn csv_err(e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Row {
            line: p.line(),
            reason: e.to_string(),
        },
        None => Error::Csv(e.to_string()),
    }
}

/// Writes records with the canonical header.
pub fn write_csv<W: Write>(records: &[TrafficRecord], out: W) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CANONICAL_HEADER)?;
    for r in records {
        writer.write_record([
            r.time.to_string().as_str(),
            &r.source,
            &r.destination,
            r.packets.to_string().as_str(),
        ])?;
    }
    writer.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowSpec {
    #[default]
    WholeFile,
    /// Consecutive blocks of N records; the last block may be short.
    FixedCount(NonZeroUsize),
}

/// Record blocks for each window, in stream order.
pub fn window_slices(records: &[TrafficRecord], spec: WindowSpec) -> Vec<&[TrafficRecord]> {
    match spec {
        WindowSpec::WholeFile => vec![records],
        WindowSpec::FixedCount(n) => records.chunks(n.get()).collect(),
    }
}

/// One matrix per window.
pub fn window(records: &[TrafficRecord], spec: WindowSpec) -> Result<Vec<TrafficMatrix>> {
    window_slices(records, spec)
        .into_iter()
        .map(TrafficMatrix::from_records)
        .collect()
}
