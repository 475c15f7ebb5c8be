//! End-to-end analysis: ingest → window → quantities → binning → fits → diagnostic.

use std::fs::File;
use std::io::BufReader;
use std::num::NonZeroUsize;
use std::path::Path;

use rayon::prelude::*;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use tailscope::binning::{PointConvention, Representative, Scale};
use tailscope::distfit::tail::{DEFAULT_TAIL_FRACTION, DEFAULT_THRESHOLD_M};
use tailscope::distfit::{
    compare_models, fit_censored, fit_power_law, heavy_tail_diagnostic, CensoredBins,
    CensoredFitResult, Family, ModelScore, PowerLawFit, TailDiagnostic,
};
use tailscope::ingest::{window_slices, SkippedRow};
use tailscope::quantities::{QuantityReport, Scalars};
use tailscope::{
    brightness_rank, ccdf, log_bin, parse_csv, ColumnRef, CountVector, EmpiricalCcdf,
    LogBinnedHistogram, SchemaConfig, TrafficMatrix, TrafficRecord, WindowSpec,
};

use crate::error::CliError;

pub const SCHEMA_ID: &str = "tailscope/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum QuantityKind {
    SourcePackets,
    SourceFanout,
    DestPackets,
    DestFanin,
}

impl QuantityKind {
    pub fn name(self) -> &'static str {
        match self {
            QuantityKind::SourcePackets => "source-packets",
            QuantityKind::SourceFanout => "source-fanout",
            QuantityKind::DestPackets => "dest-packets",
            QuantityKind::DestFanin => "dest-fanin",
        }
    }

    fn select(self, q: &QuantityReport) -> &CountVector {
        match self {
            QuantityKind::SourcePackets => &q.source_packets,
            QuantityKind::SourceFanout => &q.source_fanout,
            QuantityKind::DestPackets => &q.dest_packets,
            QuantityKind::DestFanin => &q.dest_fanin,
        }
    }
}

/// Analysis knobs; everything here is echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub window: Option<NonZeroUsize>,
    pub quantity: QuantityKind,
    pub exclude_top: usize,
    pub representative: Representative,
    pub scale: Scale,
    pub tail_fraction: f64,
    pub threshold_m: f64,
    pub top_k: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            window: None,
            quantity: QuantityKind::DestFanin,
            exclude_top: 1,
            representative: Representative::Lower,
            scale: Scale::Frequency,
            tail_fraction: DEFAULT_TAIL_FRACTION,
            threshold_m: DEFAULT_THRESHOLD_M,
            top_k: 10,
        }
    }
}

impl Settings {
    pub fn convention(&self) -> PointConvention {
        PointConvention {
            representative: self.representative,
            scale: self.scale,
        }
    }

    fn window_spec(&self) -> WindowSpec {
        self.window
            .map_or(WindowSpec::WholeFile, WindowSpec::FixedCount)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDescriptor {
    pub path: String,
    pub rows: usize,
    pub skipped_rows: Vec<SkippedRow>,
    pub schema: SchemaDescriptor,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaDescriptor {
    pub time: String,
    pub source: String,
    pub destination: String,
    pub packets: String,
    pub has_header: bool,
    pub delimiter: String,
}

impl SchemaDescriptor {
    pub fn describe(s: &SchemaConfig) -> Self {
        fn col(c: &ColumnRef) -> String {
            match c {
                ColumnRef::Name(n) => format!("name:{n}"),
                ColumnRef::Index(i) => format!("index:{i}"),
                ColumnRef::Auto { name, index } => format!("auto:{name}|{index}"),
            }
        }
        Self {
            time: col(&s.time),
            source: col(&s.source),
            destination: col(&s.destination),
            packets: s
                .packets
                .as_ref()
                .map_or_else(|| "implicit-one".to_string(), col),
            has_header: s.has_header,
            delimiter: (s.delimiter as char).to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Brightness {
    #[serde(serialize_with = "ranked")]
    pub dest_fanin: Vec<(String, u64)>,
    #[serde(serialize_with = "ranked")]
    pub dest_packets: Vec<(String, u64)>,
    #[serde(serialize_with = "ranked")]
    pub source_fanout: Vec<(String, u64)>,
    #[serde(serialize_with = "ranked")]
    pub source_packets: Vec<(String, u64)>,
}

fn ranked<S: Serializer>(list: &[(String, u64)], s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry<'a> {
        label: &'a str,
        value: u64,
    }
    s.collect_seq(list.iter().map(|(label, value)| Entry {
        label,
        value: *value,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histograms {
    #[serde(serialize_with = "histogram")]
    pub source_packets: LogBinnedHistogram,
    #[serde(serialize_with = "histogram")]
    pub source_fanout: LogBinnedHistogram,
    #[serde(serialize_with = "histogram")]
    pub dest_packets: LogBinnedHistogram,
    #[serde(serialize_with = "histogram")]
    pub dest_fanin: LogBinnedHistogram,
}

impl Histograms {
    pub fn get(&self, q: QuantityKind) -> &LogBinnedHistogram {
        match q {
            QuantityKind::SourcePackets => &self.source_packets,
            QuantityKind::SourceFanout => &self.source_fanout,
            QuantityKind::DestPackets => &self.dest_packets,
            QuantityKind::DestFanin => &self.dest_fanin,
        }
    }
}

fn histogram<S: Serializer>(h: &LogBinnedHistogram, s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Bin {
        exponent: u32,
        lower: u128,
        upper: u128,
        count: u64,
    }
    #[derive(Serialize)]
    struct View {
        total: u64,
        bins: Vec<Bin>,
    }
    View {
        total: h.total,
        bins: h
            .bins
            .iter()
            .map(|b| Bin {
                exponent: b.exponent,
                lower: b.lower(),
                upper: b.upper(),
                count: b.count,
            })
            .collect(),
    }
    .serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSection {
    pub quantity: QuantityKind,
    #[serde(skip)]
    pub bins: CensoredBins,
    pub power_law: Option<PowerLawFit>,
    #[serde(serialize_with = "censored_fits")]
    pub censored: Vec<CensoredFitResult>,
    pub ranking: Vec<ModelScore>,
}

fn censored_fits<S: Serializer>(fits: &[CensoredFitResult], s: S) -> Result<S::Ok, S::Error> {
    struct Params<'a>(&'a CensoredFitResult);
    impl Serialize for Params<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            let names = self.0.family.param_names();
            let mut map = s.serialize_map(Some(names.len()))?;
            for (name, value) in names.iter().zip(&self.0.params) {
                map.serialize_entry(name, value)?;
            }
            map.end()
        }
    }
    #[derive(Serialize)]
    struct View<'a> {
        family: Family,
        params: Params<'a>,
        log_likelihood: f64,
        aic: f64,
        converged: bool,
        iterations: usize,
    }
    let mut seq = s.serialize_seq(Some(fits.len()))?;
    for f in fits {
        seq.serialize_element(&View {
            family: f.family,
            params: Params(f),
            log_likelihood: f.log_likelihood,
            aic: f.aic,
            converged: f.converged,
            iterations: f.iterations,
        })?;
    }
    seq.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowAnalysis {
    pub index: usize,
    pub first_record: usize,
    pub records: usize,
    pub scalars: Scalars,
    pub brightness: Brightness,
    pub histograms: Histograms,
    pub fit: FitSection,
    #[serde(skip)]
    pub ccdf: Option<EmpiricalCcdf>,
    pub diagnostic: Option<TailDiagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub schema: &'static str,
    pub input: InputDescriptor,
    pub settings: Settings,
    pub windows: Vec<WindowAnalysis>,
    pub warnings: Vec<String>,
}

/// Parses `path` and analyzes it on a pool of `threads` workers (0 = rayon default).
pub fn run_pipeline(
    path: &Path,
    schema: &SchemaConfig,
    settings: &Settings,
    threads: usize,
) -> Result<AnalysisReport, CliError> {
    let file =
        File::open(path).map_err(|e| CliError::Input(format!("io: {}: {e}", path.display())))?;
    let parsed = parse_csv(BufReader::new(file), schema)?;
    let input = InputDescriptor {
        path: path.display().to_string(),
        rows: parsed.records.len(),
        skipped_rows: parsed.skipped,
        schema: SchemaDescriptor::describe(schema),
    };
    analyze(&parsed.records, input, settings, threads)
}

pub fn analyze(
    records: &[TrafficRecord],
    input: InputDescriptor,
    settings: &Settings,
    threads: usize,
) -> Result<AnalysisReport, CliError> {
    validate(settings)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;

    let slices = window_slices(records, settings.window_spec());
    let mut offsets = Vec::with_capacity(slices.len());
    let mut start = 0;
    for s in &slices {
        offsets.push(start);
        start += s.len();
    }

    let results: Vec<Result<(WindowAnalysis, Vec<String>), CliError>> = pool.install(|| {
        slices
            .par_iter()
            .zip(offsets.par_iter())
            .enumerate()
            .map(|(index, (slice, &first))| analyze_window(index, first, slice, settings))
            .collect()
    });

    let mut warnings: Vec<String> = input
        .skipped_rows
        .iter()
        .map(|s| format!("ingest: skipped line {}: {}", s.line, s.reason))
        .collect();
    let mut windows = Vec::with_capacity(results.len());
    for r in results {
        let (w, warn) = r?;
        warnings.extend(warn.into_iter().map(|m| format!("window {}: {m}", w.index)));
        windows.push(w);
    }
    Ok(AnalysisReport {
        schema: SCHEMA_ID,
        input,
        settings: settings.clone(),
        windows,
        warnings,
    })
}

fn validate(settings: &Settings) -> Result<(), CliError> {
    if !(settings.tail_fraction > 0.0 && settings.tail_fraction < 1.0) {
        return Err(CliError::Input(format!(
            "--tail-fraction {} must lie in (0, 1)",
            settings.tail_fraction
        )));
    }
    if !(settings.threshold_m > 0.0 && settings.threshold_m.is_finite()) {
        return Err(CliError::Input(format!(
            "--threshold-M {} must be positive",
            settings.threshold_m
        )));
    }
    if settings.top_k == 0 {
        return Err(CliError::Input("--top-k must be at least 1".into()));
    }
    Ok(())
}

fn analyze_window(
    index: usize,
    first_record: usize,
    records: &[TrafficRecord],
    settings: &Settings,
) -> Result<(WindowAnalysis, Vec<String>), CliError> {
    let matrix = TrafficMatrix::from_records(records)?;
    let q = QuantityReport::compute(&matrix);
    q.check_invariants().map_err(CliError::Internal)?;

    let bin = |v: &CountVector| log_bin(v.values()).map_err(|e| CliError::Internal(e.to_string()));
    let histograms = Histograms {
        source_packets: bin(&q.source_packets)?,
        source_fanout: bin(&q.source_fanout)?,
        dest_packets: bin(&q.dest_packets)?,
        dest_fanin: bin(&q.dest_fanin)?,
    };
    let s = &q.scalars;
    let entity_counts = [
        (&histograms.source_packets, s.unique_sources),
        (&histograms.source_fanout, s.unique_sources),
        (&histograms.dest_packets, s.unique_destinations),
        (&histograms.dest_fanin, s.unique_destinations),
    ];
    if entity_counts.iter().any(|(h, n)| h.total != *n) {
        return Err(CliError::Internal(
            "histogram totals disagree with entity counts".into(),
        ));
    }

    let top = |v: &CountVector| brightness_rank(v, settings.top_k).map_err(CliError::from);
    let brightness = Brightness {
        dest_fanin: top(&q.dest_fanin)?,
        dest_packets: top(&q.dest_packets)?,
        source_fanout: top(&q.source_fanout)?,
        source_packets: top(&q.source_packets)?,
    };

    let mut warnings = Vec::new();
    let target = settings.quantity.select(&q);
    let hist = histograms.get(settings.quantity);
    let convention = settings.convention();
    let power_law = match fit_power_law(&hist.representatives(convention), settings.exclude_top) {
        Ok(fit) => Some(fit),
        Err(e) => {
            warnings.push(format!("power-law fit refused: {e}"));
            None
        }
    };
    let bins = CensoredBins::from_histogram(hist);
    let attempts: Vec<_> = Family::ALL
        .par_iter()
        .map(|&family| (family, fit_censored(&bins, family)))
        .collect();
    let mut censored = Vec::new();
    for (family, attempt) in attempts {
        match attempt {
            Ok(fit) => {
                if !fit.converged {
                    warnings.push(format!("{} fit hit the iteration budget", family.name()));
                }
                censored.push(fit);
            }
            Err(e) => warnings.push(format!("{} fit refused: {e}", family.name())),
        }
    }
    let ranking = compare_models(&censored, power_law.as_ref(), convention, &bins);

    let (ccdf, diagnostic) = match ccdf(target.values()) {
        Ok(c) => {
            let d = heavy_tail_diagnostic(&c, settings.tail_fraction, settings.threshold_m)?;
            (Some(c), Some(d))
        }
        Err(e) => {
            warnings.push(format!("diagnostic skipped: {e}"));
            (None, None)
        }
    };

    Ok((
        WindowAnalysis {
            index,
            first_record,
            records: records.len(),
            scalars: q.scalars,
            brightness,
            histograms,
            fit: FitSection {
                quantity: settings.quantity,
                bins,
                power_law,
                censored,
                ranking,
            },
            ccdf,
            diagnostic,
        },
        warnings,
    ))
}
