//! Stable JSON rendering: pretty-printed, floats rounded to 12 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use tailscope::distfit::TailDiagnostic;
use tailscope::quantities::Scalars;

use crate::error::CliError;
use crate::report::{
    AnalysisReport, Brightness, FitSection, Histograms, InputDescriptor, Settings, WindowAnalysis,
};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant decimal digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

struct Rounding<'a>(PrettyFormatter<'a>);

impl Formatter for Rounding<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        self.0.write_f64(w, round12(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        Rounding(PrettyFormatter::with_indent(b"  ")),
    );
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Internal(format!("json: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Internal(format!("json: {e}")))
}

/// Which parts of each window a command reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Ingest,
    Quantities,
    Bin,
    Fit,
    Diagnose,
    Full,
}

#[derive(Serialize)]
pub struct ReportView<'a> {
    schema: &'a str,
    command: &'static str,
    input: &'a InputDescriptor,
    settings: &'a Settings,
    windows: Vec<WindowView<'a>>,
    warnings: &'a [String],
}

#[derive(Serialize)]
struct WindowView<'a> {
    index: usize,
    first_record: usize,
    records: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    scalars: Option<&'a Scalars>,
    #[serde(skip_serializing_if = "Option::is_none")]
    brightness: Option<&'a Brightness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    histograms: Option<&'a Histograms>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<&'a FitSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostic: Option<Option<&'a TailDiagnostic>>,
}

impl<'a> ReportView<'a> {
    pub fn new(report: &'a AnalysisReport, section: Section) -> Self {
        use Section as S;
        let has = |set: &[Section]| section == S::Full || set.contains(&section);
        let window = |w: &'a WindowAnalysis| WindowView {
            index: w.index,
            first_record: w.first_record,
            records: w.records,
            scalars: has(&[S::Ingest, S::Quantities]).then_some(&w.scalars),
            brightness: has(&[S::Quantities]).then_some(&w.brightness),
            histograms: has(&[S::Bin]).then_some(&w.histograms),
            fit: has(&[S::Fit]).then_some(&w.fit),
            diagnostic: has(&[S::Diagnose]).then_some(w.diagnostic.as_ref()),
        };
        Self {
            schema: report.schema,
            command: match section {
                S::Ingest => "ingest",
                S::Quantities => "quantities",
                S::Bin => "bin",
                S::Fit => "fit",
                S::Diagnose => "diagnose",
                S::Full => "run",
            },
            input: &report.input,
            settings: &report.settings,
            windows: report.windows.iter().map(window).collect(),
            warnings: &report.warnings,
        }
    }
}

pub fn render(report: &AnalysisReport, section: Section) -> Result<String, CliError> {
    to_string(&ReportView::new(report, section))
}
