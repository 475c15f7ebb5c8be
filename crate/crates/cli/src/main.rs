use std::fs;
use std::io::{self, Write};
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tailscope::binning::{Representative, Scale};
use tailscope::ingest::write_csv;
use tailscope::synth::{generate, SynthModel, SynthSpec};
use tailscope::{ColumnRef, SchemaConfig};
use tailscope_cli::json::{render, Section};
use tailscope_cli::svg::{emit_plot, PlotKind};
use tailscope_cli::{run_pipeline, CliError, QuantityKind, Settings};

#[derive(Parser)]
#[command(
    name = "tailscope",
    version,
    about = "Heavy-tail analysis of network traffic matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a trace and report row counts and scalars.
    Ingest(Analyze),
    /// Per-entity quantities: scalars and brightest entities.
    Quantities(Analyze),
    /// Power-of-two histograms of the four quantities.
    Bin(Analyze),
    /// Power-law and censored-family fits with AIC ranking.
    Fit(Analyze),
    /// Exponential-ratio tail diagnostic.
    Diagnose(Analyze),
    /// Render one SVG plot.
    Plot {
        #[command(flatten)]
        analyze: Analyze,
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long, default_value_t = 0)]
        window_index: usize,
    },
    /// Whole pipeline; optionally writes every plot.
    Run {
        #[command(flatten)]
        analyze: Analyze,
        /// Directory for SVG plots.
        #[arg(long)]
        svg_dir: Option<PathBuf>,
    },
    /// Generate a synthetic trace in canonical CSV.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Analyze {
    /// Input CSV trace.
    input: PathBuf,
    #[command(flatten)]
    schema: SchemaArgs,
    /// Records per window; whole file when absent.
    #[arg(long)]
    window: Option<NonZeroUsize>,
    #[arg(long, value_enum, default_value = "dest-fanin")]
    quantity: QuantityKind,
    /// Highest occupied bins left out of the power-law fit.
    #[arg(long, default_value_t = 1)]
    exclude_top: usize,
    #[arg(long, value_enum, default_value = "lower")]
    representative: RepresentativeArg,
    /// Divide bin counts by bin width.
    #[arg(long)]
    density: bool,
    #[arg(long, default_value_t = 0.5)]
    tail_fraction: f64,
    #[arg(long = "threshold-M", default_value_t = 10.0)]
    threshold_m: f64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SchemaArgs {
    /// Column name or zero-based index.
    #[arg(long)]
    col_time: Option<String>,
    #[arg(long)]
    col_src: Option<String>,
    #[arg(long)]
    col_dst: Option<String>,
    #[arg(long, conflicts_with = "implicit_one")]
    col_pkts: Option<String>,
    #[arg(long)]
    no_header: bool,
    /// Every record counts as one packet.
    #[arg(long)]
    implicit_one: bool,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Skip malformed rows with a warning instead of failing.
    #[arg(long)]
    skip_bad_rows: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RepresentativeArg {
    Lower,
    Geometric,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Zipf,
    Uniform,
    FixedDegree,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    records: u64,
    #[arg(long, default_value_t = 100_000)]
    sources: u64,
    #[arg(long, default_value_t = 10_000)]
    destinations: u64,
    #[arg(long, value_enum, default_value = "zipf")]
    model: ModelArg,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    degree: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

impl SchemaArgs {
    fn config(&self) -> Result<SchemaConfig, CliError> {
        if !self.delimiter.is_ascii() {
            return Err(CliError::Input(format!(
                "ingest: delimiter {:?} is not ASCII",
                self.delimiter
            )));
        }
        let mut cfg = SchemaConfig {
            has_header: !self.no_header,
            delimiter: self.delimiter as u8,
            skip_bad_rows: self.skip_bad_rows,
            ..SchemaConfig::default()
        };
        let set = |slot: &mut ColumnRef, v: &Option<String>| {
            if let Some(v) = v {
                *slot = ColumnRef::parse(v);
            }
        };
        set(&mut cfg.time, &self.col_time);
        set(&mut cfg.source, &self.col_src);
        set(&mut cfg.destination, &self.col_dst);
        if self.implicit_one {
            cfg = cfg.implicit_one();
        } else if let Some(p) = &self.col_pkts {
            cfg.packets = Some(ColumnRef::parse(p));
        }
        Ok(cfg)
    }
}

impl Analyze {
    fn settings(&self) -> Settings {
        Settings {
            window: self.window,
            quantity: self.quantity,
            exclude_top: self.exclude_top,
            representative: match self.representative {
                RepresentativeArg::Lower => Representative::Lower,
                RepresentativeArg::Geometric => Representative::Geometric,
            },
            scale: if self.density {
                Scale::Density
            } else {
                Scale::Frequency
            },
            tail_fraction: self.tail_fraction,
            threshold_m: self.threshold_m,
            top_k: self.top_k,
        }
    }

    fn report(&self) -> Result<tailscope_cli::AnalysisReport, CliError> {
        run_pipeline(
            &self.input,
            &self.schema.config()?,
            &self.settings(),
            self.threads,
        )
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Input(format!("io: {}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn analyze(a: &Analyze, section: Section) -> Result<(), CliError> {
    let report = a.report()?;
    emit(a.out.as_deref(), &render(&report, section)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(a) => analyze(&a, Section::Ingest),
        Command::Quantities(a) => analyze(&a, Section::Quantities),
        Command::Bin(a) => analyze(&a, Section::Bin),
        Command::Fit(a) => analyze(&a, Section::Fit),
        Command::Diagnose(a) => analyze(&a, Section::Diagnose),
        Command::Plot {
            analyze,
            kind,
            window_index,
        } => {
            let report = analyze.report()?;
            emit(
                analyze.out.as_deref(),
                &emit_plot(&report, kind, window_index)?,
            )
        }
        Command::Run { analyze, svg_dir } => {
            let report = analyze.report()?;
            if let Some(dir) = &svg_dir {
                fs::create_dir_all(dir)
                    .map_err(|e| CliError::Input(format!("io: {}: {e}", dir.display())))?;
                for w in &report.windows {
                    for kind in PlotKind::ALL {
                        match emit_plot(&report, kind, w.index) {
                            Ok(svg) => emit(
                                Some(&dir.join(format!("window-{}-{}.svg", w.index, kind.name()))),
                                &svg,
                            )?,
                            Err(CliError::Fit(msg)) => eprintln!("tailscope: warning: {msg}"),
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
            emit(analyze.out.as_deref(), &render(&report, Section::Full)?)
        }
        Command::Synth(s) => {
            let model = match s.model {
                ModelArg::Zipf => SynthModel::Zipf { alpha: s.alpha },
                ModelArg::Uniform => SynthModel::UniformRandom,
                ModelArg::FixedDegree => SynthModel::FixedDegree { k: s.degree },
            };
            let records = generate(&SynthSpec {
                seed: s.seed,
                n_records: s.records,
                n_sources: s.sources,
                n_destinations: s.destinations,
                model,
            })?;
            let mut buf = Vec::new();
            write_csv(&records, &mut buf)?;
            let text = String::from_utf8(buf).map_err(|e| CliError::Internal(e.to_string()))?;
            emit(s.out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tailscope: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
