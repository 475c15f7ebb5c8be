//! Log-log SVG plots of binned quantities, fitted models and the CCDF.
//!
//! The root element carries `data-log-x-min`, `data-log-x-max`,
//! `data-log-y-min` and `data-log-y-max` (decades) together with the plot
//! frame (`data-frame-*`, pixels), so coordinates can be mapped back to data.

use std::fmt::Write as _;

use tailscope::binning::PointConvention;
use tailscope::distfit::ModelKind;
use tailscope::LogBinnedHistogram;

use crate::error::CliError;
use crate::report::{AnalysisReport, QuantityKind, WindowAnalysis};

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 30.0;
const FRAME_W: f64 = 460.0;
const FRAME_H: f64 = 390.0;
const PALETTE: [&str; 6] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    FaninHist,
    FanoutHist,
    FitsOverlay,
    Ccdf,
}

impl PlotKind {
    pub const ALL: [PlotKind; 4] = [
        PlotKind::FaninHist,
        PlotKind::FanoutHist,
        PlotKind::FitsOverlay,
        PlotKind::Ccdf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::FaninHist => "fanin-hist",
            PlotKind::FanoutHist => "fanout-hist",
            PlotKind::FitsOverlay => "fits-overlay",
            PlotKind::Ccdf => "ccdf",
        }
    }
}

/// Decade bounds and the pixel mapping of one plot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axes {
    pub x_min: i32,
    pub x_max: i32,
    pub y_min: i32,
    pub y_max: i32,
}

impl Axes {
    fn covering(
        xs: impl Iterator<Item = f64> + Clone,
        ys: impl Iterator<Item = f64> + Clone,
    ) -> Option<Self> {
        let range = |it: &mut dyn Iterator<Item = f64>| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for v in it.filter(|v| *v > 0.0 && v.is_finite()) {
                lo = lo.min(v.log10());
                hi = hi.max(v.log10());
            }
            if lo > hi {
                return None;
            }
            let (lo, mut hi) = (lo.floor() as i32, hi.ceil() as i32);
            if hi == lo {
                hi += 1;
            }
            Some((lo, hi))
        };
        let (x_min, x_max) = range(&mut xs.clone())?;
        let (y_min, y_max) = range(&mut ys.clone())?;
        Some(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    pub fn px(&self, x: f64) -> f64 {
        LEFT + (x.log10() - f64::from(self.x_min)) / f64::from(self.x_max - self.x_min) * FRAME_W
    }

    pub fn py(&self, y: f64) -> f64 {
        TOP + (f64::from(self.y_max) - y.log10()) / f64::from(self.y_max - self.y_min) * FRAME_H
    }

    /// Inverse of [`Axes::py`].
    pub fn data_y(&self, py: f64) -> f64 {
        10f64
            .powf(f64::from(self.y_max) - (py - TOP) / FRAME_H * f64::from(self.y_max - self.y_min))
    }

    pub fn data_x(&self, px: f64) -> f64 {
        10f64.powf(
            f64::from(self.x_min) + (px - LEFT) / FRAME_W * f64::from(self.x_max - self.x_min),
        )
    }

    fn in_range(&self, y: f64) -> bool {
        y.is_finite() && y > 0.0 && y.log10() >= f64::from(self.y_min)
    }
}

struct Series {
    model: String,
    legend: String,
    points: Vec<(f64, f64)>,
}

struct Canvas {
    title: String,
    x_label: &'static str,
    y_label: String,
    markers: Vec<(f64, f64)>,
    step: bool,
    curves: Vec<Series>,
}

pub fn emit_plot(
    report: &AnalysisReport,
    kind: PlotKind,
    window_index: usize,
) -> Result<String, CliError> {
    let w = report
        .windows
        .iter()
        .find(|w| w.index == window_index)
        .ok_or_else(|| CliError::Input(format!("plot: no window {window_index}")))?;
    let conv = report.settings.convention();
    let canvas = match kind {
        PlotKind::FaninHist => histogram_canvas(w, QuantityKind::DestFanin, conv)?,
        PlotKind::FanoutHist => histogram_canvas(w, QuantityKind::SourceFanout, conv)?,
        PlotKind::FitsOverlay => overlay_canvas(w, conv)?,
        PlotKind::Ccdf => ccdf_canvas(w)?,
    };
    Ok(draw(&canvas, kind))
}

fn y_label(conv: PointConvention) -> String {
    match conv.scale {
        tailscope::binning::Scale::Frequency => "count per bin".into(),
        tailscope::binning::Scale::Density => "count / bin width".into(),
    }
}

fn markers(h: &LogBinnedHistogram, conv: PointConvention) -> Vec<(f64, f64)> {
    h.representatives(conv)
        .into_iter()
        .filter(|&(_, y)| y > 0.0)
        .collect()
}

fn absent(q: QuantityKind) -> CliError {
    CliError::Fit(format!("plot: no nonzero {} values to draw", q.name()))
}

fn histogram_canvas(
    w: &WindowAnalysis,
    q: QuantityKind,
    conv: PointConvention,
) -> Result<Canvas, CliError> {
    let h = w.histograms.get(q);
    let points = markers(h, conv);
    if points.is_empty() {
        return Err(absent(q));
    }
    let mut curves = Vec::new();
    if w.fit.quantity == q {
        if let Some(pl) = &w.fit.power_law {
            curves.push(Series {
                model: "power-law".into(),
                legend: format!("power law n={:.3}", pl.slope_n),
                points: points.iter().map(|&(x, _)| (x, pl.predict(x))).collect(),
            });
        }
    }
    Ok(Canvas {
        title: format!("{} (window {})", q.name(), w.index),
        x_label: "value (log2 bins)",
        y_label: y_label(conv),
        markers: points,
        step: false,
        curves,
    })
}

/// Expected binned points of every fitted model at the bin representatives.
fn overlay_canvas(w: &WindowAnalysis, conv: PointConvention) -> Result<Canvas, CliError> {
    let q = w.fit.quantity;
    let h = w.histograms.get(q);
    let points = markers(h, conv);
    if points.is_empty() {
        return Err(absent(q));
    }
    let total = h.total as f64;
    let xs: Vec<(f64, f64, f64)> = h
        .bins
        .iter()
        .map(|b| {
            let (l, u) = (b.lower() as f64, b.upper() as f64);
            (l, u, conv.x(l, u))
        })
        .collect();
    let mut curves = Vec::new();
    for score in &w.fit.ranking {
        let series = match score.model {
            ModelKind::PowerLaw => {
                let Some(pl) = &w.fit.power_law else { continue };
                Series {
                    model: "power-law".into(),
                    legend: format!("power law n={:.3} AIC={:.1}", pl.slope_n, score.aic),
                    points: xs.iter().map(|&(_, _, x)| (x, pl.predict(x))).collect(),
                }
            }
            ModelKind::Family(family) => {
                let Some(fit) = w.fit.censored.iter().find(|f| f.family == family) else {
                    continue;
                };
                let params: Vec<String> = family
                    .param_names()
                    .iter()
                    .zip(&fit.params)
                    .map(|(n, v)| format!("{n}={v:.4}"))
                    .collect();
                Series {
                    model: family.name().into(),
                    legend: format!(
                        "{} {} AIC={:.1}",
                        family.name(),
                        params.join(" "),
                        score.aic
                    ),
                    points: xs
                        .iter()
                        .map(|&(l, u, x)| (x, conv.y(l, u, total * fit.interval_probability(l, u))))
                        .collect(),
                }
            }
        };
        curves.push(series);
    }
    Ok(Canvas {
        title: format!("{} fits (window {})", q.name(), w.index),
        x_label: "value (log2 bins)",
        y_label: y_label(conv),
        markers: points,
        step: false,
        curves,
    })
}

fn ccdf_canvas(w: &WindowAnalysis) -> Result<Canvas, CliError> {
    let q = w.fit.quantity;
    let c = w.ccdf.as_ref().ok_or_else(|| absent(q))?;
    let points: Vec<(f64, f64)> = c.iter().filter(|&(x, _)| x > 0.0).collect();
    if points.is_empty() {
        return Err(absent(q));
    }
    Ok(Canvas {
        title: format!("{} CCDF (window {})", q.name(), w.index),
        x_label: "value",
        y_label: "P(X >= x)".into(),
        markers: points,
        step: true,
        curves: Vec::new(),
    })
}

fn path_data(points: &[(f64, f64)], axes: &Axes) -> String {
    let mut d = String::new();
    let mut pen_down = false;
    for &(x, y) in points {
        if !axes.in_range(y) || x.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            pen_down = false;
            continue;
        }
        let cmd = if pen_down { 'L' } else { 'M' };
        if !d.is_empty() {
            d.push(' ');
        }
        let _ = write!(d, "{cmd}{:.4},{:.4}", axes.px(x), axes.py(y));
        pen_down = true;
    }
    d
}

fn draw(c: &Canvas, kind: PlotKind) -> String {
    let axes = Axes::covering(c.markers.iter().map(|p| p.0), c.markers.iter().map(|p| p.1))
        .expect("nonempty markers");
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" data-kind="{}" data-log-x-min="{}" data-log-x-max="{}" data-log-y-min="{}" data-log-y-max="{}" data-frame-left="{LEFT}" data-frame-top="{TOP}" data-frame-width="{FRAME_W}" data-frame-height="{FRAME_H}">"#,
        kind.name(),
        axes.x_min,
        axes.x_max,
        axes.y_min,
        axes.y_max
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        LEFT + FRAME_W / 2.0,
        escape(&c.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{FRAME_W}" height="{FRAME_H}" fill="none" stroke="black"/>"#
    );
    for e in axes.x_min..=axes.x_max {
        let x = axes.px(10f64.powi(e));
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{}" stroke="#ddd"/><text x="{x:.2}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">1e{e}</text>"##,
            TOP + FRAME_H,
            TOP + FRAME_H + 16.0
        );
    }
    for e in axes.y_min..=axes.y_max {
        let y = axes.py(10f64.powi(e));
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">1e{e}</text>"##,
            LEFT + FRAME_W,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        LEFT + FRAME_W / 2.0,
        HEIGHT - 12.0,
        escape(c.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        TOP + FRAME_H / 2.0,
        TOP + FRAME_H / 2.0,
        escape(&c.y_label)
    );

    if c.step {
        let mut stair = Vec::with_capacity(c.markers.len() * 2);
        for (i, &(x, y)) in c.markers.iter().enumerate() {
            stair.push((x, y));
            // P(X >= x) drops just after each observed value
            if let Some(&(_, next)) = c.markers.get(i + 1) {
                stair.push((x, next));
            }
        }
        let _ = writeln!(
            s,
            r#"<path data-series="ccdf" d="{}" fill="none" stroke="black" stroke-width="1.2"/>"#,
            path_data(&stair, &axes)
        );
    }
    let _ = writeln!(s, r#"<g data-series="data">"#);
    for &(x, y) in &c.markers {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.4}" cy="{:.4}" r="2.5" fill="black"/>"#,
            axes.px(x),
            axes.py(y)
        );
    }
    let _ = writeln!(s, "</g>");

    for (i, series) in c.curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<path data-model="{}" d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            escape(&series.model),
            path_data(&series.points, &axes)
        );
    }

    let legend_x = LEFT + FRAME_W + 12.0;
    let _ = writeln!(
        s,
        r#"<g data-series="legend" font-family="sans-serif" font-size="10">"#
    );
    let mut row = TOP + 10.0;
    let _ = writeln!(
        s,
        r#"<circle cx="{legend_x}" cy="{row}" r="2.5" fill="black"/><text x="{}" y="{}">observed</text>"#,
        legend_x + 8.0,
        row + 3.0
    );
    for (i, series) in c.curves.iter().enumerate() {
        row += 16.0;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{row}" x2="{}" y2="{row}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            legend_x - 4.0,
            legend_x + 4.0,
            legend_x + 8.0,
            row + 3.0,
            escape(&series.legend)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
