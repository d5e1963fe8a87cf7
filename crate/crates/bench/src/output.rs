//! Trajectory CSV, run-summary JSON and log-log SVG plots.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use inclusion_core::algorithms::Termination;
use inclusion_core::point::norm;
use serde::Serialize;

use crate::error::BenchError;
use crate::experiment::{RunOutcome, RunSummary};

pub const CSV_HEADER: &str =
    "t,residual_natural,residual_certified,residual_tangent,grad_calls,resolvent_calls,z_norm,potential";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// Indices of the records written with stride `record_every`; the last record is always kept.
pub fn sampled_indices(len: usize, record_every: usize) -> Vec<usize> {
    let step = record_every.max(1);
    let mut idx: Vec<usize> = (0..len).step_by(step).collect();
    if len > 0 && idx.last() != Some(&(len - 1)) {
        idx.push(len - 1);
    }
    idx
}

pub fn write_csv(out: &mut impl Write, run: &RunOutcome, record_every: usize) -> Result<(), BenchError> {
    writeln!(out, "{CSV_HEADER}")?;
    let records = &run.trajectory.records;
    for i in sampled_indices(records.len(), record_every) {
        let r = &records[i];
        let potential = run.potentials.as_ref().and_then(|p| p[i]);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.t,
            format_float(r.residuals.natural),
            format_opt(r.residuals.certified),
            format_opt(r.residuals.tangent_exact),
            r.gradient_calls,
            r.resolvent_calls,
            format_float(norm(&r.z)),
            format_opt(potential),
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub t: usize,
    pub residual_natural: f64,
    pub residual_certified: Option<f64>,
    pub residual_tangent: Option<f64>,
    pub grad_calls: u64,
    pub resolvent_calls: u64,
    pub z_norm: f64,
    pub potential: Option<f64>,
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T, BenchError> {
    s.parse().map_err(|_| BenchError::Csv(format!("line {line}: cannot parse `{s}`")))
}

fn parse_opt(s: &str, line: usize) -> Result<Option<f64>, BenchError> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_field(s, line).map(Some)
    }
}

pub fn read_csv(text: &str) -> Result<Vec<CsvRow>, BenchError> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(BenchError::Csv("unexpected header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let n = i + 2;
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(BenchError::Csv(format!("line {n}: expected 8 fields, got {}", f.len())));
            }
            Ok(CsvRow {
                t: parse_field(f[0], n)?,
                residual_natural: parse_field(f[1], n)?,
                residual_certified: parse_opt(f[2], n)?,
                residual_tangent: parse_opt(f[3], n)?,
                grad_calls: parse_field(f[4], n)?,
                resolvent_calls: parse_field(f[5], n)?,
                z_norm: parse_field(f[6], n)?,
                potential: parse_opt(f[7], n)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary<'a> {
    pub problem: &'a str,
    pub seed: u64,
    pub record_every: usize,
    pub runs: Vec<&'a RunSummary>,
}

pub fn summary_json(summary: &ExperimentSummary<'_>) -> Result<String, BenchError> {
    Ok(serde_json::to_string_pretty(summary)? + "\n")
}

pub fn csv_file_name(index: usize, run: &RunOutcome) -> String {
    format!("{index:02}_{}.csv", run.summary.algorithm)
}

/// One curve of a plot: label and `(t, residual)` points.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    /// The residual curve of a run (certified where available), restricted to `t >= 1`.
    pub fn from_run(label: impl Into<String>, run: &RunOutcome) -> Self {
        let points = run
            .trajectory
            .records
            .iter()
            .filter(|r| r.t >= 1)
            .map(|r| (r.t as f64, r.residuals.certified.unwrap_or(r.residuals.natural)))
            .filter(|(_, y)| y.is_finite() && *y > 0.0)
            .collect();
        Self {
            label: label.into(),
            points,
        }
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// A self-contained log-log line plot.
pub fn render_svg(title: &str, series: &[Series]) -> String {
    let (w, h) = (720.0, 480.0);
    let (left, right, top, bottom) = (70.0, 170.0, 40.0, 50.0);
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        x0 = x0.min(x.log10());
        x1 = x1.max(x.log10());
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |lx: f64| left + (lx - x0) / (x1 - x0) * pw;
    let sy = |ly: f64| top + (y1 - ly) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for d in (x0 as i32)..=(x1 as i32) {
        let x = sx(d as f64);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{}" stroke="#ddd"/>"##, top + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">1e{d}</text>"#, top + ph + 18.0);
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = sy(d as f64);
        let _ = writeln!(s, r##"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##, left + pw);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"#, left - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">iteration</text>"#, left + pw / 2.0, h - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">residual</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (i, series) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = series
            .points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(x.log10()), sy(y.log10())))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = top + 16.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&series.label));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `NN_<algo>.csv` per run, `summary.json` and `plot.svg` into `dir`.
/// Divergent runs get a CSV but no curve.
pub fn write_artifacts(
    dir: &Path,
    problem: &str,
    seed: u64,
    record_every: usize,
    runs: &[RunOutcome],
) -> Result<(), BenchError> {
    std::fs::create_dir_all(dir)?;
    for (i, run) in runs.iter().enumerate() {
        let mut buf = Vec::new();
        write_csv(&mut buf, run, record_every)?;
        std::fs::write(dir.join(csv_file_name(i, run)), buf)?;
    }
    let summary = ExperimentSummary {
        problem,
        seed,
        record_every,
        runs: runs.iter().map(|r| &r.summary).collect(),
    };
    std::fs::write(dir.join("summary.json"), summary_json(&summary)?)?;
    // Divergent curves would stretch the axes to the divergence threshold.
    let series: Vec<Series> = runs
        .iter()
        .filter(|r| r.summary.terminated_by != Termination::Divergence)
        .map(|r| Series::from_run(format!("{} (eta={})", r.summary.algorithm, r.summary.eta), r))
        .collect();
    std::fs::write(dir.join("plot.svg"), render_svg(problem, &series))?;
    Ok(())
}
