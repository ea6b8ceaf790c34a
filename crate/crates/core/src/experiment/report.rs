use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{ReachError, Result};
use crate::inf_serde;
use crate::stats::{BoxStats, Summary};

use super::{ExperimentReport, Series, EPSILON_SERIES, TANGENT_ERROR_SERIES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    SvgBoxplot,
}

impl std::str::FromStr for ReportFormat {
    type Err = ReachError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "svg" | "svg-boxplot" => Ok(ReportFormat::SvgBoxplot),
            other => Err(ReachError::Config(format!("unknown report format `{other}`"))),
        }
    }
}

/// `model,n,estimator,replicate,value`, one row per replicate value.
pub fn write_replicates_csv<W: Write>(report: &ExperimentReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "n", "estimator", "replicate", "value"])?;
    for s in &report.series {
        for (rep, v) in s.values.iter().enumerate() {
            w.write_record([s.model.clone(), s.n.to_string(), s.estimator.clone(), rep.to_string(), inf_serde::fmt(*v)])?;
        }
    }
    w.flush().map_err(|e| ReachError::io("<csv>", e))?;
    Ok(())
}

/// `model,n,estimator,mean,median,sd`, one row per series.
pub fn write_summary_csv<W: Write>(report: &ExperimentReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "n", "estimator", "mean", "median", "sd"])?;
    for s in &report.series {
        let Summary { mean, median, sd } = s.summary();
        w.write_record([
            s.model.clone(),
            s.n.to_string(),
            s.estimator.clone(),
            inf_serde::fmt(mean),
            inf_serde::fmt(median),
            inf_serde::fmt(sd),
        ])?;
    }
    w.flush().map_err(|e| ReachError::io("<csv>", e))?;
    Ok(())
}

/// Wide layout: one row per n, mean/median/sd of the plain estimate for
/// each model, then the mean ε over all models at that n.
pub fn write_table1_csv<W: Write>(report: &ExperimentReport, writer: W) -> Result<()> {
    let models = &report.config.models;
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["n".to_string()];
    for m in models {
        for stat in ["mean", "median", "sd"] {
            header.push(format!("{m} {stat}"));
        }
    }
    header.push("epsilon".to_string());
    w.write_record(&header)?;
    for &n in &report.config.sizes {
        let mut row = vec![n.to_string()];
        let mut eps = Vec::new();
        for m in models {
            let s = report
                .series(m, n, "plain")
                .ok_or_else(|| ReachError::Format(format!("no plain series for {m}, n={n}")))?;
            let sum = s.summary();
            row.extend([sum.mean, sum.median, sum.sd].map(|v| format!("{:.3}", v)));
            if let Some(e) = report.series(m, n, EPSILON_SERIES) {
                eps.extend_from_slice(&e.values);
            }
        }
        row.push(format!("{:.2}", crate::stats::mean(&eps)));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| ReachError::io("<csv>", e))?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Static Tukey boxplot of every estimator series, grouped by `(model, n)`.
/// The ε and tangent-error series are left out. Non-finite values are
/// dropped and counted in the label.
pub fn write_boxplot_svg<W: Write>(report: &ExperimentReport, mut writer: W) -> Result<()> {
    let series: Vec<&Series> = report
        .series
        .iter()
        .filter(|s| s.estimator != EPSILON_SERIES && s.estimator != TANGENT_ERROR_SERIES)
        .collect();
    let boxes: Vec<(&Series, Option<BoxStats>)> = series.iter().map(|s| (*s, BoxStats::of(&s.values))).collect();

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for b in boxes.iter().filter_map(|(_, b)| b.as_ref()) {
        let min = b.outliers.first().copied().unwrap_or(b.lower_whisker).min(b.lower_whisker);
        let max = b.outliers.last().copied().unwrap_or(b.upper_whisker).max(b.upper_whisker);
        lo = lo.min(min);
        hi = hi.max(max);
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);

    let (left, top, plot_h, slot) = (70.0, 30.0, 360.0, 90.0);
    let width = left + slot * boxes.len().max(1) as f64 + 20.0;
    let height = top + plot_h + 90.0;
    let y = |v: f64| top + plot_h * (hi - v) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<text x="{left}" y="18" font-size="13">{}</text>"#, escape(&report.experiment));
    let _ = writeln!(
        svg,
        r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{:.2}" stroke="black"/>"#,
        top + plot_h
    );
    for t in 0..=5 {
        let v = lo + (hi - lo) * t as f64 / 5.0;
        let yy = y(v);
        let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{yy:.2}" x2="{left}" y2="{yy:.2}" stroke="black"/>"#, left - 5.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            left - 8.0,
            yy + 4.0
        );
    }
    for (i, (s, b)) in boxes.iter().enumerate() {
        let cx = left + slot * (i as f64 + 0.5);
        let half = slot * 0.3;
        let dropped = s.values.iter().filter(|v| !v.is_finite()).count();
        let mut label = format!("{} n={}", s.estimator, s.n);
        if dropped > 0 {
            label.push_str(&format!(" ({dropped} inf)"));
        }
        let ly = top + plot_h + 16.0;
        let _ = writeln!(svg, r#"<text x="{cx:.2}" y="{ly:.2}" text-anchor="middle">{}</text>"#, escape(&label));
        let _ = writeln!(
            svg,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            ly + 14.0,
            escape(&s.model)
        );
        let Some(b) = b else { continue };
        let _ = writeln!(
            svg,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
            y(b.upper_whisker),
            y(b.q3)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
            y(b.q1),
            y(b.lower_whisker)
        );
        for wv in [b.lower_whisker, b.upper_whisker] {
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
                cx - half / 2.0,
                y(wv),
                cx + half / 2.0,
                y(wv)
            );
        }
        let _ = writeln!(
            svg,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#cfe0f3" stroke="black"/>"##,
            cx - half,
            y(b.q3),
            2.0 * half,
            (y(b.q1) - y(b.q3)).max(0.5)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            y(b.median),
            cx + half,
            y(b.median)
        );
        for o in &b.outliers {
            let _ = writeln!(svg, r#"<circle cx="{cx:.2}" cy="{:.2}" r="2.5" fill="none" stroke="black"/>"#, y(*o));
        }
    }
    svg.push_str("</svg>\n");
    writer.write_all(svg.as_bytes()).map_err(|e| ReachError::io("<svg>", e))
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, fs::File)> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| ReachError::io(&path, e))?;
    Ok((path, file))
}

/// Write `report` into `dir` and return the files created.
///
/// `Csv` writes `<name>-replicates.csv` and `<name>-summary.csv`, plus
/// `table1.csv` for the annulus study. `Json` writes `<name>.json` and
/// `SvgBoxplot` writes `<name>-boxplot.svg`.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| ReachError::io(dir, e))?;
    let name = &report.experiment;
    let mut out = Vec::new();
    match format {
        ReportFormat::Csv => {
            let (p, f) = create(dir, &format!("{name}-replicates.csv"))?;
            write_replicates_csv(report, std::io::BufWriter::new(f))?;
            out.push(p);
            let (p, f) = create(dir, &format!("{name}-summary.csv"))?;
            write_summary_csv(report, std::io::BufWriter::new(f))?;
            out.push(p);
            if name == "table1" {
                let (p, f) = create(dir, "table1.csv")?;
                write_table1_csv(report, std::io::BufWriter::new(f))?;
                out.push(p);
            }
        }
        ReportFormat::Json => {
            let (p, f) = create(dir, &format!("{name}.json"))?;
            serde_json::to_writer_pretty(std::io::BufWriter::new(f), report)?;
            out.push(p);
        }
        ReportFormat::SvgBoxplot => {
            let (p, f) = create(dir, &format!("{name}-boxplot.svg"))?;
            write_boxplot_svg(report, std::io::BufWriter::new(f))?;
            out.push(p);
        }
    }
    Ok(out)
}
