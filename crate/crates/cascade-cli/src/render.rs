//! Deterministic CSV, JSON, and SVG writers for command outputs.
//!
//! Floats go through the shortest round-trip formatter, so a rerun with
//! the same configuration and seed reproduces every artifact byte for
//! byte. The SVG charts are small hand-rolled line plots: two axes, five
//! ticks each, optional log-scale x, and a legend.

use cascade_scope::{Error, Result};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// Writes a report as pretty JSON with a trailing newline.
pub fn write_json(path: &Path, report: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Format(format!("serializing {}: {e}", path.display())))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Writes a CSV table. The resolved run configuration rides along as a
/// leading comment line so the file is self-describing.
pub fn write_csv(
    path: &Path,
    config_json: &str,
    header: &[&str],
    rows: &[Vec<f64>],
) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# config {config_json}").unwrap();
    writeln!(out, "{}", header.join(",")).unwrap();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// One polyline of a chart.
pub struct Series<'a> {
    pub name: &'a str,
    pub color: &'a str,
    pub xs: &'a [f64],
    pub ys: &'a [f64],
}

const W: f64 = 720.0;
const H: f64 = 480.0;
const ML: f64 = 76.0;
const MR: f64 = 24.0;
const MT: f64 = 44.0;
const MB: f64 = 56.0;

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders a line chart over the given series. `log_x` plots x on a log
/// axis; every series must then keep x positive.
pub fn line_chart(title: &str, log_x: bool, series: &[Series], config_json: &str) -> String {
    let fx = |x: f64| if log_x { x.log10() } else { x };
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for (&x, &y) in s.xs.iter().zip(s.ys) {
            let tx = fx(x);
            if tx.is_finite() && y.is_finite() {
                xmin = xmin.min(tx);
                xmax = xmax.max(tx);
                ymin = ymin.min(y);
                ymax = ymax.max(y);
            }
        }
    }
    if !xmin.is_finite() {
        xmin = 0.0;
        xmax = 1.0;
    }
    if !ymin.is_finite() {
        ymin = 0.0;
        ymax = 1.0;
    }
    if xmax - xmin < 1e-300 {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if ymax - ymin < 1e-300 {
        ymin -= 0.5;
        ymax += 0.5;
    }
    let pad = 0.04 * (ymax - ymin);
    let (ymin, ymax) = (ymin - pad, ymax + pad);
    let px = |tx: f64| ML + (tx - xmin) / (xmax - xmin) * (W - ML - MR);
    let py = |y: f64| H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, "<desc>{}</desc>", escape_xml(config_json)).unwrap();
    writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        (ML + W - MR) / 2.0,
        escape_xml(title)
    )
    .unwrap();
    for (a, b, c, d) in [(ML, H - MB, W - MR, H - MB), (ML, MT, ML, H - MB)] {
        writeln!(
            svg,
            r##"<line x1="{a:.2}" y1="{b:.2}" x2="{c:.2}" y2="{d:.2}" stroke="#333" stroke-width="1"/>"##
        )
        .unwrap();
    }
    for i in 0..5 {
        let f = i as f64 / 4.0;
        let tx = xmin + f * (xmax - xmin);
        let x = px(tx);
        let label = tick_label(if log_x { 10f64.powf(tx) } else { tx });
        writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333" stroke-width="1"/>"##,
            H - MB,
            H - MB + 5.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            H - MB + 20.0
        )
        .unwrap();
        let ty = ymin + f * (ymax - ymin);
        let y = py(ty);
        writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{ML:.2}" y2="{y:.2}" stroke="#333" stroke-width="1"/>"##,
            ML - 5.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            ML - 9.0,
            y + 4.0,
            tick_label(ty)
        )
        .unwrap();
    }
    for s in series {
        let mut points = String::new();
        for (&x, &y) in s.xs.iter().zip(s.ys) {
            let tx = fx(x);
            if tx.is_finite() && y.is_finite() {
                write!(points, "{:.2},{:.2} ", px(tx), py(y)).unwrap();
            }
        }
        writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            points.trim_end(),
            s.color
        )
        .unwrap();
    }
    for (i, s) in series.iter().enumerate() {
        let y = MT + 8.0 + 16.0 * i as f64;
        writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="2"/>"#,
            W - MR - 150.0,
            W - MR - 126.0,
            s.color
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            W - MR - 120.0,
            y + 4.0,
            escape_xml(s.name)
        )
        .unwrap();
    }
    writeln!(svg, "</svg>").unwrap();
    svg
}

/// Writes a chart to disk.
pub fn write_svg(
    path: &Path,
    title: &str,
    log_x: bool,
    series: &[Series],
    config_json: &str,
) -> Result<()> {
    std::fs::write(path, line_chart(title, log_x, series, config_json))?;
    Ok(())
}
