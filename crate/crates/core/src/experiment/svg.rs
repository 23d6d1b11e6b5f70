//! Bare-bones SVG charts for the distribution analysis.

use std::fmt::Write;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let (x0, y0, x1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{MARGIN}" x2="{x0}" y2="{y0}" stroke="black"/>"#);
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn y_ticks(out: &mut String, lo: f64, hi: f64) {
    let plot_h = HEIGHT - 2.0 * MARGIN;
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = HEIGHT - MARGIN - plot_h * k as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end">{:.3}</text>"#, MARGIN - 4.0, y + 4.0, v);
    }
}

/// One outlined histogram per series, drawn over a shared value axis.
/// `series` holds `(label, density per bin)`; bins span `[lo, hi]`.
pub fn histogram_overlay(title: &str, lo: f64, hi: f64, series: &[(String, Vec<f64>)]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let top = series
        .iter()
        .flat_map(|(_, d)| d.iter().copied())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    for (k, (label, density)) in series.iter().enumerate() {
        let bins = density.len().max(1);
        let mut points = String::new();
        for (b, d) in density.iter().enumerate() {
            let xa = MARGIN + plot_w * b as f64 / bins as f64;
            let xb = MARGIN + plot_w * (b + 1) as f64 / bins as f64;
            let y = HEIGHT - MARGIN - plot_h * d / top;
            let _ = write!(points, "{xa:.1},{y:.1} {xb:.1},{y:.1} ");
        }
        let colour = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-opacity="0.6" points="{}"><title>{}</title></polyline>"#,
            points.trim_end(),
            escape(label)
        );
    }
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let x = MARGIN + plot_w * k as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{v:.3}</text>"#, HEIGHT - MARGIN + 16.0);
    }
    out.push_str("</svg>\n");
    out
}

/// One box-and-whisker glyph per labelled summary.
pub fn box_plot(title: &str, boxes: &[(String, FiveNumber)]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let lo = boxes.iter().map(|(_, b)| b.min).fold(f64::INFINITY, f64::min);
    let hi = boxes.iter().map(|(_, b)| b.max).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if boxes.is_empty() { (0.0, 1.0) } else { (lo, hi) };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let y = |v: f64| HEIGHT - MARGIN - plot_h * (v - lo) / span;
    y_ticks(&mut out, lo, lo + span);
    let slot = plot_w / boxes.len().max(1) as f64;
    for (k, (label, b)) in boxes.iter().enumerate() {
        let cx = MARGIN + slot * (k as f64 + 0.5);
        let half = (slot * 0.3).min(12.0);
        let _ = writeln!(out, r#"<g><title>{}</title>"#, escape(label));
        let _ = writeln!(out, r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#, y(b.min), y(b.max));
        let _ = writeln!(
            out,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#9ecae1" stroke="black"/>"##,
            cx - half,
            y(b.q3),
            2.0 * half,
            (y(b.q1) - y(b.q3)).max(0.5)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            y(b.median),
            cx + half,
            y(b.median)
        );
        let _ = writeln!(out, "</g>");
        if boxes.len() <= 40 {
            let _ = writeln!(out, r#"<text x="{cx:.1}" y="{}" text-anchor="middle">{}</text>"#, HEIGHT - MARGIN + 16.0, k);
        }
    }
    out.push_str("</svg>\n");
    out
}
