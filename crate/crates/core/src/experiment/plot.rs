//! Minimal SVG line charts built only from experiment CSV text.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// One named polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Group CSV rows into series keyed by `key` (or a single series when
/// `key` is `None`), plotting column `x` against column `y`. Rows with an
/// empty or non-numeric `x`/`y` are skipped.
pub fn series_from_csv(csv_text: &str, key: Option<&str>, x: &str, y: &str) -> Result<Vec<Series>> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse(format!("no column `{name}` in CSV")))
    };
    let (xi, yi) = (col(x)?, col(y)?);
    let ki = key.map(col).transpose()?;
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec?;
        let label = ki.map(|k| rec[k].to_string()).unwrap_or_else(|| y.to_string());
        let (Ok(xv), Ok(yv)) = (rec[xi].parse::<f64>(), rec[yi].parse::<f64>()) else {
            continue;
        };
        if !groups.contains_key(&label) {
            order.push(label.clone());
        }
        groups.entry(label).or_default().push((xv, yv));
    }
    Ok(order.into_iter().map(|label| Series { points: groups.remove(&label).unwrap_or_default(), label }).collect())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0.min(0.0), y1);
    (x0, x1, y0, y1)
}

/// Render series as an SVG line chart with axes, tick labels and a legend.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1, y0, y1) = bounds(series);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(w, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(w, r#"<path d="M{left} {top} V{bottom} H{right}" stroke="black" fill="none"/>"#);
    for i in 0..=4 {
        let f = f64::from(i) / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(w, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, px(xv), bottom + 18.0, tick(xv));
        let _ = writeln!(w, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, left - 6.0, py(yv) + 4.0, tick(yv));
    }
    let _ = writeln!(w, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 16.0, escape(x_label));
    let _ = writeln!(
        w,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        let _ = writeln!(w, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, path.join(" "));
        let ly = top + 16.0 * i as f64;
        let _ = writeln!(w, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, right - 110.0, right - 90.0);
        let _ = writeln!(w, r#"<text x="{}" y="{}">{}</text>"#, right - 85.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Chart straight from CSV text.
pub fn chart_from_csv(csv_text: &str, title: &str, key: Option<&str>, x: &str, y: &str) -> Result<String> {
    Ok(line_chart(title, x, y, &series_from_csv(csv_text, key, x, y)?))
}
