//! Self-contained SVG plots.

use std::fmt::Write;

const CELL: f64 = 56.0;
const MARGIN: f64 = 70.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn label(x: f64) -> String {
    let s = format!("{x}");
    if s.len() > 8 {
        format!("{x:.3e}")
    } else {
        s
    }
}

/// Blue ramp from white (0) to dark blue (1); grey for missing values.
fn colour(v: Option<f64>) -> String {
    match v {
        None => "#bbbbbb".into(),
        Some(v) => {
            let t = v.clamp(0.0, 1.0);
            let mix = |lo: f64, hi: f64| (lo + (hi - lo) * t).round() as u8;
            format!(
                "#{:02x}{:02x}{:02x}",
                mix(255.0, 8.0),
                mix(255.0, 48.0),
                mix(255.0, 107.0)
            )
        }
    }
}

/// Heatmap with `xs` across and `ys` down; `value(i, j)` is the cell at
/// `xs[i]`, `ys[j]`.
pub fn heatmap(
    title: &str,
    x_name: &str,
    xs: &[f64],
    y_name: &str,
    ys: &[f64],
    value: impl Fn(usize, usize) -> Option<f64>,
) -> String {
    let width = MARGIN * 2.0 + CELL * xs.len() as f64;
    let height = MARGIN * 2.0 + CELL * ys.len() as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    for (j, &y) in ys.iter().enumerate() {
        let top = MARGIN + CELL * j as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            MARGIN - 6.0,
            top + CELL / 2.0 + 4.0,
            label(y)
        );
        for (i, _) in xs.iter().enumerate() {
            let left = MARGIN + CELL * i as f64;
            let v = value(i, j);
            let _ = writeln!(
                s,
                r##"<rect x="{left}" y="{top}" width="{CELL}" height="{CELL}" fill="{}" stroke="#ffffff"/>"##,
                colour(v)
            );
            let text = v.map_or("n/a".to_string(), |v| format!("{v:.2}"));
            let ink = if v.unwrap_or(0.0) > 0.55 { "#ffffff" } else { "#000000" };
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{text}</text>"#,
                left + CELL / 2.0,
                top + CELL / 2.0 + 4.0
            );
        }
    }
    let bottom = MARGIN + CELL * ys.len() as f64;
    for (i, &x) in xs.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            MARGIN + CELL * (i as f64 + 0.5),
            bottom + 16.0,
            label(x)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        width / 2.0,
        bottom + 38.0,
        escape(x_name)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        height / 2.0,
        height / 2.0,
        escape(y_name)
    );
    s.push_str("</svg>\n");
    s
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Log-log line plot. Non-positive values are clamped to `1e-16`.
pub fn loglog(title: &str, x_name: &str, y_name: &str, series: &[Series]) -> String {
    let (w, h) = (520.0, 360.0);
    let (left, right, top, bottom) = (MARGIN, w - 150.0, 40.0, h - MARGIN);
    let logs = |f: fn(&(f64, f64)) -> f64| -> Vec<f64> {
        series
            .iter()
            .flat_map(|s| s.points.iter().map(f))
            .map(|v| v.max(1e-16).log10())
            .collect()
    };
    let range = |v: Vec<f64>| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min).floor();
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil();
        if lo.is_finite() && hi > lo {
            (lo, hi)
        } else if lo.is_finite() {
            (lo - 1.0, lo + 1.0)
        } else {
            (0.0, 1.0)
        }
    };
    let (x0, x1) = range(logs(|p| p.0));
    let (y0, y1) = range(logs(|p| p.1));
    let px = |x: f64| left + (x.max(1e-16).log10() - x0) / (x1 - x0) * (right - left);
    let py = |y: f64| bottom - (y.max(1e-16).log10() - y0) / (y1 - y0) * (bottom - top);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (left + right) / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="#444444"/>"##,
        right - left,
        bottom - top
    );
    for e in (x0 as i32)..=(x1 as i32) {
        let x = px(10f64.powi(e));
        let _ = writeln!(
            s,
            r##"<line x1="{x}" y1="{top}" x2="{x}" y2="{bottom}" stroke="#e0e0e0"/><text x="{x}" y="{}" text-anchor="middle">1e{e}</text>"##,
            bottom + 16.0
        );
    }
    for e in (y0 as i32)..=(y1 as i32) {
        let y = py(10f64.powi(e));
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y}" x2="{right}" y2="{y}" stroke="#e0e0e0"/><text x="{}" y="{}" text-anchor="end">1e{e}</text>"##,
            left - 6.0,
            y + 4.0
        );
    }
    for (k, ser) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            pts.join(" ")
        );
        for &(x, y) in &ser.points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#,
                px(x),
                py(y)
            );
        }
        let ly = top + 16.0 * (k as f64 + 1.0);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            right + 10.0,
            right + 30.0,
            right + 36.0,
            ly + 4.0,
            escape(&ser.name)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        bottom + 38.0,
        escape(x_name)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(y_name)
    );
    s.push_str("</svg>\n");
    s
}
