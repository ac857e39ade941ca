//! Minimal SVG line and scatter plots.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const M: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit<'a>(points: impl Iterator<Item = &'a (f64, f64)>) -> Self {
        let (mut x, mut y) = ((f64::INFINITY, f64::NEG_INFINITY), (f64::INFINITY, f64::NEG_INFINITY));
        for &(px, py) in points {
            x = (x.0.min(px), x.1.max(px));
            y = (y.0.min(py), y.1.max(py));
        }
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        M + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * M)
    }

    fn py(&self, y: f64) -> f64 {
        H - M - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * M)
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let _ = write!(
            out,
            r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * M,
            H - 2.0 * M
        );
        for (v, anchor_x) in [(self.x.0, M), (self.x.1, W - M)] {
            let _ = write!(out, r#"<text x="{anchor_x}" y="{}" font-size="11" text-anchor="middle">{}</text>"#, H - M + 16.0, short(v));
        }
        for (v, anchor_y) in [(self.y.0, H - M), (self.y.1, M)] {
            let _ = write!(out, r#"<text x="{}" y="{anchor_y}" font-size="11" text-anchor="end">{}</text>"#, M - 4.0, short(v));
        }
        let _ = write!(out, r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{xlabel}</text>"#, W / 2.0, H - 12.0);
        let _ = write!(
            out,
            r#"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>"#,
            H / 2.0,
            H / 2.0
        );
    }
}

fn short(v: f64) -> String {
    format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
}

fn open() -> String {
    format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}"><rect width="100%" height="100%" fill="white"/>"#)
}

/// One polyline per labelled series.
pub fn line_plot(series: &[(String, Vec<(f64, f64)>)], xlabel: &str, ylabel: &str) -> String {
    let frame = Frame::fit(series.iter().flat_map(|(_, pts)| pts.iter()));
    let mut out = open();
    frame.axes(&mut out, xlabel, ylabel);
    for (k, (label, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y))).collect();
        let _ = write!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, path.join(" "));
        for &(x, y) in pts {
            let _ = write!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, frame.px(x), frame.py(y));
        }
        let _ = write!(
            out,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{label}</text>"#,
            W - M + 4.0 - 50.0,
            M + 16.0 * (k as f64 + 1.0)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Scatter plot with the diagonal `y = x` drawn for reference.
pub fn scatter_plot(points: &[(f64, f64)], xlabel: &str, ylabel: &str) -> String {
    let mut frame = Frame::fit(points.iter());
    let lo = frame.x.0.min(frame.y.0);
    let hi = frame.x.1.max(frame.y.1);
    frame.x = (lo, hi);
    frame.y = (lo, hi);
    let mut out = open();
    frame.axes(&mut out, xlabel, ylabel);
    let _ = write!(
        out,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
        frame.px(lo),
        frame.py(lo),
        frame.px(hi),
        frame.py(hi)
    );
    for &(x, y) in points {
        let _ = write!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{}" fill-opacity="0.5"/>"#, frame.px(x), frame.py(y), COLORS[0]);
    }
    out.push_str("</svg>\n");
    out
}
