//! Minimal SVG 1.1 line, scatter and cell plots.

use std::fmt::Write;

use serde_json::Value;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A single plot with linear axes over fixed data bounds.
pub struct Svg {
    body: String,
    x: (f64, f64),
    y: (f64, f64),
    legend: Vec<(String, String)>,
}

impl Svg {
    pub fn new(title: &str, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let (x, y) = (pad(x), pad(y));
        let mut body = String::new();
        let (r, b) = (WIDTH - MARGIN, HEIGHT - MARGIN);
        let _ = write!(
            body,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            r - MARGIN,
            b - MARGIN
        );
        let _ = write!(
            body,
            r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        let _ = write!(
            body,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            escape(x_label)
        );
        let _ = write!(
            body,
            r#"<text x="16" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(y_label)
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = x.0 + f * (x.1 - x.0);
            let yv = y.0 + f * (y.1 - y.0);
            let px = MARGIN + f * (r - MARGIN);
            let py = b - f * (b - MARGIN);
            let _ = write!(
                body,
                r#"<text x="{px}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
                b + 16.0,
                tick(xv)
            );
            let _ = write!(
                body,
                r#"<text x="{}" y="{}" text-anchor="end" font-size="11">{}</text>"#,
                MARGIN - 4.0,
                py + 4.0,
                tick(yv)
            );
        }
        Self { body, x, y, legend: Vec::new() }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    pub fn line(&mut self, label: &str, color: &str, points: &[(f64, f64)]) {
        let pts: Vec<String> = points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        if pts.len() > 1 {
            let _ = write!(
                self.body,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
        self.legend.push((label.to_string(), color.to_string()));
    }

    pub fn points(&mut self, label: &str, color: &str, points: &[(f64, f64)]) {
        for &(x, y) in points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            let _ =
                write!(self.body, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, self.px(x), self.py(y));
        }
        self.legend.push((label.to_string(), color.to_string()));
    }

    pub fn segment(&mut self, a: (f64, f64), b: (f64, f64), color: &str) {
        let _ = write!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
            self.px(a.0),
            self.py(a.1),
            self.px(b.0),
            self.py(b.1)
        );
    }

    /// Filled cell centred at `(x, y)` with the given data-space size.
    pub fn cell(&mut self, x: f64, y: f64, dx: f64, dy: f64, color: &str) {
        let (x0, x1) = (self.px(x - dx / 2.0), self.px(x + dx / 2.0));
        let (y0, y1) = (self.py(y + dy / 2.0), self.py(y - dy / 2.0));
        let _ = write!(
            self.body,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.35"/>"#,
            x1 - x0,
            y1 - y0
        );
    }

    pub fn legend_entry(&mut self, label: &str, color: &str) {
        self.legend.push((label.to_string(), color.to_string()));
    }

    pub fn finish(mut self, meta: &Value) -> String {
        for (k, (label, color)) in self.legend.iter().enumerate() {
            let y = MARGIN + 14.0 + 16.0 * k as f64;
            let x = WIDTH - MARGIN - 110.0;
            let _ = write!(
                self.body,
                r#"<rect x="{x}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}" font-size="12">{}</text>"#,
                y - 9.0,
                x + 14.0,
                y,
                escape(label)
            );
        }
        format!(
            concat!(
                r#"<?xml version="1.0" encoding="UTF-8"?>"#,
                "\n",
                r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
                "\n<metadata>{meta}</metadata>\n",
                r#"<rect width="100%" height="100%" fill="white"/>"#,
                "\n{body}\n</svg>\n"
            ),
            w = WIDTH,
            h = HEIGHT,
            meta = escape(&meta.to_string()),
            body = self.body
        )
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{}", (v * 1000.0).round() / 1000.0)
    }
}

pub fn bounds<'a, I: IntoIterator<Item = &'a f64>>(values: I) -> (f64, f64) {
    values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}
