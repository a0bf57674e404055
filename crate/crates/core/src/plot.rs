//! Minimal SVG output for the sweeps: line plots and a heatmap.
//!
//! No styling options beyond what the figures need. Coordinates are
//! written with two decimals so the files are stable across runs.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// A named polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn extent(v: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x), b.max(x))
    });
    if lo > hi {
        return None;
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

impl LinePlot {
    pub fn to_svg(&self) -> String {
        let tx = |x: f64| if self.log_x { x.log10() } else { x };
        let all = || {
            self.series
                .iter()
                .flat_map(|s| s.points.iter().copied())
                .filter(|p| !self.log_x || p.0 > 0.0)
        };
        let xs = extent(all().map(|p| tx(p.0))).unwrap_or((0.0, 1.0));
        let ys = extent(all().map(|p| p.1)).unwrap_or((0.0, 1.0));
        let px = |x: f64| PAD + (tx(x) - xs.0) / (xs.1 - xs.0) * (W - 2.0 * PAD);
        let py = |y: f64| H - PAD - (y - ys.0) / (ys.1 - ys.0) * (H - 2.0 * PAD);

        let mut out = String::new();
        header(&mut out, &self.title);
        let _ = writeln!(
            out,
            r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        // Ticks at the axis ends and midpoint.
        for t in [0.0, 0.5, 1.0] {
            let xv = xs.0 + t * (xs.1 - xs.0);
            let xl = if self.log_x { 10f64.powf(xv) } else { xv };
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                PAD + t * (W - 2.0 * PAD),
                H - PAD + 16.0,
                tick(xl)
            );
            let yv = ys.0 + t * (ys.1 - ys.0);
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                PAD - 4.0,
                H - PAD - t * (H - 2.0 * PAD) + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            W / 2.0,
            H - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(&self.y_label)
        );
        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite() && (!self.log_x || p.0 > 0.0))
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                pts.join(" ")
            );
            let ly = PAD + 14.0 + 16.0 * i as f64;
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{ly:.2}" fill="{color}">{}</text>"#,
                W - PAD - 150.0,
                escape(&s.label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    }
}

/// Heatmap of `values[row][col]`; `None` cells are left grey.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl Heatmap {
    pub fn to_svg(&self) -> String {
        let nx = self.x_values.len().max(1);
        let ny = self.y_values.len().max(1);
        let (lo, hi) = extent(self.values.iter().flatten().flatten().copied()).unwrap_or((0.0, 1.0));
        let cw = (W - 2.0 * PAD) / nx as f64;
        let ch = (H - 2.0 * PAD) / ny as f64;
        let mut out = String::new();
        header(&mut out, &self.title);
        for (r, row) in self.values.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let fill = match v {
                    Some(v) => shade((v - lo) / (hi - lo)),
                    None => "#dddddd".to_string(),
                };
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                    PAD + c as f64 * cw,
                    H - PAD - (r + 1) as f64 * ch,
                    cw,
                    ch
                );
            }
        }
        for (label, anchor) in [(self.x_values.first(), PAD), (self.x_values.last(), W - PAD)] {
            if let Some(v) = label {
                let _ = writeln!(out, r#"<text x="{anchor:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, H - PAD + 16.0, tick(*v));
            }
        }
        for (label, y) in [(self.y_values.first(), H - PAD), (self.y_values.last(), PAD)] {
            if let Some(v) = label {
                let _ = writeln!(out, r#"<text x="{:.2}" y="{y:.2}" text-anchor="end">{}</text>"#, PAD - 4.0, tick(*v));
            }
        }
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(&self.x_label));
        let _ = writeln!(
            out,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(&self.y_label)
        );
        out.push_str("</svg>\n");
        out
    }
}

/// Blue-to-yellow ramp for t in [0, 1].
fn shade(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let r = (40.0 + 215.0 * t) as u8;
    let g = (40.0 + 180.0 * t) as u8;
    let b = (140.0 - 110.0 * t) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}
