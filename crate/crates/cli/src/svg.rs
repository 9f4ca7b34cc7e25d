//! Minimal SVG plots: polylines and scatter series on a shared 2-D frame.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dashed,
    Points,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, style: Style, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            style,
            points,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl Plot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
        }
    }

    pub fn push(&mut self, series: Series) {
        self.series.push(series);
    }

    /// Equal-aspect rendering; the y axis points up.
    pub fn render(&self) -> String {
        let pts = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|p| p.0.is_finite() && p.1.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-9) * 1.1;
        let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        let scale = (WIDTH - 2.0 * MARGIN).min(HEIGHT - 2.0 * MARGIN) / span;
        let map = |x: f64, y: f64| (WIDTH / 2.0 + (x - cx) * scale, HEIGHT / 2.0 - (y - cy) * scale);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let (bx0, by0) = map(cx - span / 2.0, cy - span / 2.0);
        let (bx1, by1) = map(cx + span / 2.0, cy + span / 2.0);
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#999"/>"##,
            bx0,
            by1,
            bx1 - bx0,
            by0 - by1
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{} [{} .. {}]</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label),
            crate::format::fmt(cx - span / 2.0),
            crate::format::fmt(cx + span / 2.0)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{} [{} .. {}]</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label),
            crate::format::fmt(cy - span / 2.0),
            crate::format::fmt(cy + span / 2.0)
        );
        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            match s.style {
                Style::Line | Style::Dashed => {
                    let path: Vec<String> = s
                        .points
                        .iter()
                        .map(|&(x, y)| {
                            let (u, v) = map(x, y);
                            format!("{u:.2},{v:.2}")
                        })
                        .collect();
                    let dash = if s.style == Style::Dashed {
                        r#" stroke-dasharray="6 4""#
                    } else {
                        ""
                    };
                    let _ = writeln!(
                        out,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
                        path.join(" ")
                    );
                }
                Style::Points => {
                    let _ = writeln!(out, r#"<g fill="{color}" fill-opacity="0.7">"#);
                    for &(x, y) in &s.points {
                        let (u, v) = map(x, y);
                        let _ = writeln!(out, r#"<circle cx="{u:.2}" cy="{v:.2}" r="2.5"/>"#);
                    }
                    let _ = writeln!(out, "</g>");
                }
            }
            let ly = 40.0 + 16.0 * k as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                WIDTH - 170.0,
                ly - 9.0,
                WIDTH - 155.0,
                ly,
                escape(&s.label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Picks the horizontal axis (x or y) with the larger spread.
pub fn side_view(points: &[[f64; 3]]) -> (usize, &'static str) {
    let spread = |k: usize| {
        let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[k]), hi.max(p[k]))
        });
        hi - lo
    };
    if spread(1) > spread(0) {
        (1, "y (m)")
    } else {
        (0, "x (m)")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_all_series() {
        let mut plot = Plot::new("t", "x", "z");
        plot.push(Series::new("a", Style::Line, vec![(0.0, 0.0), (1.0, 1.0)]));
        plot.push(Series::new("b<", Style::Points, vec![(0.5, 0.2)]));
        let svg = plot.render();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("b&lt;"));
    }
}
