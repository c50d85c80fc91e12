//! Minimal static line and scatter charts. Output depends only on the
//! input data, so equal inputs give identical bytes.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Line,
    Points,
    LinePoints,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub mark: Mark,
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Shaded vertical bands `(x0, x1, label)`.
    pub bands: Vec<(f64, f64, String)>,
    /// Dashed horizontal reference lines `(y, label)`.
    pub hlines: Vec<(f64, String)>,
}

impl Chart {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
            bands: Vec::new(),
            hlines: Vec::new(),
        }
    }

    pub fn series(mut self, label: impl Into<String>, points: Vec<(f64, f64)>, mark: Mark) -> Self {
        self.series.push(Series {
            label: label.into(),
            points,
            mark,
        });
        self
    }

    pub fn band(mut self, x0: f64, x1: f64, label: impl Into<String>) -> Self {
        self.bands.push((x0, x1, label.into()));
        self
    }

    pub fn hline(mut self, y: f64, label: impl Into<String>) -> Self {
        self.hlines.push((y, label.into()));
        self
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }
        for b in &self.bands {
            xs.extend([b.0, b.1]);
        }
        ys.extend(self.hlines.iter().map(|h| h.0).filter(|y| y.is_finite()));
        (padded(&xs, 0.0), padded(&ys, 0.05))
    }

    pub fn render(&self) -> String {
        let ((x0, x1), (y0, y1)) = self.bounds();
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            num(LEFT + pw / 2.0),
            escape(&self.title)
        );
        for (a, b, label) in &self.bands {
            let (xa, xb) = (sx(a.min(*b)), sx(a.max(*b)));
            let _ = writeln!(
                s,
                r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#999999" fill-opacity="0.25"><title>{}</title></rect>"##,
                num(xa),
                num(TOP),
                num((xb - xa).max(0.5)),
                num(ph),
                escape(label)
            );
            let _ = writeln!(
                s,
                r##"<text x="{}" y="{}" text-anchor="middle" fill="#555555">{}</text>"##,
                num(0.5 * (xa + xb)),
                num(TOP + 14.0),
                escape(label)
            );
        }
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            num(LEFT),
            num(TOP),
            num(pw),
            num(ph)
        );
        for t in ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(
                s,
                r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/><text x="{0}" y="{3}" text-anchor="middle">{4}</text>"#,
                num(x),
                num(TOP + ph),
                num(TOP + ph + 5.0),
                num(TOP + ph + 19.0),
                tick_label(t, x1 - x0)
            );
        }
        for t in ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(
                s,
                r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/><text x="{3}" y="{4}" text-anchor="end">{5}</text>"#,
                num(LEFT - 5.0),
                num(y),
                num(LEFT),
                num(LEFT - 8.0),
                num(y + 4.0),
                tick_label(t, y1 - y0)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            num(LEFT + pw / 2.0),
            num(HEIGHT - 12.0),
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            num(TOP + ph / 2.0),
            escape(&self.y_label)
        );
        for (y, label) in &self.hlines {
            if !y.is_finite() {
                continue;
            }
            let _ = writeln!(
                s,
                r##"<line x1="{}" y1="{2}" x2="{}" y2="{2}" stroke="#444444" stroke-dasharray="6 4"><title>{3}</title></line>"##,
                num(LEFT),
                num(LEFT + pw),
                num(sy(*y)),
                escape(label)
            );
        }

        let mut legend = Vec::new();
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<(f64, f64)> = series
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| (sx(x), sy(y)))
                .collect();
            if matches!(series.mark, Mark::Line | Mark::LinePoints) && pts.len() > 1 {
                let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{},{}", num(x), num(y))).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    path.join(" ")
                );
            }
            if matches!(series.mark, Mark::Points | Mark::LinePoints) {
                for &(x, y) in &pts {
                    let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="2.5" fill="{color}"/>"#, num(x), num(y));
                }
            }
            legend.push((color, &series.label));
        }
        for (i, (color, label)) in legend.iter().enumerate() {
            let y = TOP + 12.0 + 18.0 * i as f64;
            let x = LEFT + pw + 12.0;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="12" height="4" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
                num(x),
                num(y - 4.0),
                num(x + 18.0),
                num(y + 2.0),
                escape(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn padded(values: &[f64], pad: f64) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        let d = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        return (lo - d, hi + d);
    }
    let d = pad * (hi - lo);
    (lo - d, hi + d)
}

/// Round tick positions inside `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64, span: f64) -> String {
    let decimals = (-(span / 6.0).log10().floor()).clamp(0.0, 8.0) as usize + 1;
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(0.0, 1.0), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(tick_label(0.6000000000000001, 1.0), "0.6");
        assert_eq!(tick_label(-0.0, 1.0), "0");
    }

    #[test]
    fn render_is_deterministic_and_escaped() {
        let chart = Chart::new("a < b", "x", "y")
            .series("s", vec![(0.0, 1.0), (1.0, 2.0), (2.0, f64::NAN)], Mark::LinePoints)
            .band(0.2, 0.4, "window")
            .hline(1.5, "level");
        let a = chart.render();
        assert_eq!(a, chart.render());
        assert!(a.contains("a &lt; b"));
        assert_eq!(a.matches("<circle").count(), 2);
        assert!(a.contains("stroke-dasharray"));
    }

    #[test]
    fn degenerate_ranges_are_widened() {
        assert_eq!(padded(&[], 0.05), (0.0, 1.0));
        let (lo, hi) = padded(&[2.0, 2.0], 0.05);
        assert!(lo < 2.0 && hi > 2.0);
    }
}
