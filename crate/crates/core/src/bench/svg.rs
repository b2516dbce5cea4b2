//! Minimal, dependency-free SVG charts. Coordinates are printed with a fixed
//! number of decimals so identical inputs give identical files.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 48.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Sample quantile with linear interpolation between order statistics
/// (the usual "type 7" definition). `sorted` must be sorted and non-empty.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if sorted.is_empty() {
        return None;
    }
    sorted.sort_by(f64::total_cmp);
    Some(quantile(&sorted, 0.5))
}

/// Five-number summary with Tukey whiskers.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Most extreme values within 1.5 IQR of the box.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

pub fn box_stats(values: &[f64]) -> Option<BoxStats> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if sorted.is_empty() {
        return None;
    }
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (fence_low, fence_high) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|&v| v >= fence_low && v <= fence_high)
        .collect();
    Some(BoxStats {
        q1,
        median: quantile(&sorted, 0.5),
        q3,
        whisker_low: inside[0],
        whisker_high: inside[inside.len() - 1],
        outliers: sorted
            .iter()
            .copied()
            .filter(|&v| v < fence_low || v > fence_high)
            .collect(),
    })
}

/// Freedman-Diaconis bin count, at least one.
pub fn freedman_diaconis_bins(data: &[f64]) -> usize {
    let mut sorted: Vec<f64> = data.iter().copied().filter(|v| v.is_finite()).collect();
    if sorted.len() < 2 {
        return 1;
    }
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let range = sorted[sorted.len() - 1] - sorted[0];
    if iqr <= 0.0 || range <= 0.0 {
        return 1;
    }
    let width = 2.0 * iqr / (sorted.len() as f64).cbrt();
    ((range / width).ceil() as usize).clamp(1, 200)
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        let pad = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        let (x_min, x_max) = pad(x_min, x_max);
        let (y_min, y_max) = pad(y_min, y_max);
        Frame {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT
            + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT
            - MARGIN_BOTTOM
            - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, frame: &Frame, y_label: &str, x_ticks: bool) {
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let _ = writeln!(
        out,
        r#"<path d="M{left:.2} {top:.2} V{bottom:.2} H{right:.2}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let v = frame.y_min + (frame.y_max - frame.y_min) * k as f64 / 4.0;
        let y = frame.y(v);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{left:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            left - 4.0,
            left - 6.0,
            y + 4.0
        );
        if x_ticks {
            let v = frame.x_min + (frame.x_max - frame.x_min) * k as f64 / 4.0;
            let x = frame.x(v);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{v:.3}</text>"#,
                bottom + 4.0,
                bottom + 18.0
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (top + bottom) / 2.0,
        escape(y_label)
    );
}

/// Side-by-side boxplots, one per labelled group.
pub fn boxplot_svg(title: &str, y_label: &str, groups: &[(String, Vec<f64>)]) -> String {
    let stats: Vec<Option<BoxStats>> = groups.iter().map(|(_, v)| box_stats(v)).collect();
    let all = groups
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .filter(|v| v.is_finite());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let span = (hi - lo).max(1e-12);
    let frame = Frame::new(
        0.0,
        groups.len().max(1) as f64,
        lo - 0.05 * span,
        hi + 0.05 * span,
    );
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &frame, y_label, false);
    let bottom = HEIGHT - MARGIN_BOTTOM;
    for (i, ((label, _), s)) in groups.iter().zip(&stats).enumerate() {
        let centre = frame.x(i as f64 + 0.5);
        let half = 0.25 * (frame.x(1.0) - frame.x(0.0));
        let colour = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<text x="{centre:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 18.0,
            escape(label)
        );
        let Some(s) = s else { continue };
        let (y1, ym, y3) = (frame.y(s.q1), frame.y(s.median), frame.y(s.q3));
        let (wl, wh) = (frame.y(s.whisker_low), frame.y(s.whisker_high));
        let _ = writeln!(
            out,
            r#"<line x1="{centre:.2}" y1="{wl:.2}" x2="{centre:.2}" y2="{y1:.2}" stroke="black"/><line x1="{centre:.2}" y1="{y3:.2}" x2="{centre:.2}" y2="{wh:.2}" stroke="black"/>"#
        );
        for y in [wl, wh] {
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/>"#,
                centre - half / 2.0,
                centre + half / 2.0
            );
        }
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{y3:.2}" width="{:.2}" height="{:.2}" fill="{colour}" fill-opacity="0.35" stroke="{colour}"/>"#,
            centre - half,
            2.0 * half,
            (y1 - y3).max(0.0)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{ym:.2}" x2="{:.2}" y2="{ym:.2}" stroke="black" stroke-width="2"/>"#,
            centre - half,
            centre + half
        );
        for &v in &s.outliers {
            let _ = writeln!(
                out,
                r#"<circle cx="{centre:.2}" cy="{:.2}" r="2.5" fill="none" stroke="{colour}"/>"#,
                frame.y(v)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// A labelled polyline.
#[derive(Debug, Clone)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Density-scaled histogram of `data` with curves drawn on top.
pub fn density_svg(title: &str, data: &[f64], curves: &[Curve]) -> String {
    let finite: Vec<f64> = data.iter().copied().filter(|v| v.is_finite()).collect();
    let bins = freedman_diaconis_bins(&finite);
    let (d_lo, d_hi) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let (d_lo, d_hi) = if d_lo.is_finite() {
        (d_lo.min(0.0), d_hi)
    } else {
        (0.0, 1.0)
    };
    let width = if d_hi > d_lo {
        (d_hi - d_lo) / bins as f64
    } else {
        1.0
    };
    let mut counts = vec![0usize; bins];
    for &v in &finite {
        let k = (((v - d_lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let n = finite.len().max(1) as f64;
    let heights: Vec<f64> = counts.iter().map(|&c| c as f64 / (n * width)).collect();

    let mut x_max = d_lo + width * bins as f64;
    let mut y_max = heights.iter().copied().fold(0.0, f64::max);
    for c in curves {
        for &(x, y) in &c.points {
            if x.is_finite() && y.is_finite() {
                x_max = x_max.max(x);
                y_max = y_max.max(y);
            }
        }
    }
    let frame = Frame::new(d_lo, x_max, 0.0, y_max * 1.05);
    let mut out = String::new();
    open(&mut out, title);
    for (k, &h) in heights.iter().enumerate() {
        let (x0, x1) = (
            frame.x(d_lo + k as f64 * width),
            frame.x(d_lo + (k + 1) as f64 * width),
        );
        let y = frame.y(h);
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#cccccc" stroke="#999999"/>"##,
            x1 - x0,
            frame.y(0.0) - y
        );
    }
    axes(&mut out, &frame, "density", true);
    for (i, c) in curves.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        for (j, &(x, y)) in c
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .enumerate()
        {
            let _ = write!(
                path,
                "{}{:.2} {:.2}",
                if j == 0 { "M" } else { " L" },
                frame.x(x),
                frame.y(y)
            );
        }
        let _ = writeln!(
            out,
            r#"<path d="{path}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#
        );
        let ly = MARGIN_TOP + 16.0 * (i as f64 + 1.0);
        let lx = WIDTH - MARGIN_RIGHT - 140.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{colour}" stroke-width="2"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0,
            lx + 26.0,
            escape(&c.label)
        );
    }
    out.push_str("</svg>\n");
    out
}
