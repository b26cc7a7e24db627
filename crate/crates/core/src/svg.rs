//! Static SVG charts: line series, bubbles, stacked panels, dendrograms.
//!
//! Output is plain XML text with fixed number formatting, so identical input
//! produces identical bytes.

use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};

use crate::clustering::Dendrogram;

const WIDTH: f64 = 960.0;
const PANEL_HEIGHT: f64 = 240.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 36.0;

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// A named line.
#[derive(Debug, Clone)]
pub struct Line {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(NaiveDate, f64)>,
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn open_svg(height: f64) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {WIDTH:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Maps data coordinates into one panel.
struct Frame {
    top: f64,
    height: f64,
    x0: i64,
    x1: i64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new<'a, I: IntoIterator<Item = &'a (NaiveDate, f64)>>(points: I, top: f64, height: f64) -> Self {
        let mut x = (i64::MAX, i64::MIN);
        let mut y = (f64::INFINITY, f64::NEG_INFINITY);
        for (d, v) in points {
            let day = d.num_days_from_ce() as i64;
            x = (x.0.min(day), x.1.max(day));
            if v.is_finite() {
                y = (y.0.min(*v), y.1.max(*v));
            }
        }
        if x.0 > x.1 {
            x = (0, 1);
        }
        if x.0 == x.1 {
            x = (x.0 - 1, x.1 + 1);
        }
        if !(y.0.is_finite() && y.1.is_finite()) {
            y = (0.0, 1.0);
        }
        if y.0 == y.1 {
            let pad = if y.0 == 0.0 { 1.0 } else { y.0.abs() * 0.1 };
            y = (y.0 - pad, y.1 + pad);
        }
        Frame { top, height, x0: x.0, x1: x.1, y0: y.0, y1: y.1 }
    }

    fn px(&self, d: NaiveDate) -> f64 {
        let t = (d.num_days_from_ce() as i64 - self.x0) as f64 / (self.x1 - self.x0) as f64;
        MARGIN_LEFT + t * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        let t = (v - self.y0) / (self.y1 - self.y0);
        self.top + self.height - t * self.height
    }

    fn axes(&self, out: &mut String, title: &str) {
        let (l, r) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (t, b) = (self.top, self.top + self.height);
        let _ = writeln!(
            out,
            "<rect x=\"{l:.2}\" y=\"{t:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#999\"/>",
            r - l,
            b - t
        );
        let _ = writeln!(out, "<text x=\"{l:.2}\" y=\"{:.2}\" font-size=\"13\">{}</text>", t - 8.0, escape(title));
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            l - 4.0,
            t + 10.0,
            fmt_tick(self.y1)
        );
        let _ =
            writeln!(out, "<text x=\"{:.2}\" y=\"{b:.2}\" text-anchor=\"end\">{}</text>", l - 4.0, fmt_tick(self.y0));
        if self.y0 < 0.0 && self.y1 > 0.0 {
            let z = self.py(0.0);
            let _ = writeln!(out, "<line x1=\"{l:.2}\" y1=\"{z:.2}\" x2=\"{r:.2}\" y2=\"{z:.2}\" stroke=\"#ccc\" stroke-dasharray=\"4 3\"/>");
        }
        let first = NaiveDate::from_num_days_from_ce_opt(self.x0 as i32);
        let last = NaiveDate::from_num_days_from_ce_opt(self.x1 as i32);
        if let (Some(a), Some(z)) = (first, last) {
            let _ = writeln!(out, "<text x=\"{l:.2}\" y=\"{:.2}\">{a}</text>", b + 14.0);
            let _ = writeln!(out, "<text x=\"{r:.2}\" y=\"{:.2}\" text-anchor=\"end\">{z}</text>", b + 14.0);
        }
    }
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e6) {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

fn polyline(out: &mut String, frame: &Frame, line: &Line) {
    let pts: Vec<String> = line
        .points
        .iter()
        .filter(|(_, v)| v.is_finite())
        .map(|(d, v)| format!("{:.2},{:.2}", frame.px(*d), frame.py(*v)))
        .collect();
    match pts.len() {
        0 => {}
        1 => {
            let (x, y) = pts[0].split_once(',').unwrap_or(("0", "0"));
            let _ = writeln!(out, "<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"{}\"/>", line.color);
        }
        _ => {
            let _ = writeln!(
                out,
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1\" points=\"{}\"/>",
                line.color,
                pts.join(" ")
            );
        }
    }
}

fn legend(out: &mut String, lines: &[Line], top: f64) {
    for (i, line) in lines.iter().enumerate() {
        let x = MARGIN_LEFT + 10.0 + 180.0 * i as f64;
        let y = top + 14.0;
        let _ = writeln!(
            out,
            "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"12\" height=\"3\" fill=\"{}\"/>",
            y - 4.0,
            line.color
        );
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{y:.2}\">{}</text>", x + 16.0, escape(&line.label));
    }
}

/// Several lines on one set of axes.
pub fn line_chart(title: &str, lines: &[Line]) -> String {
    let height = MARGIN_TOP + PANEL_HEIGHT + MARGIN_BOTTOM;
    let mut out = open_svg(height);
    let frame = Frame::new(lines.iter().flat_map(|l| &l.points), MARGIN_TOP, PANEL_HEIGHT);
    frame.axes(&mut out, title);
    for line in lines {
        polyline(&mut out, &frame, line);
    }
    legend(&mut out, lines, MARGIN_TOP);
    out.push_str("</svg>\n");
    out
}

/// Vertically stacked panels sharing the time axis, one line each.
pub fn stacked_chart(title: &str, panels: &[Line]) -> String {
    let step = PANEL_HEIGHT * 0.6 + MARGIN_TOP;
    let height = MARGIN_TOP + step * panels.len().max(1) as f64 + MARGIN_BOTTOM;
    let mut out = open_svg(height);
    let _ = writeln!(out, "<text x=\"{MARGIN_LEFT:.2}\" y=\"18\" font-size=\"14\">{}</text>", escape(title));
    let all: Vec<(NaiveDate, f64)> = panels.iter().flat_map(|p| p.points.iter().copied()).collect();
    for (i, panel) in panels.iter().enumerate() {
        let top = MARGIN_TOP + 12.0 + step * i as f64;
        let mut frame = Frame::new(&panel.points, top, PANEL_HEIGHT * 0.6);
        // shared x range across panels
        let shared = Frame::new(&all, top, PANEL_HEIGHT * 0.6);
        frame.x0 = shared.x0;
        frame.x1 = shared.x1;
        frame.axes(&mut out, &panel.label);
        polyline(&mut out, &frame, panel);
    }
    out.push_str("</svg>\n");
    out
}

/// Bubbles at `(date, value)` whose diameter scales with `size`.
pub fn bubble_chart(title: &str, points: &[(NaiveDate, f64, f64)], size_label: &str) -> String {
    let height = MARGIN_TOP + PANEL_HEIGHT + MARGIN_BOTTOM;
    let mut out = open_svg(height);
    let xy: Vec<(NaiveDate, f64)> = points.iter().map(|&(d, v, _)| (d, v)).collect();
    let frame = Frame::new(&xy, MARGIN_TOP, PANEL_HEIGHT);
    frame.axes(&mut out, title);
    let max_size = points.iter().map(|p| p.2).filter(|s| s.is_finite()).fold(0.0f64, f64::max);
    for &(d, v, s) in points {
        if !v.is_finite() {
            continue;
        }
        let r = if max_size > 0.0 { 1.0 + 7.0 * s.max(0.0) / max_size } else { 2.0 };
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{r:.2}\" fill=\"{}\" fill-opacity=\"0.35\" stroke=\"{}\" stroke-width=\"0.5\"/>",
            frame.px(d),
            frame.py(v),
            PALETTE[0],
            PALETTE[0]
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">bubble size: {}</text>",
        WIDTH - MARGIN_RIGHT,
        MARGIN_TOP - 8.0,
        escape(size_label)
    );
    out.push_str("</svg>\n");
    out
}

/// A four-leaf dendrogram drawn top-down, height on the vertical axis.
pub fn dendrogram_chart(title: &str, dg: &Dendrogram) -> String {
    let height = MARGIN_TOP + PANEL_HEIGHT + MARGIN_BOTTOM;
    let mut out = open_svg(height);
    let _ = writeln!(out, "<text x=\"{MARGIN_LEFT:.2}\" y=\"18\" font-size=\"14\">{}</text>", escape(title));

    // Leaf order: replay merges so each merged pair ends up adjacent.
    let mut groups: Vec<String> = Vec::new();
    for m in &dg.merges {
        let l = groups.iter().position(|g| *g == m.left);
        let r = groups.iter().position(|g| *g == m.right);
        match (l, r) {
            (Some(a), Some(b)) => {
                let (a, b) = (a.min(b), a.max(b));
                let merged = format!("{}{}", groups[a], groups[b]);
                groups.remove(b);
                groups[a] = merged;
            }
            (Some(a), None) => groups[a] = format!("{}{}", groups[a], m.right),
            (None, Some(b)) => groups[b] = format!("{}{}", m.left, groups[b]),
            (None, None) => groups.push(format!("{}{}", m.left, m.right)),
        }
    }
    let leaves: Vec<char> = groups.concat().chars().collect();

    let max_h = dg.merges.iter().map(|m| m.height).fold(0.0f64, f64::max).max(1e-12);
    let (l, r) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let base = MARGIN_TOP + PANEL_HEIGHT;
    let y_of = |h: f64| base - h / max_h * (PANEL_HEIGHT - 10.0);
    let slot = (r - l) / leaves.len().max(1) as f64;

    // x of a cluster = mean x of its leaves; y = its merge height.
    let x_of = |label: &str| {
        let xs: Vec<f64> = label
            .chars()
            .filter_map(|c| leaves.iter().position(|&x| x == c))
            .map(|i| l + slot * (i as f64 + 0.5))
            .collect();
        xs.iter().sum::<f64>() / xs.len().max(1) as f64
    };
    let mut heights: Vec<(String, f64)> = Vec::new();
    let height_of = |label: &str, hs: &Vec<(String, f64)>| {
        hs.iter().find(|(k, _)| sorted(k) == sorted(label)).map_or(0.0, |(_, h)| *h)
    };
    for m in &dg.merges {
        let (xl, xr) = (x_of(&m.left), x_of(&m.right));
        let (hl, hr) = (height_of(&m.left, &heights), height_of(&m.right, &heights));
        let y = y_of(m.height);
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"#333\" points=\"{xl:.2},{:.2} {xl:.2},{y:.2} {xr:.2},{y:.2} {xr:.2},{:.2}\"/>",
            y_of(hl),
            y_of(hr)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{:.4}</text>",
            (xl + xr) / 2.0,
            y - 4.0,
            m.height
        );
        heights.push((format!("{}{}", m.left, m.right), m.height));
    }
    for (i, c) in leaves.iter().enumerate() {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\">{c}</text>",
            l + slot * (i as f64 + 0.5),
            base + 16.0
        );
    }
    out.push_str("</svg>\n");
    out
}

fn sorted(s: &str) -> String {
    let mut c: Vec<char> = s.chars().collect();
    c.sort_unstable();
    c.into_iter().collect()
}
