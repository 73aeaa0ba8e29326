//! Static SVG figures drawn straight from the CSV files the other commands
//! write. Output depends only on the input bytes.

use std::fmt::Write as _;

use passage_core::io::{read_numeric_csv, read_sweep_csv, NumericTable, SweepTable, EFFICIENCY_COLUMN};
use passage_core::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

// Viridis sampled at 0, 0.25, 0.5, 0.75, 1.
const COLORMAP: [(f64, f64, f64); 5] =
    [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn color(v: f64) -> String {
    let x = v.clamp(0.0, 1.0) * (COLORMAP.len() - 1) as f64;
    let k = (x.floor() as usize).min(COLORMAP.len() - 2);
    let f = x - k as f64;
    let (a, b) = (COLORMAP[k], COLORMAP[k + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Five to seven round tick values covering [lo, hi].
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step - 1e-9).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&self, svg: &mut String, title: &str, x_name: &str, y_name: &str) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
        let _ = writeln!(svg, r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
        for t in ticks(self.x.0, self.x.1) {
            let px = self.px(t);
            let _ = writeln!(svg, r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
            let _ = writeln!(svg, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 18.0, label(t));
        }
        for t in ticks(self.y.0, self.y.1) {
            let py = self.py(t);
            let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/>"#, x0 - 5.0);
            let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, py + 4.0, label(t));
        }
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, 0.5 * (x0 + x1), HEIGHT - 12.0, escape(x_name));
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            0.5 * (y0 + y1),
            0.5 * (y0 + y1),
            escape(y_name)
        );
        let _ = writeln!(svg, r#"<text x="{:.2}" y="24" text-anchor="middle">{}</text>"#, 0.5 * (x0 + x1), escape(title));
    }
}

fn open_svg() -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    svg
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Line plot of every column against the first. Evolution files skip the
/// trace-defect column, which lives on a different scale.
pub fn line_plot(table: &NumericTable, title: &str) -> Result<String> {
    if table.header.len() < 2 || table.rows.len() < 2 {
        return Err(Error::InvalidArgument("line plot needs an x column, one series and two rows".into()));
    }
    let series: Vec<usize> = (1..table.header.len())
        .filter(|&c| table.header[c] != "trace_defect")
        .filter(|&c| table.rows.iter().any(|r| r[c] != 0.0))
        .collect();
    let series = if series.is_empty() { vec![1] } else { series };
    let frame = Frame::new(
        range(table.rows.iter().map(|r| r[0])),
        range(table.rows.iter().flat_map(|r| series.iter().map(move |&c| r[c]))),
    );
    let mut svg = open_svg();
    let y_name = if table.header.get(1).is_some_and(|h| h == "p0") { "population" } else { "value" };
    frame.axes(&mut svg, title, &table.header[0], y_name);
    for (k, &c) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut points = String::new();
        for r in &table.rows {
            let _ = write!(points, "{:.2},{:.2} ", frame.px(r[0]), frame.py(r[c]));
        }
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, points.trim_end());
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(svg, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&table.header[c]));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Efficiency heatmap of a two-axis sweep with a colour bar over [0, 1].
pub fn heatmap(table: &SweepTable, title: &str) -> Result<String> {
    let [xs, ys] = table.axis_values.as_slice() else {
        return Err(Error::InvalidArgument("heatmap needs a two-axis sweep".into()));
    };
    let half = |v: &[f64], k: usize| {
        if v.len() == 1 {
            0.5
        } else if k + 1 < v.len() {
            0.5 * (v[k + 1] - v[k])
        } else {
            0.5 * (v[k] - v[k - 1])
        }
    };
    let frame = Frame::new(
        (xs[0] - half(xs, 0), xs[xs.len() - 1] + half(xs, xs.len() - 1)),
        (ys[0] - half(ys, 0), ys[ys.len() - 1] + half(ys, ys.len() - 1)),
    );
    let mut svg = open_svg();
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let v = table.efficiency[i * ys.len() + j];
            let (left, right) = (frame.px(x - half(xs, i)), frame.px(x + half(xs, i)));
            let (top, bottom) = (frame.py(y + half(ys, j)), frame.py(y - half(ys, j)));
            let _ = writeln!(
                svg,
                r#"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                right - left,
                bottom - top,
                color(v)
            );
        }
    }
    frame.axes(&mut svg, title, &table.axis_names[0], &table.axis_names[1]);
    let bar_x = WIDTH - RIGHT + 30.0;
    let bar_h = HEIGHT - TOP - BOTTOM;
    let steps = 50;
    for k in 0..steps {
        let v0 = k as f64 / steps as f64;
        let y = TOP + bar_h * (1.0 - v0 - 1.0 / steps as f64);
        let _ = writeln!(
            svg,
            r#"<rect x="{bar_x:.2}" y="{y:.2}" width="18" height="{:.2}" fill="{}"/>"#,
            bar_h / steps as f64 + 0.5,
            color(v0 + 0.5 / steps as f64)
        );
    }
    for v in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let y = TOP + bar_h * (1.0 - v);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, bar_x + 24.0, y + 4.0, label(v));
    }
    let _ = writeln!(svg, r#"<text x="{bar_x:.2}" y="{:.2}">{EFFICIENCY_COLUMN}</text>"#, TOP - 8.0);
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Chooses the figure from the CSV header: two-axis sweeps become heatmaps,
/// everything else a line plot.
pub fn render_csv(text: &str, title: &str) -> Result<String> {
    let table = read_numeric_csv(text.as_bytes())?;
    if table.header.len() == 3 && table.header[2] == EFFICIENCY_COLUMN {
        heatmap(&read_sweep_csv(text.as_bytes())?, title)
    } else {
        line_plot(&table, title)
    }
}
