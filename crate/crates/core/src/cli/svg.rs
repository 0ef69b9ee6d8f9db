//! Standalone SVG 1.1 rendering of emitted tables.

use std::fmt::Write as _;

use super::csv::Table;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(out, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" stroke="black" fill="none"/>"#);
        let text = |out: &mut String, x: f64, y: f64, anchor: &str, s: &str| {
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{}</text>"#,
                escape(s)
            );
        };
        text(out, l, b + 16.0, "middle", &format!("{:.3}", self.x.0));
        text(out, r, b + 16.0, "middle", &format!("{:.3}", self.x.1));
        text(out, l - 6.0, b, "end", &format!("{:.3}", self.y.0));
        text(out, l - 6.0, t + 4.0, "end", &format!("{:.3}", self.y.1));
        text(out, (l + r) / 2.0, b + 34.0, "middle", x_label);
        text(out, 14.0, (t + b) / 2.0, "middle", y_label);
    }
}

/// Lines of every numeric column against the first numeric column.
pub fn line_plot(table: &Table, title: &str) -> String {
    let numeric: Vec<usize> = (0..table.header.len()).filter(|&i| table.is_numeric(i)).collect();
    let mut out = header(title);
    let Some((&x_col, series)) = numeric.split_first() else {
        out.push_str("</svg>\n");
        return out;
    };
    let xs = table.numbers(x_col);
    let columns: Vec<Vec<Option<f64>>> = series.iter().map(|&i| table.numbers(i)).collect();
    let frame = Frame {
        x: bounds(xs.iter().flatten().copied()),
        y: bounds(columns.iter().flatten().flatten().copied()),
    };
    let y_label = series.iter().map(|&i| table.header[i].as_str()).collect::<Vec<_>>().join(", ");
    frame.axes(&mut out, &table.header[x_col], &y_label);

    if frame.y.0 < 0.0 && frame.y.1 > 0.0 {
        let y0 = frame.py(0.0);
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="#999999" stroke-dasharray="4 3"/>"##,
            WIDTH - MARGIN
        );
    }

    for (k, ys) in columns.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut segment: Vec<String> = Vec::new();
        let flush = |segment: &mut Vec<String>, out: &mut String| {
            if segment.len() > 1 {
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" stroke="{color}" stroke-width="1.5" fill="none"/>"#,
                    segment.join(" ")
                );
            }
            segment.clear();
        };
        for (x, y) in xs.iter().zip(ys) {
            match (x, y) {
                (Some(x), Some(y)) => segment.push(format!("{:.2},{:.2}", frame.px(*x), frame.py(*y))),
                _ => flush(&mut segment, &mut out),
            }
        }
        flush(&mut segment, &mut out);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            WIDTH - MARGIN + 4.0,
            MARGIN + 14.0 * k as f64,
            escape(&table.header[series[k]])
        );
    }
    out.push_str("</svg>\n");
    out
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Heatmap of `value_col` over the `(x_col, y_col)` grid.
pub fn heatmap(table: &Table, x_col: usize, y_col: usize, value_col: usize, title: &str) -> String {
    let xs = table.numbers(x_col);
    let ys = table.numbers(y_col);
    let vs = table.numbers(value_col);
    let x_axis = distinct(xs.iter().flatten().copied());
    let y_axis = distinct(ys.iter().flatten().copied());
    let mut out = header(title);
    let frame = Frame {
        x: bounds(x_axis.iter().copied()),
        y: bounds(y_axis.iter().copied()),
    };
    frame.axes(&mut out, &table.header[x_col], &table.header[y_col]);
    let cell_w = (WIDTH - 2.0 * MARGIN) / x_axis.len().max(1) as f64;
    let cell_h = (HEIGHT - 2.0 * MARGIN) / y_axis.len().max(1) as f64;
    for ((x, y), v) in xs.iter().zip(&ys).zip(&vs) {
        let (Some(x), Some(y)) = (x, y) else { continue };
        let i = x_axis.partition_point(|a| a < x);
        let j = y_axis.partition_point(|a| a < y);
        let fill = match v {
            Some(v) => {
                let t = v.clamp(0.0, 1.0);
                let shade = |lo: f64, hi: f64| (lo + (hi - lo) * t).round() as u8;
                format!("#{:02x}{:02x}{:02x}", shade(255.0, 8.0), shade(255.0, 48.0), shade(255.0, 107.0))
            }
            None => "#cccccc".to_string(),
        };
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            MARGIN + i as f64 * cell_w,
            HEIGHT - MARGIN - (j + 1) as f64 * cell_h,
            cell_w,
            cell_h
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Picks a heatmap for `(f, r_p, …, basin)` grids and line plots otherwise.
pub fn render(table: &Table, title: &str) -> String {
    match (table.column("f"), table.column("r_p"), table.column("basin")) {
        (Some(f), Some(r), Some(b)) => heatmap(table, f, r, b, title),
        _ => line_plot(table, title),
    }
}
