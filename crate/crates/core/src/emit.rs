//! CSV, JSON and SVG renderings of sweep results.
//!
//! Rendering is a pure function of the result, so fixed inputs give fixed
//! bytes. Files are only created after rendering succeeded.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::contour::{march, Field};
use crate::error::{Error, Result};
use crate::sweep::SweepResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(Error::param("format", format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SvgOptions {
    /// Iso-levels drawn over grid results.
    pub contour_levels: Vec<f64>,
}

/// Nine significant digits in scientific notation.
pub fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn to_csv(result: &SweepResult) -> Result<String> {
    non_empty(result)?;
    let mut out = String::new();
    writeln!(out, "# {}", serde_json::to_string(&result.config).expect("json value")).unwrap();
    writeln!(out, "{}", result.columns.join(",")).unwrap();
    for row in &result.rows {
        let cells: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    Ok(out)
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    title: &'a str,
    columns: &'a [String],
    shape: Option<(usize, usize)>,
    config: &'a serde_json::Value,
    rows: &'a [Vec<f64>],
}

pub fn to_json(result: &SweepResult) -> Result<String> {
    non_empty(result)?;
    let doc = JsonDoc {
        title: &result.title,
        columns: &result.columns,
        shape: result.shape,
        config: &result.config,
        rows: &result.rows,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("json value");
    s.push('\n');
    Ok(s)
}

fn non_empty(result: &SweepResult) -> Result<()> {
    if result.rows.is_empty() || result.columns.is_empty() {
        Err(Error::EmptyResult)
    } else {
        Ok(())
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn svg_header(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        escape(title)
    )
    .unwrap();
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn draw_frame(out: &mut String, axes: &Axes, x_label: &str, y_label: &str, log_y: bool) {
    let (l, r) = (MARGIN_L, WIDTH - MARGIN_R);
    let (t, b) = (MARGIN_T, HEIGHT - MARGIN_B);
    writeln!(
        out,
        r#"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    )
    .unwrap();
    for k in 0..=5 {
        let x = axes.x0 + (axes.x1 - axes.x0) * k as f64 / 5.0;
        let px = axes.px(x);
        writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{b:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            b + 5.0,
            b + 18.0,
            trim_tick(x)
        )
        .unwrap();
    }
    if log_y {
        let (lo, hi) = (axes.y0.floor() as i32, axes.y1.ceil() as i32);
        for e in lo..=hi {
            let y = e as f64;
            if y < axes.y0 || y > axes.y1 {
                continue;
            }
            let py = axes.py(y);
            writeln!(
                out,
                r#"<line x1="{:.2}" y1="{py:.2}" x2="{l:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"#,
                l - 5.0,
                l - 8.0,
                py + 4.0
            )
            .unwrap();
        }
    } else {
        for k in 0..=5 {
            let y = axes.y0 + (axes.y1 - axes.y0) * k as f64 / 5.0;
            let py = axes.py(y);
            writeln!(
                out,
                r#"<line x1="{:.2}" y1="{py:.2}" x2="{l:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                l - 5.0,
                l - 8.0,
                py + 4.0,
                trim_tick(y)
            )
            .unwrap();
        }
    }
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(y_label)
    )
    .unwrap();
}

fn trim_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Log-scale offset curves for one-dimensional sweeps.
fn line_plot(result: &SweepResult) -> Result<String> {
    let series: Vec<usize> = (1..result.columns.len())
        .filter(|k| result.columns[*k].starts_with("du_"))
        .collect();
    if series.is_empty() {
        return Err(Error::param("format", "no offset columns to plot"));
    }
    let (x0, x1) = bounds(result.rows.iter().map(|r| r[0]));
    let (y0, y1) = bounds(
        result
            .rows
            .iter()
            .flat_map(|r| series.iter().map(move |k| r[*k]))
            .filter(|v| *v > 0.0)
            .map(f64::log10),
    );
    let pad = ((y1 - y0) * 0.05).max(0.05);
    let axes = Axes {
        x0,
        x1: if x1 > x0 { x1 } else { x0 + 1.0 },
        y0: y0 - pad,
        y1: y1 + pad,
    };
    let mut out = String::new();
    svg_header(&mut out, &result.title);
    draw_frame(&mut out, &axes, &result.columns[0], "minimum offset (s)", true);
    for (n, k) in series.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let points: Vec<String> = result
            .rows
            .iter()
            .filter(|r| r[*k] > 0.0)
            .map(|r| format!("{:.2},{:.2}", axes.px(r[0]), axes.py(r[*k].log10())))
            .collect();
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        )
        .unwrap();
        let ly = MARGIN_T + 10.0 + 18.0 * n as f64;
        let lx = WIDTH - MARGIN_R + 10.0;
        writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            escape(&result.columns[*k])
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn heat_color(v: f64, scale: f64) -> String {
    // White at zero, blue for positive, red for negative.
    let f = if scale > 0.0 { (v / scale).clamp(-1.0, 1.0) } else { 0.0 };
    let fade = |x: f64| (255.0 * (1.0 - x.abs())).round() as u8;
    if f >= 0.0 {
        format!("#{:02x}{:02x}ff", fade(f), fade(f))
    } else {
        format!("#ff{:02x}{:02x}", fade(f), fade(f))
    }
}

/// Filled grid with iso-lines for two-dimensional results.
fn grid_plot(result: &SweepResult, (n1, n2): (usize, usize), options: &SvgOptions) -> Result<String> {
    let xs: Vec<f64> = (0..n1).map(|i| result.rows[i * n2][0]).collect();
    let ys: Vec<f64> = (0..n2).map(|j| result.rows[j][1]).collect();
    let values: Vec<f64> = result.rows.iter().map(|r| r[2]).collect();
    let axes = Axes {
        x0: xs[0],
        x1: xs[n1 - 1],
        y0: ys[0],
        y1: ys[n2 - 1],
    };
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = String::new();
    svg_header(&mut out, &result.title);
    let half = |v: &[f64], k: usize| {
        let lo = if k == 0 { v[0] } else { 0.5 * (v[k - 1] + v[k]) };
        let hi = if k + 1 == v.len() { v[k] } else { 0.5 * (v[k] + v[k + 1]) };
        (lo, hi)
    };
    for i in 0..n1 {
        let (xa, xb) = half(&xs, i);
        for j in 0..n2 {
            let (ya, yb) = half(&ys, j);
            let (px, py) = (axes.px(xa), axes.py(yb));
            writeln!(
                out,
                r#"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                axes.px(xb) - px,
                axes.py(ya) - py,
                heat_color(values[i * n2 + j], scale)
            )
            .unwrap();
        }
    }
    draw_frame(&mut out, &axes, &result.columns[0], &result.columns[1], false);
    let field = Field {
        xs: &xs,
        ys: &ys,
        values: &values,
    };
    for (n, level) in options.contour_levels.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        for line in march(&field, *level) {
            let points: Vec<String> = line
                .iter()
                .map(|(x, y)| format!("{:.2},{:.2}", axes.px(*x), axes.py(*y)))
                .collect();
            writeln!(
                out,
                r#"<polyline class="contour" data-level="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                format_value(*level),
                points.join(" ")
            )
            .unwrap();
        }
        let ly = MARGIN_T + 10.0 + 18.0 * n as f64;
        let lx = WIDTH - MARGIN_R + 10.0;
        writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{:.2e} s</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            level
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn to_svg(result: &SweepResult, options: &SvgOptions) -> Result<String> {
    non_empty(result)?;
    match result.shape {
        Some((n1, n2)) if n1 >= 2 && n2 >= 2 && result.columns.len() >= 3 => {
            grid_plot(result, (n1, n2), options)
        }
        Some(_) => Err(Error::param("format", "grid too small to plot")),
        None => line_plot(result),
    }
}

pub fn render(result: &SweepResult, format: Format, options: &SvgOptions) -> Result<String> {
    match format {
        Format::Csv => to_csv(result),
        Format::Json => to_json(result),
        Format::Svg => to_svg(result, options),
    }
}

/// Renders and writes `result` to `path`. Nothing is written on error.
pub fn emit(result: &SweepResult, format: Format, path: &Path, options: &SvgOptions) -> Result<()> {
    let text = render(result, format, options)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
