//! SVG line charts from scan and summary CSV files.
//!
//! The x axis is the `r_angstrom` column. Columns ending in `_rel_kcal` go
//! to the upper panel (energy relative to dissociation), columns ending in
//! `_err_kcal` or equal to `range_kcal` go to the lower panel. A matching
//! `*_min_*` / `*_max_*` pair is drawn as a shaded band instead of two lines.

use std::fmt::Write;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    pub width: f64,
    pub panel_height: f64,
    pub title: String,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self {
            width: 640.0,
            panel_height: 280.0,
            title: String::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlotOutput {
    pub svg: String,
    pub warnings: Vec<String>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 45.0;

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

struct Band {
    name: String,
    lower: Vec<(f64, f64)>,
    upper: Vec<(f64, f64)>,
}

struct Table {
    header: Vec<String>,
    x: Vec<f64>,
    columns: Vec<Vec<Option<f64>>>,
}

fn parse_table(text: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| LabError::Config(format!("csv row 1: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let x_col = header
        .iter()
        .position(|h| h == "r_angstrom")
        .ok_or_else(|| LabError::Config("csv row 1: no r_angstrom column".into()))?;
    let mut x = Vec::new();
    let mut columns = vec![Vec::new(); header.len()];
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| LabError::Config(format!("csv row {row}: {e}")))?;
        if rec.len() != header.len() {
            return Err(LabError::Config(format!(
                "csv row {row}: {} fields, header has {}",
                rec.len(),
                header.len()
            )));
        }
        for (c, field) in rec.iter().enumerate() {
            let v = if field.is_empty() {
                None
            } else {
                match field.parse::<f64>() {
                    Ok(v) => Some(v),
                    Err(_) if c != x_col && !is_plotted(&header[c]) => None,
                    Err(_) => {
                        return Err(LabError::Config(format!(
                            "csv row {row}: column {} is not a number: {field:?}",
                            header[c]
                        )))
                    }
                }
            };
            columns[c].push(v);
        }
        match columns[x_col][i] {
            Some(v) => x.push(v),
            None => return Err(LabError::Config(format!("csv row {row}: missing r_angstrom"))),
        }
    }
    Ok(Table { header, x, columns })
}

fn is_upper(name: &str) -> bool {
    name.ends_with("_rel_kcal")
}

fn is_lower(name: &str) -> bool {
    name.ends_with("_err_kcal") || name == "range_kcal"
}

fn is_plotted(name: &str) -> bool {
    is_upper(name) || is_lower(name)
}

fn collect(table: &Table, keep: fn(&str) -> bool) -> (Vec<Series>, Vec<Band>) {
    let pts = |c: usize| -> Vec<(f64, f64)> {
        table
            .x
            .iter()
            .zip(&table.columns[c])
            .filter_map(|(&x, y)| y.map(|y| (x, y)))
            .collect()
    };
    let find = |name: &str| table.header.iter().position(|h| h == name);
    let mut series = Vec::new();
    let mut bands = Vec::new();
    for (c, name) in table.header.iter().enumerate() {
        if !keep(name) {
            continue;
        }
        if name.contains("_max_") && find(&name.replace("_max_", "_min_")).is_some() {
            continue;
        }
        if name.contains("_min_") {
            if let Some(m) = find(&name.replace("_min_", "_max_")) {
                bands.push(Band {
                    name: name.replace("_min_", "_band_"),
                    lower: pts(c),
                    upper: pts(m),
                });
                continue;
            }
        }
        series.push(Series {
            name: name.clone(),
            points: pts(c),
        });
    }
    (series, bands)
}

/// Tick positions covering `[lo, hi]` at a 1/2/5 × 10^k spacing.
fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn bounds(values: impl Iterator<Item = f64>, fallback: (f64, f64)) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return fallback;
    }
    if hi - lo < 1e-9 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

struct Frame {
    left: f64,
    top: f64,
    w: f64,
    h: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x.0) / (self.x.1 - self.x.0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.top + (self.y.1 - y) / (self.y.1 - self.y.0) * self.h
    }
}

fn path_points(frame: &Frame, pts: &[(f64, f64)]) -> String {
    pts.iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn panel(out: &mut String, frame: &Frame, ylabel: &str, series: &[Series], bands: &[Band]) {
    let (xt, xd) = ticks(frame.x.0, frame.x.1);
    let (yt, yd) = ticks(frame.y.0, frame.y.1);
    let bottom = frame.top + frame.h;
    let right = frame.left + frame.w;
    let _ = writeln!(
        out,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000"/>"##,
        frame.left, frame.top, frame.w, frame.h
    );
    for t in &xt {
        let x = frame.px(*t);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{t:.xd$}</text>"##,
            bottom + 5.0,
            bottom + 18.0
        );
    }
    for t in &yt {
        let y = frame.py(*t);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" text-anchor="end">{t:.yd$}</text>"##,
            frame.left - 5.0,
            frame.left,
            frame.left - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">R (Å)</text>"#,
        frame.left + frame.w / 2.0,
        bottom + 36.0
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate({:.2},{:.2}) rotate(-90)" text-anchor="middle">{ylabel}</text>"#,
        frame.left - 50.0,
        frame.top + frame.h / 2.0
    );
    let mut legend_y = frame.top + 12.0;
    for (i, b) in bands.iter().enumerate() {
        let color = PALETTE[(PALETTE.len() - 1 - i) % PALETTE.len()];
        let mut pts = b.lower.clone();
        pts.extend(b.upper.iter().rev());
        if !pts.is_empty() {
            let _ = writeln!(
                out,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.25" stroke="none"/>"#,
                path_points(frame, &pts)
            );
        }
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="14" height="8" fill="{color}" fill-opacity="0.25"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            right + 10.0,
            legend_y - 8.0,
            right + 28.0,
            legend_y,
            b.name
        );
        legend_y += 16.0;
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !s.points.is_empty() {
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path_points(frame, &s.points)
            );
        }
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            right + 10.0,
            legend_y - 4.0,
            right + 24.0,
            legend_y - 4.0,
            right + 28.0,
            legend_y,
            s.name
        );
        legend_y += 16.0;
    }
}

/// Renders a scan or summary CSV. An empty table yields an axes-only chart
/// and a warning.
pub fn render_csv(text: &str, style: &PlotStyle) -> Result<PlotOutput> {
    let table = parse_table(text)?;
    let mut warnings = Vec::new();
    if table.x.is_empty() {
        warnings.push("no data rows; drawing axes only".to_string());
    }
    let upper = collect(&table, is_upper);
    let lower = collect(&table, is_lower);
    let x = bounds(table.x.iter().copied(), (0.0, 1.0));
    let y_of = |(s, b): &(Vec<Series>, Vec<Band>)| -> (f64, f64) {
        let vals = s
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .chain(b.iter().flat_map(|b| b.lower.iter().chain(&b.upper).map(|p| p.1)));
        bounds(vals, (0.0, 1.0))
    };
    let w = style.width - MARGIN_LEFT - MARGIN_RIGHT;
    let h = style.panel_height - MARGIN_TOP - MARGIN_BOTTOM;
    let total_h = 2.0 * style.panel_height;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{total_h:.0}" viewBox="0 0 {:.0} {total_h:.0}" font-family="sans-serif" font-size="11">"#,
        style.width, style.width
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#fff"/>"##);
    if !style.title.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
            MARGIN_LEFT + w / 2.0,
            escape(&style.title)
        );
    }
    let top = Frame {
        left: MARGIN_LEFT,
        top: MARGIN_TOP,
        w,
        h,
        x,
        y: y_of(&upper),
    };
    panel(&mut svg, &top, "E − E(dissociation) (kcal/mol)", &upper.0, &upper.1);
    let bottom = Frame {
        top: style.panel_height + MARGIN_TOP,
        y: y_of(&lower),
        ..top
    };
    panel(&mut svg, &bottom, "error vs FCI (kcal/mol)", &lower.0, &lower.1);
    svg.push_str("</svg>\n");
    Ok(PlotOutput { svg, warnings })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
