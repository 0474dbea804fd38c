//! CSV and SVG artifacts.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use fracterp::{component_projection, GridFunction, Projection};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("nothing to plot")]
    EmptySeries,
    #[error("{0}")]
    Core(#[from] fracterp::Error),
}

fn write(path: &Path, contents: &str) -> Result<(), ExportError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| ExportError::Io { path: dir.display().to_string(), source })?;
    }
    fs::write(path, contents).map_err(|source| ExportError::Io { path: path.display().to_string(), source })
}

fn push_row(out: &mut String, row: impl IntoIterator<Item = f64>) {
    for (i, v) in row.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{v}").expect("writing to a String");
    }
    out.push('\n');
}

/// Node coordinates and values in node order, `x,psi` or
/// `x,psi_0,...,psi_3` for 1-D grids (`x0,x1,...` columns otherwise).
pub fn grid_csv(f: &GridFunction) -> String {
    let mut out = String::new();
    let mut header: Vec<String> = if f.dim() == 1 { vec!["x".into()] } else { (0..f.dim()).map(|j| format!("x{j}")).collect() };
    if f.value_dim() == 1 {
        header.push("psi".into());
    } else {
        header.extend((0..f.value_dim()).map(|j| format!("psi_{j}")));
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for n in 0..f.node_count() {
        push_row(&mut out, f.node(n).into_iter().chain(f.value(n).iter().copied()));
    }
    out
}

/// A projection of a quaternion-valued grid: `x,psi_i` for graphs and
/// `psi_a,psi_b,...` for parametric curves.
pub fn projection_csv(f: &GridFunction, projection: &Projection) -> Result<String, ExportError> {
    let rows = component_projection(f, projection)?;
    let header: Vec<String> = match projection {
        Projection::Graph(i) => vec!["x".into(), format!("psi_{i}")],
        Projection::Parametric(axes) => axes.iter().map(|a| format!("psi_{a}")).collect(),
    };
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        push_row(&mut out, row);
    }
    Ok(out)
}

pub fn export_csv(f: &GridFunction, path: &Path) -> Result<(), ExportError> {
    write(path, &grid_csv(f))
}

pub fn export_projection_csv(f: &GridFunction, projection: &Projection, path: &Path) -> Result<(), ExportError> {
    write(path, &projection_csv(f, projection)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    pub stroke_width: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle { stroke_width: 1.0 }
    }
}

pub const SVG_WIDTH: f64 = 800.0;
pub const SVG_HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

pub fn svg_document(series: &[(f64, f64)], style: &SvgStyle) -> Result<String, ExportError> {
    if series.is_empty() {
        return Err(ExportError::EmptySeries);
    }
    let (x_lo, x_hi) = bounds(series.iter().map(|p| p.0));
    let (y_lo, y_hi) = bounds(series.iter().map(|p| p.1));
    let (w, h) = (SVG_WIDTH - 2.0 * MARGIN, SVG_HEIGHT - 2.0 * MARGIN);
    let px = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * w;
    let py = |y: f64| SVG_HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * h;

    let mut points = String::new();
    for (i, &(x, y)) in series.iter().enumerate() {
        if i > 0 {
            points.push(' ');
        }
        write!(points, "{:.2},{:.2}", px(x), py(y)).expect("writing to a String");
    }
    let mut out = String::new();
    let text = |out: &mut String, x: f64, y: f64, anchor: &str, s: String| {
        writeln!(out, r#"<text x="{x:.2}" y="{y:.2}" font-size="12" text-anchor="{anchor}">{s}</text>"#).expect("writing to a String");
    };
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect x="{MARGIN}" y="{MARGIN}" width="{w}" height="{h}" fill="none" stroke="black" stroke-width="1"/>"#).unwrap();
    text(&mut out, MARGIN, SVG_HEIGHT - MARGIN + 20.0, "start", label(x_lo));
    text(&mut out, SVG_WIDTH - MARGIN, SVG_HEIGHT - MARGIN + 20.0, "end", label(x_hi));
    text(&mut out, MARGIN - 6.0, SVG_HEIGHT - MARGIN, "end", label(y_lo));
    text(&mut out, MARGIN - 6.0, MARGIN + 12.0, "end", label(y_hi));
    writeln!(
        out,
        r#"<polyline fill="none" stroke="black" stroke-width="{}" points="{points}"/>"#,
        style.stroke_width
    )
    .unwrap();
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn export_svg(series: &[(f64, f64)], path: &Path, style: &SvgStyle) -> Result<(), ExportError> {
    let doc = svg_document(series, style)?;
    write(path, &doc)
}

/// `(x, psi(x))` for a real-valued 1-D grid, or `(x, psi_0(x))` otherwise.
pub fn graph_series(f: &GridFunction) -> Vec<(f64, f64)> {
    (0..f.node_count()).map(|n| (f.node(n)[0], f.value(n)[0])).collect()
}
