//! Static SVG renderings of persistence diagrams and landscapes.
//!
//! Output depends only on the input values, so identical inputs give
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dirtda::{PersistenceDiagram, PersistenceLandscape};

use crate::error::{CliError, CliResult};

const SIZE: f64 = 400.0;
const MARGIN: f64 = 48.0;
const DIM_COLORS: [&str; 3] = ["#1f77b4", "#ff7f0e", "#2ca02c"];
const LEVEL_COLORS: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

struct Frame {
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + v / self.x_max * (SIZE - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        SIZE - MARGIN - v / self.y_max * (SIZE - 2.0 * MARGIN)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        SIZE / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, y0) = (MARGIN, SIZE - MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{x0:.2} {:.2} V{y0:.2} H{:.2}" fill="none" stroke="black"/>"#,
        MARGIN,
        SIZE - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
        SIZE / 2.0,
        SIZE - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{y_label}</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    for i in 0..=4 {
        let v = f.x_max * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{v:.3}</text>"#,
            f.x(v),
            y0 + 14.0
        );
        let w = f.y_max * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{w:.3}</text>"#,
            x0 - 4.0,
            f.y(w) + 4.0
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Scatter of `(birth, death)` coloured by dimension, with the diagonal and
/// essential classes drawn as triangles on the top margin.
pub fn render_diagram(pd: &PersistenceDiagram, title: &str) -> String {
    let finite_max = pd
        .pairs()
        .iter()
        .flat_map(|p| [p.birth, if p.is_essential() { p.birth } else { p.death }])
        .fold(0.0f64, f64::max);
    let top = if finite_max > 0.0 {
        finite_max * 1.05
    } else {
        1.0
    };
    let f = Frame {
        x_max: top,
        y_max: top,
    };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &f, "birth", "death");
    let _ = writeln!(
        out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
        f.x(0.0),
        f.y(0.0),
        f.x(top),
        f.y(top)
    );
    let inf_y = MARGIN - 10.0;
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN:.2}" y1="{inf_y:.2}" x2="{:.2}" y2="{inf_y:.2}" stroke="lightgray"/>"#,
        SIZE - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">inf</text>"#,
        MARGIN - 4.0,
        inf_y + 4.0
    );
    for p in pd.pairs() {
        let color = DIM_COLORS[p.dim.min(2)];
        let x = f.x(p.birth);
        if p.is_essential() {
            let _ = writeln!(
                out,
                r#"<path class="essential" d="M{:.2} {:.2} L{:.2} {:.2} L{:.2} {:.2} Z" fill="{color}"/>"#,
                x,
                inf_y - 5.0,
                x - 5.0,
                inf_y + 4.0,
                x + 5.0,
                inf_y + 4.0
            );
        } else {
            let _ = writeln!(
                out,
                r#"<circle class="pair" cx="{x:.2}" cy="{:.2}" r="3.5" fill="{color}" fill-opacity="0.8"/>"#,
                f.y(p.death)
            );
        }
    }
    for (dim, color) in DIM_COLORS.iter().enumerate() {
        let y = MARGIN + 14.0 * dim as f64 + 8.0;
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{y:.2}" r="4" fill="{color}"/><text x="{:.2}" y="{:.2}">H{dim}</text>"#,
            SIZE - MARGIN - 40.0,
            SIZE - MARGIN - 32.0,
            y + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One polyline per landscape level with a legend by level index.
pub fn render_landscape(pl: &PersistenceLandscape, title: &str) -> String {
    let grid = pl.grid();
    let x_max = grid.last().copied().filter(|&t| t > 0.0).unwrap_or(1.0);
    let peak = pl.levels().iter().flatten().fold(0.0f64, |m, &v| m.max(v));
    let f = Frame {
        x_max,
        y_max: if peak > 0.0 { peak * 1.05 } else { 1.0 },
    };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &f, "t", "lambda");
    for (k, level) in pl.levels().iter().enumerate() {
        let color = LEVEL_COLORS[k % LEVEL_COLORS.len()];
        let mut points = String::new();
        for (i, (&t, &v)) in grid.iter().zip(level).enumerate() {
            if i > 0 {
                points.push(' ');
            }
            let _ = write!(points, "{:.2},{:.2}", f.x(t), f.y(v));
        }
        let _ = writeln!(
            out,
            r#"<polyline class="level" points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
        let y = MARGIN + 14.0 * k as f64 + 8.0;
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">k={}</text>"#,
            SIZE - MARGIN - 50.0,
            SIZE - MARGIN - 36.0,
            SIZE - MARGIN - 32.0,
            y + 4.0,
            k + 1
        );
    }
    out.push_str("</svg>\n");
    out
}

fn write(path: &Path, svg: &str) -> CliResult<()> {
    fs::write(path, svg).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn plot_diagram(pd: &PersistenceDiagram, path: &Path) -> CliResult<()> {
    let title = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("diagram");
    write(path, &render_diagram(pd, title))
}

pub fn plot_landscape(pl: &PersistenceLandscape, path: &Path) -> CliResult<()> {
    let title = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("landscape");
    write(path, &render_landscape(pl, title))
}
