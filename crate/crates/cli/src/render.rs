//! SVG strips and CSV dumps of contour sequences.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

use shape_transport_core::Contour;

use crate::formats::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceFormat {
    Svg,
    Csv,
}

const CELL: f64 = 160.0;
const MARGIN: f64 = 12.0;

/// One row of contours drawn at a common scale, each with a bullet on its
/// initial point.
pub fn svg_strip(contours: &[Contour], title: Option<&str>) -> String {
    let extent = contours
        .iter()
        .map(|c| {
            let (lo, hi) = bounds(c);
            (hi[0] - lo[0]).max(hi[1] - lo[1])
        })
        .fold(0.0, f64::max);
    let scale = if extent > 0.0 {
        (CELL - 2.0 * MARGIN) / extent
    } else {
        1.0
    };
    let width = CELL * contours.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{CELL}" viewBox="0 0 {width} {CELL}">"#
    );
    if let Some(t) = title {
        let _ = writeln!(svg, "  <title>{}</title>", escape(t));
    }
    let _ = writeln!(svg, r#"  <rect width="100%" height="100%" fill="white"/>"#);
    for (i, c) in contours.iter().enumerate() {
        let (lo, hi) = bounds(c);
        let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        let cx = CELL * (i as f64 + 0.5);
        let cy = 0.5 * CELL;
        // y grows downwards in SVG
        let map = |p: &[f64; 2]| (cx + scale * (p[0] - mid[0]), cy - scale * (p[1] - mid[1]));
        let points: Vec<String> = c
            .points()
            .iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(svg, r#"  <g class="contour" id="contour-{i}">"#);
        let _ = writeln!(
            svg,
            r#"    <polygon points="{}" fill="none" stroke="black" stroke-width="1.2"/>"#,
            points.join(" ")
        );
        let (bx, by) = map(&c.points()[0]);
        let _ = writeln!(
            svg,
            r#"    <circle class="bullet" cx="{bx:.3}" cy="{by:.3}" r="3.5" fill="black"/>"#
        );
        let _ = writeln!(svg, "  </g>");
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(c: &Contour) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in c.points() {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// `index,x,y` rows, one per contour point.
pub fn csv_sequence(contours: &[Contour]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "x", "y"])?;
    for (i, c) in contours.iter().enumerate() {
        for p in c.points() {
            w.write_record([i.to_string(), p[0].to_string(), p[1].to_string()])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn emit_contour_sequence(
    contours: &[Contour],
    path: &Path,
    format: SequenceFormat,
) -> Result<()> {
    if contours.is_empty() {
        bail!("nothing to draw: the contour sequence is empty");
    }
    let text = match format {
        SequenceFormat::Svg => svg_strip(contours, path.file_stem().and_then(|s| s.to_str())),
        SequenceFormat::Csv => csv_sequence(contours)?,
    };
    write_atomic(path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))
}
