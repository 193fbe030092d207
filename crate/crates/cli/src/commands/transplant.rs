//! Moves a stored geodesic onto a new initial shape.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use shape_transport_core::geodesic::transplant_detailed;
use shape_transport_core::{Contour, GeodesicPath, ShapeGeometry, SpaceTag, Transplanted};

use super::geodesic::extension;
use super::{display, kendall_space, output_path, space_of_file, zr_invariant, zr_sigma};
use crate::config::RunConfig;
use crate::formats::{
    read_json, write_json, GeodesicJson, LoadedPath, PreShapeJson, TransportResultJson, ZrShapeJson,
};
use crate::render::{emit_contour_sequence, SequenceFormat};
use crate::shapes::{draw_kendall, draw_zr, load_shape, Shape};

/// Output contour that crosses itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionWarning {
    pub time: f64,
    /// Pairs of crossing edges of the reconstructed polyline.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransplantReport {
    pub space: String,
    pub geodesic: String,
    pub target: String,
    pub times: Vec<f64>,
    pub connection_length: f64,
    pub shapes: Vec<String>,
    pub plot: String,
    pub self_intersections: Vec<IntersectionWarning>,
}

/// Self-intersections of each contour, tolerance relative to its diameter.
pub fn intersection_warnings(times: &[f64], contours: &[Contour]) -> Vec<IntersectionWarning> {
    times
        .iter()
        .zip(contours)
        .filter_map(|(&time, c)| {
            let edges = c.self_intersections(1e-9 * c.diameter());
            (!edges.is_empty()).then_some(IntersectionWarning { time, edges })
        })
        .collect()
}

pub fn run(
    cfg: &RunConfig,
    geodesic: &Path,
    target: &Path,
    times: &[f64],
    name: &str,
    format: SequenceFormat,
) -> Result<TransplantReport> {
    ensure!(times.len() >= 2, "--times needs at least two values");
    let stored: GeodesicJson = read_json(geodesic)?;
    let loaded = stored
        .to_path()
        .with_context(|| format!("reading geodesic {}", geodesic.display()))?;
    let mut cfg = space_of_file(SpaceTag::parse(&stored.space).unwrap_or(cfg.space), cfg);
    if let LoadedPath::Zr { path, .. } = &loaded {
        if path.base.harmonics() != cfg.harmonics {
            info!(
                "using N = {} harmonics from {}",
                path.base.harmonics(),
                geodesic.display()
            );
            cfg.harmonics = path.base.harmonics();
        }
    }
    let space = cfg.zr_space()?;
    let goal = load_shape(&cfg, &space, target)?;

    let (outcome, shapes) = match (loaded, goal.shape) {
        (LoadedPath::Zr { path, .. }, Shape::Zr { theta, placement }) => {
            let draw = |p: &_| draw_zr(&space, p, placement);
            let save = |p: &_| ZrShapeJson::from_shape(p, placement);
            if path.space == SpaceTag::ZrInvariant {
                let g = zr_invariant(&cfg, &space);
                carry(&cfg, &g, &path, &theta, times, name, draw, save, "shape")?
            } else {
                let g = zr_sigma(&cfg, &space);
                carry(&cfg, &g, &path, &theta, times, name, draw, save, "shape")?
            }
        }
        (LoadedPath::Kendall(path), Shape::Kendall(x)) => {
            ensure!(
                (path.base.m(), path.base.k()) == (x.m(), x.k()),
                "target has {}x{} landmarks but the geodesic {}x{}",
                x.m(),
                x.k(),
                path.base.m(),
                path.base.k()
            );
            let g = kendall_space(&cfg, &x);
            carry(
                &cfg,
                &g,
                &path,
                &x,
                times,
                name,
                draw_kendall,
                PreShapeJson::from_preshape,
                "preshape",
            )?
        }
        _ => bail!(
            "target shape does not belong to the geodesic's space `{}`",
            stored.space
        ),
    };

    let plot = output_path(&cfg, &format!("{name}.{}", extension(format)))?;
    emit_contour_sequence(&outcome.contours, &plot, format)?;
    let self_intersections = intersection_warnings(times, &outcome.contours);
    for w in &self_intersections {
        warn!(
            "contour at t = {} intersects itself ({} edge pairs)",
            w.time,
            w.edges.len()
        );
    }
    let report = TransplantReport {
        space: cfg.space.as_str().into(),
        geodesic: display(geodesic),
        target: display(target),
        times: times.to_vec(),
        connection_length: outcome.connection_length,
        shapes,
        plot: display(&plot),
        self_intersections,
    };
    write_json(&output_path(&cfg, &format!("{name}.report.json"))?, &report)?;
    Ok(report)
}

struct Carried {
    contours: Vec<Contour>,
    connection_length: f64,
}

/// Runs the transplant and writes the per-time shapes and the transport
/// record.
#[allow(clippy::too_many_arguments)]
fn carry<G: ShapeGeometry, J: Serialize>(
    cfg: &RunConfig,
    geometry: &G,
    source: &GeodesicPath<G::Point, G::Tangent>,
    target: &G::Point,
    times: &[f64],
    name: &str,
    draw: impl Fn(&G::Point) -> Result<Contour>,
    save: impl Fn(&G::Point) -> J,
    kind: &str,
) -> Result<(Carried, Vec<String>)> {
    let Transplanted {
        connection,
        transport,
        points,
    } = transplant_detailed(geometry, source, target, times)?;
    let record = TransportResultJson::new(&transport, geometry.coefficients(&transport.w_end));
    write_json(
        &output_path(cfg, &format!("{name}.transport.json"))?,
        &record,
    )?;
    let mut files = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let file = format!("{name}_{i:03}.{kind}.json");
        write_json(&output_path(cfg, &file)?, &save(p))?;
        files.push(file);
    }
    let contours = points.iter().map(draw).collect::<Result<_>>()?;
    Ok((
        Carried {
            contours,
            connection_length: connection.length,
        },
        files,
    ))
}
