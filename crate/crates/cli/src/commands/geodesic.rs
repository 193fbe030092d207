//! Geodesic between two shapes, saved as JSON and drawn as a strip.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Result};
use log::info;

use shape_transport_core::{Contour, GeodesicPath, ShapeGeometry, SpaceTag};

use super::{fractions, kendall_space, output_path, zr_invariant, zr_sigma};
use crate::config::RunConfig;
use crate::formats::{write_json, GeodesicJson};
use crate::render::{emit_contour_sequence, SequenceFormat};
use crate::shapes::{draw_kendall, draw_zr, load_shape, Shape};

/// Paths shorter than this connect identical shapes.
const TRIVIAL_LENGTH: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct GeodesicSummary {
    pub length: f64,
    pub frames: usize,
    pub json: PathBuf,
    pub plot: PathBuf,
}

pub fn run(
    cfg: &RunConfig,
    shape0: &Path,
    shape1: &Path,
    frames: usize,
    name: &str,
    format: SequenceFormat,
) -> Result<GeodesicSummary> {
    ensure!(frames >= 1, "--frames must be positive");
    let space = cfg.zr_space()?;
    let a = load_shape(cfg, &space, shape0)?;
    let b = load_shape(cfg, &space, shape1)?;
    let (json, contours, length) = match (a.shape, b.shape) {
        (
            Shape::Zr {
                theta: t0,
                placement,
            },
            Shape::Zr { theta: t1, .. },
        ) => {
            let draw = |p: &_| draw_zr(&space, p, placement);
            let (path, contours) = if cfg.space == SpaceTag::ZrInvariant {
                connect(&zr_invariant(cfg, &space), &t0, &t1, frames, draw)?
            } else {
                connect(&zr_sigma(cfg, &space), &t0, &t1, frames, draw)?
            };
            (
                GeodesicJson::from_zr(&path, placement),
                contours,
                path.length,
            )
        }
        (Shape::Kendall(x), Shape::Kendall(y)) => {
            ensure!(
                (x.m(), x.k()) == (y.m(), y.k()),
                "pre-shapes differ in size: {}x{} and {}x{} landmarks",
                x.m(),
                x.k(),
                y.m(),
                y.k()
            );
            let (path, contours) = connect(&kendall_space(cfg, &x), &x, &y, frames, draw_kendall)?;
            (GeodesicJson::from_kendall(&path), contours, path.length)
        }
        _ => bail!("the two shapes live in different spaces"),
    };
    let json_path = output_path(cfg, &format!("{name}.json"))?;
    write_json(&json_path, &json)?;
    let plot = output_path(cfg, &format!("{name}.{}", extension(format)))?;
    emit_contour_sequence(&contours, &plot, format)?;
    info!(
        "geodesic of length {length:.6} drawn with {} contours",
        contours.len()
    );
    Ok(GeodesicSummary {
        length,
        frames: contours.len(),
        json: json_path,
        plot,
    })
}

type PathOf<G> = GeodesicPath<<G as ShapeGeometry>::Point, <G as ShapeGeometry>::Tangent>;

/// Connects `from` to `to` and draws `frames` equidistant shapes along the
/// geodesic, or the start shape alone when the two coincide.
pub(crate) fn connect<G: ShapeGeometry>(
    geometry: &G,
    from: &G::Point,
    to: &G::Point,
    frames: usize,
    draw: impl Fn(&G::Point) -> Result<Contour>,
) -> Result<(PathOf<G>, Vec<Contour>)> {
    let path = geometry.connect(from, to)?;
    let points = if path.length <= TRIVIAL_LENGTH {
        vec![path.base.clone()]
    } else {
        let velocity = geometry.scale_tangent(&path.v0, path.length);
        geometry.shoot(&path.base, &velocity, &fractions(frames))?
    };
    let contours = points.iter().map(draw).collect::<Result<_>>()?;
    Ok((path, contours))
}

pub(crate) fn extension(format: SequenceFormat) -> &'static str {
    match format {
        SequenceFormat::Svg => "svg",
        SequenceFormat::Csv => "csv",
    }
}
