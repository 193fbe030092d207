//! Parallelity of two growth series.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use log::info;

use shape_transport_core::kendall;
use shape_transport_core::parallelity::compare_growth;
use shape_transport_core::zr_geodesic::{fit_geodesic_to_series, ZrPath};
use shape_transport_core::{ParallelityReport, PreShape, SpaceTag, ZrShape, ZrSpace};

use super::{kendall_space, output_path, zr_invariant, zr_sigma};
use crate::config::RunConfig;
use crate::formats::{read_json, write_json, Manifest, ReportJson};
use crate::shapes::{is_shape_file, load_shape, Shape};

/// Great-circle samples of a Kendall series geodesic.
const KENDALL_SAMPLES: usize = 33;

/// Time-stamped shapes read from one directory.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub times: Vec<f64>,
    pub shapes: Vec<Shape>,
}

/// Reads `manifest.json` when present; otherwise every contour or shape
/// file in name order, timed by position.
pub fn load_series(cfg: &RunConfig, space: &ZrSpace, dir: &Path) -> Result<Series> {
    let manifest_path = dir.join("manifest.json");
    let mut listed: Vec<(f64, PathBuf)> = if manifest_path.exists() {
        let manifest: Manifest = read_json(&manifest_path)?;
        let stored = SpaceTag::parse(&manifest.space);
        ensure!(
            stored.is_none_or(|s| (s == SpaceTag::Kendall) == cfg.is_kendall()),
            "{} was ingested in space `{}` but the run uses `{}`",
            dir.display(),
            manifest.space,
            cfg.space.as_str()
        );
        manifest
            .entries
            .iter()
            .map(|e| (e.time, dir.join(&e.shape)))
            .collect()
    } else {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .with_context(|| format!("reading series directory {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && is_shape_file(p))
            .collect();
        files.sort();
        files
            .into_iter()
            .enumerate()
            .map(|(i, p)| (i as f64, p))
            .collect()
    };
    ensure!(
        listed.len() >= 2,
        "{} holds {} shapes; a series needs at least two",
        dir.display(),
        listed.len()
    );
    listed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut series = Series {
        name: dir.file_name().map_or_else(
            || dir.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        ),
        times: Vec::with_capacity(listed.len()),
        shapes: Vec::with_capacity(listed.len()),
    };
    for (t, path) in listed {
        series.times.push(t);
        series.shapes.push(load_shape(cfg, space, &path)?.shape);
    }
    Ok(series)
}

pub fn run(cfg: &RunConfig, dir_a: &Path, dir_b: &Path) -> Result<ReportJson> {
    let space = cfg.zr_space()?;
    let a = load_series(cfg, &space, dir_a)?;
    let b = load_series(cfg, &space, dir_b)?;
    let report = if cfg.is_kendall() {
        let (pa, pb) = (kendall_fit(&a)?, kendall_fit(&b)?);
        ensure!(
            (pa.base.m(), pa.base.k()) == (pb.base.m(), pb.base.k()),
            "the two series have different landmark counts"
        );
        compare_growth(&kendall_space(cfg, &pa.base), &pa, &pb, cfg.mu_variant)?
    } else {
        let (pa, pb) = (zr_fit(cfg, &space, &a)?, zr_fit(cfg, &space, &b)?);
        if cfg.space == SpaceTag::ZrInvariant {
            compare_growth(&zr_invariant(cfg, &space), &pa, &pb, cfg.mu_variant)?
        } else {
            compare_growth(&zr_sigma(cfg, &space), &pa, &pb, cfg.mu_variant)?
        }
    };
    let json = report_json(ParallelityReport {
        names: (a.name, b.name),
        ..report
    });
    info!(
        "rho = {:.6}, mu = {:.6} (n = {})",
        json.rho, json.mu, json.n
    );
    write_json(&output_path(cfg, "report.json")?, &json)?;
    Ok(json)
}

fn report_json(r: ParallelityReport) -> ReportJson {
    ReportJson {
        pair: [r.names.0, r.names.1],
        rho: r.rho,
        mu: r.mu,
        n: r.n,
        mu_variant: r.variant.as_str().into(),
    }
}

fn zr_fit(cfg: &RunConfig, space: &ZrSpace, series: &Series) -> Result<ZrPath> {
    let shapes: Vec<ZrShape> = series
        .shapes
        .iter()
        .map(|s| match s {
            Shape::Zr { theta, .. } => Ok(theta.clone()),
            Shape::Kendall(_) => bail!("{}: pre-shape in a contour-space series", series.name),
        })
        .collect::<Result<_>>()?;
    let fit = fit_geodesic_to_series(
        space,
        &shapes,
        &series.times,
        cfg.space,
        &cfg.geodesic_options(),
    )
    .with_context(|| format!("fitting a geodesic to series {}", series.name))?;
    let worst = fit.residuals.iter().copied().fold(0.0, f64::max);
    info!(
        "{}: geodesic length {:.6}, largest residual {worst:.3e}",
        series.name, fit.path.length
    );
    Ok(fit.path)
}

/// Great circle from the first to the last shape of a Kendall series.
fn kendall_fit(series: &Series) -> Result<kendall::KendallPath> {
    let shapes: Vec<&PreShape> = series
        .shapes
        .iter()
        .map(|s| match s {
            Shape::Kendall(x) => Ok(x),
            Shape::Zr { .. } => bail!("{}: contour-space shape in a Kendall series", series.name),
        })
        .collect::<Result<_>>()?;
    let (first, last) = (shapes[0], shapes[shapes.len() - 1]);
    kendall::geodesic_between(first, last, KENDALL_SAMPLES)
        .with_context(|| format!("fitting a geodesic to series {}", series.name))
}
