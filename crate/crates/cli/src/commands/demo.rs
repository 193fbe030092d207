//! Built-in examples: the rectangle/hexagon triptych in both geometries and
//! the parallelity table.

use std::cell::Cell;
use std::path::PathBuf;

use anyhow::{ensure, Result};
use clap::ValueEnum;
use nalgebra::DMatrix;
use serde::Serialize;

use shape_transport_core::contour::{contour_to_zr, zr_to_contour};
use shape_transport_core::geodesic::transplant;
use shape_transport_core::kendall::{procrustes_align, transfer_zr_kendall};
use shape_transport_core::parallelity::mu_with;
use shape_transport_core::{
    polygons, Contour, GeodesicPath, MuVariant, Placement, ShapeGeometry, ZrShape, ZrSpace,
};

use super::geodesic::connect;
use super::{fractions, kendall_space, output_path, zr_sigma};
use crate::config::RunConfig;
use crate::formats::write_json;
use crate::render::{emit_contour_sequence, SequenceFormat};
use crate::shapes::{draw_kendall, RECONSTRUCTION_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    /// Rectangle and hexagon geodesics and a transplant in contour space.
    #[value(name = "hexagon_zr", alias = "hexagon-zr")]
    HexagonZr,
    /// The same construction on six Kendall landmarks.
    #[value(name = "hexagon_kendall", alias = "hexagon-kendall")]
    HexagonKendall,
    /// μ for the published correlations under both integration limits.
    #[value(name = "table1", alias = "table-1")]
    Table1,
}

/// Correlations of the published comparison table, at `n = 201`.
pub const TABLE_RHO: [f64; 4] = [0.17, 0.12, 0.44, 0.083];
pub const TABLE_N: usize = 201;

/// Frames per strip.
const FRAMES: usize = 7;
/// Largest endpoint gap of a drawn contour, relative to its diameter.
const CLOSURE_LIMIT: f64 = 1e-4;
/// Largest landmark disagreement between the two geometries, relative to
/// the diameter.
const CROSS_GEOMETRY_LIMIT: f64 = 0.05;

#[derive(Debug, Clone, Default, Serialize)]
pub struct DemoReport {
    pub files: Vec<PathBuf>,
    #[serde(skip)]
    pub lines: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
struct TableJson {
    n: usize,
    rho: Vec<f64>,
    arccos: Vec<f64>,
    sqrt_arccos: Vec<f64>,
}

pub fn run(cfg: &RunConfig, which: Demo) -> Result<DemoReport> {
    match which {
        Demo::Table1 => table1(cfg),
        Demo::HexagonZr => hexagon_zr(cfg),
        Demo::HexagonKendall => hexagon_kendall(cfg),
    }
}

fn table1(cfg: &RunConfig) -> Result<DemoReport> {
    let row = |variant| {
        TABLE_RHO
            .iter()
            .map(|&r| mu_with(r, TABLE_N, variant))
            .collect::<Result<Vec<_>, _>>()
    };
    let table = TableJson {
        n: TABLE_N,
        rho: TABLE_RHO.to_vec(),
        arccos: row(MuVariant::Arccos)?,
        sqrt_arccos: row(MuVariant::SqrtArccos)?,
    };
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:>7.3}")).collect::<String>();
    let lines = vec![
        format!("n = {TABLE_N}"),
        format!("{:<12}{}", "rho", fmt(&table.rho)),
        format!("{:<12}{}", "arccos", fmt(&table.arccos)),
        format!("{:<12}{}", "sqrt_arccos", fmt(&table.sqrt_arccos)),
    ];
    let path = output_path(cfg, "table1.json")?;
    write_json(&path, &table)?;
    Ok(DemoReport {
        files: vec![path],
        lines,
    })
}

/// Draws contour-space shapes, recording the worst endpoint gap.
struct ClosedDrawing<'a> {
    space: &'a ZrSpace,
    worst_gap: Cell<f64>,
}

impl ClosedDrawing<'_> {
    fn draw(&self, theta: &ZrShape, placement: Placement) -> Result<Contour> {
        let r = zr_to_contour(self.space, theta, RECONSTRUCTION_SAMPLES, placement)?;
        let gap = r.endpoint_gap / r.contour.diameter();
        self.worst_gap.set(self.worst_gap.get().max(gap));
        ensure!(
            gap <= CLOSURE_LIMIT,
            "reconstructed contour fails to close (gap {gap:.2e} of its diameter)"
        );
        Ok(r.contour)
    }
}

fn strip(
    cfg: &RunConfig,
    prefix: &str,
    name: &str,
    contours: &[Contour],
    report: &mut DemoReport,
) -> Result<()> {
    let path = output_path(cfg, &format!("{prefix}_{name}.svg"))?;
    emit_contour_sequence(contours, &path, SequenceFormat::Svg)?;
    report.files.push(path);
    Ok(())
}

/// σ1 → σ3, σ1 → σ2, and σ1 → σ3 carried over to σ2.
fn triptych<G: ShapeGeometry>(
    cfg: &RunConfig,
    prefix: &str,
    geometry: &G,
    [s1, s2, s3]: [&G::Point; 3],
    draw_from_1: impl Fn(&G::Point) -> Result<Contour>,
    draw_from_2: impl Fn(&G::Point) -> Result<Contour>,
    report: &mut DemoReport,
) -> Result<GeodesicPath<G::Point, G::Tangent>> {
    let (path13, strip13) = connect(geometry, s1, s3, FRAMES, &draw_from_1)?;
    let (_, strip12) = connect(geometry, s1, s2, FRAMES, &draw_from_1)?;
    let carried = transplant(geometry, &path13, s2, &fractions(FRAMES))?;
    let strip_t = carried
        .iter()
        .map(draw_from_2)
        .collect::<Result<Vec<_>>>()?;
    strip(cfg, prefix, "sigma1_sigma3", &strip13, report)?;
    strip(cfg, prefix, "sigma1_sigma2", &strip12, report)?;
    strip(cfg, prefix, "transplant_sigma2", &strip_t, report)?;
    report
        .lines
        .push(format!("{prefix}: σ1 → σ3 has length {:.6}", path13.length));
    Ok(path13)
}

fn hexagon_zr(cfg: &RunConfig) -> Result<DemoReport> {
    let space = cfg.zr_space()?;
    let mut report = DemoReport::default();
    let drawing = ClosedDrawing {
        space: &space,
        worst_gap: Cell::new(0.0),
    };
    zr_triptych(cfg, &space, &drawing, &mut report)?;
    report.lines.push(format!(
        "largest endpoint gap {:.2e} of the diameter",
        drawing.worst_gap.get()
    ));
    Ok(report)
}

fn zr_triptych(
    cfg: &RunConfig,
    space: &ZrSpace,
    drawing: &ClosedDrawing,
    report: &mut DemoReport,
) -> Result<()> {
    let encoded = polygons::demo_triple()
        .iter()
        .map(|c| contour_to_zr(space, c))
        .collect::<Result<Vec<_>, _>>()?;
    let [(z1, p1), (z2, p2), (z3, _)] = <[_; 3]>::try_from(encoded).expect("three demo polygons");
    triptych(
        cfg,
        "hexagon_zr",
        &zr_sigma(cfg, space),
        [&z1, &z2, &z3],
        |t| drawing.draw(t, p1),
        |t| drawing.draw(t, p2),
        report,
    )
    .map(drop)
}

fn hexagon_kendall(cfg: &RunConfig) -> Result<DemoReport> {
    let k = cfg.landmarks.unwrap_or(6);
    let [c1, c2, c3] = polygons::demo_triple();
    let (x1, x2, x3) = (
        transfer_zr_kendall(&c1, k)?,
        transfer_zr_kendall(&c2, k)?,
        transfer_zr_kendall(&c3, k)?,
    );
    let mut report = DemoReport::default();
    let geometry = kendall_space(cfg, &x1);
    let path13 = triptych(
        cfg,
        "hexagon_kendall",
        &geometry,
        [&x1, &x2, &x3],
        draw_kendall,
        draw_kendall,
        &mut report,
    )?;

    // the contour-space geodesic, compared landmark by landmark
    let space = cfg.zr_space()?;
    let drawing = ClosedDrawing {
        space: &space,
        worst_gap: Cell::new(0.0),
    };
    let (z1, p1) = contour_to_zr(&space, &c1)?;
    let (z3, _) = contour_to_zr(&space, &c3)?;
    let (_, zr_strip) = connect(&zr_sigma(cfg, &space), &z1, &z3, FRAMES, |t| {
        drawing.draw(t, p1)
    })?;
    let kendall_frames = geometry.shoot(
        &x1,
        &geometry.scale_tangent(&path13.v0, path13.length),
        &fractions(FRAMES),
    )?;
    let mut worst: f64 = 0.0;
    for (x, contour) in kendall_frames.iter().zip(&zr_strip) {
        let from_zr = transfer_zr_kendall(contour, k)?;
        let (_, aligned) = procrustes_align(x, &from_zr)?;
        worst = worst.max(landmark_deviation(&x.landmarks(), &aligned.landmarks()));
    }
    report.lines.push(format!(
        "largest landmark deviation from the contour-space geodesic: {:.2}% of the diameter",
        100.0 * worst
    ));
    ensure!(
        worst <= CROSS_GEOMETRY_LIMIT,
        "Kendall and contour-space geodesics disagree by {:.2}% of the diameter",
        100.0 * worst
    );
    Ok(report)
}

/// Largest landmark displacement over the diameter of `a`.
fn landmark_deviation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let k = a.ncols();
    let mut diameter: f64 = 0.0;
    let mut err: f64 = 0.0;
    for p in 0..k {
        err = err.max((a.column(p) - b.column(p)).norm());
        for q in 0..k {
            diameter = diameter.max((a.column(p) - a.column(q)).norm());
        }
    }
    err / diameter
}
