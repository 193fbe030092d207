//! Loading shapes from any supported file into the configured space, and
//! drawing them back as contours.

use std::path::Path;

use anyhow::Result;

use shape_transport_core::contour::{contour_to_zr, zr_to_contour};
use shape_transport_core::kendall::{sample_polygon, transfer_zr_kendall};
use shape_transport_core::{Contour, Error as CoreError, Placement, PreShape, ZrShape, ZrSpace};

use crate::config::RunConfig;
use crate::formats::{
    load_contour, read_json, stem, ContourFormat, InputError, PreShapeJson, ZrShapeJson,
};

/// Largest closure residual accepted in a stored shape.
pub const CLOSURE_TOLERANCE: f64 = 1e-6;

/// Points per reconstructed contour.
pub const RECONSTRUCTION_SAMPLES: usize = 1024;

#[derive(Debug, Clone)]
pub enum Shape {
    Zr {
        theta: ZrShape,
        placement: Placement,
    },
    Kendall(PreShape),
}

#[derive(Debug, Clone)]
pub struct NamedShape {
    pub name: String,
    pub shape: Shape,
}

/// Converts a contour into the configured space.
pub fn shape_of_contour(
    cfg: &RunConfig,
    space: &ZrSpace,
    contour: &Contour,
    path: &Path,
) -> Result<Shape, InputError> {
    if cfg.is_kendall() {
        let k = cfg.landmarks.unwrap_or(contour.len());
        let x = transfer_zr_kendall(contour, k).map_err(|e| InputError::shape(path, e))?;
        Ok(Shape::Kendall(x))
    } else {
        let (theta, placement) =
            contour_to_zr(space, contour).map_err(|e| InputError::shape(path, e))?;
        Ok(Shape::Zr { theta, placement })
    }
}

/// Reads a contour (CSV or JSON), a shape JSON or a pre-shape JSON.
pub fn load_shape(cfg: &RunConfig, space: &ZrSpace, path: &Path) -> Result<NamedShape, InputError> {
    let format = ContourFormat::from_path(path)
        .ok_or_else(|| InputError::content(path, "expected a .csv or .json file"))?;
    let name = stem(path);
    if format == ContourFormat::Csv {
        let c = load_contour(path, format)?;
        let shape = shape_of_contour(cfg, space, &c.contour, path)?;
        return Ok(NamedShape {
            name: c.name,
            shape,
        });
    }
    let value: serde_json::Value = read_json(path)?;
    let has = |key: &str| value.get(key).is_some();
    let shape = if has("points") {
        let c = load_contour(path, format)?;
        return Ok(NamedShape {
            name: c.name,
            shape: shape_of_contour(cfg, space, &c.contour, path)?,
        });
    } else if has("xy") {
        if cfg.is_kendall() {
            return Err(InputError::content(
                path,
                "a contour-space shape cannot be used in Kendall space",
            ));
        }
        let json: ZrShapeJson = read_json(path)?;
        if json.n != space.harmonics() {
            return Err(InputError::content(
                path,
                format!(
                    "shape has N = {} harmonics but the run uses {} (see --n-harmonics)",
                    json.n,
                    space.harmonics()
                ),
            ));
        }
        let (theta, placement) = json.to_shape().map_err(|e| InputError::shape(path, e))?;
        let residual = space.closure_residual(&theta);
        if residual > CLOSURE_TOLERANCE {
            return Err(InputError::shape(path, CoreError::OpenCurve { residual }));
        }
        Shape::Zr { theta, placement }
    } else if has("mat") {
        if !cfg.is_kendall() {
            return Err(InputError::content(
                path,
                "a pre-shape needs --space kendall",
            ));
        }
        let json: PreShapeJson = read_json(path)?;
        Shape::Kendall(json.to_preshape().map_err(|e| InputError::shape(path, e))?)
    } else {
        return Err(InputError::content(
            path,
            "JSON is neither a contour, a shape nor a pre-shape",
        ));
    };
    Ok(NamedShape { name, shape })
}

/// True for CSV files and for JSON holding a contour, shape or pre-shape.
pub fn is_shape_file(path: &Path) -> bool {
    match ContourFormat::from_path(path) {
        Some(ContourFormat::Csv) => true,
        Some(ContourFormat::Json) => read_json::<serde_json::Value>(path)
            .is_ok_and(|v| ["points", "xy", "mat"].iter().any(|k| v.get(*k).is_some())),
        None => false,
    }
}

/// The contour of a contour-space shape, at the given placement.
pub fn draw_zr(space: &ZrSpace, theta: &ZrShape, placement: Placement) -> Result<Contour> {
    Ok(zr_to_contour(space, theta, RECONSTRUCTION_SAMPLES, placement)?.contour)
}

pub fn draw_kendall(x: &PreShape) -> Result<Contour> {
    Ok(sample_polygon(x, 1)?)
}
