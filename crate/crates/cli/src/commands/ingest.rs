//! Contours in, shape files and a manifest out.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Result};
use log::{info, warn};

use shape_transport_core::ZrSpace;

use super::{display, output_path};
use crate::config::RunConfig;
use crate::formats::{
    load_contour, write_json, ContourFormat, InputError, Manifest, ManifestEntry, ManifestFailure,
    PreShapeJson, ZrShapeJson,
};
use crate::shapes::{shape_of_contour, Shape};

/// Converts every input and writes `manifest.json`. Files that fail are
/// listed in the manifest and turn the whole run into an error once the
/// rest have been written.
pub fn run(cfg: &RunConfig, inputs: &[PathBuf], times: Option<&[f64]>) -> Result<Manifest> {
    ensure!(!inputs.is_empty(), "no input files");
    if let Some(t) = times {
        ensure!(
            t.len() == inputs.len(),
            "{} times given for {} input files",
            t.len(),
            inputs.len()
        );
    }
    let space = cfg.zr_space()?;
    let mut manifest = Manifest {
        space: cfg.space.as_str().into(),
        ..Manifest::default()
    };
    for (i, input) in inputs.iter().enumerate() {
        let time = times.map_or(i as f64, |t| t[i]);
        match ingest_one(cfg, &space, input) {
            Ok((shape, closure_residual)) => {
                info!("{}: wrote {shape}", input.display());
                manifest.entries.push(ManifestEntry {
                    source: display(input),
                    shape,
                    time,
                    closure_residual,
                });
            }
            Err(e) => {
                warn!("{e:#}");
                manifest.failures.push(ManifestFailure {
                    source: display(input),
                    error: format!("{e:#}"),
                });
            }
        }
    }
    write_json(&output_path(cfg, "manifest.json")?, &manifest)?;
    if !manifest.failures.is_empty() {
        let listing: Vec<String> = manifest
            .failures
            .iter()
            .map(|f| format!("  {}", f.error))
            .collect();
        bail!(
            "{} of {} inputs failed:\n{}",
            manifest.failures.len(),
            inputs.len(),
            listing.join("\n")
        );
    }
    Ok(manifest)
}

/// Writes one shape file, returning its name and, for contour shapes, the
/// closure residual.
fn ingest_one(cfg: &RunConfig, space: &ZrSpace, input: &Path) -> Result<(String, Option<f64>)> {
    let format = ContourFormat::from_path(input)
        .ok_or_else(|| InputError::content(input, "expected a .csv or .json contour"))?;
    let contour = load_contour(input, format)?;
    match shape_of_contour(cfg, space, &contour.contour, input)? {
        Shape::Zr { theta, placement } => {
            let residual = space.closure_residual(&theta);
            info!("{}: closure residual {residual:.3e}", input.display());
            let file = format!("{}.shape.json", contour.name);
            write_json(
                &output_path(cfg, &file)?,
                &ZrShapeJson::from_shape(&theta, placement),
            )?;
            Ok((file, Some(residual)))
        }
        Shape::Kendall(x) => {
            let file = format!("{}.preshape.json", contour.name);
            write_json(&output_path(cfg, &file)?, &PreShapeJson::from_preshape(&x))?;
            Ok((file, None))
        }
    }
}
