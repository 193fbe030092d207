//! The subcommands. Each takes a [`RunConfig`] and writes its artifacts
//! under `output_dir`, returning a summary for the caller to print.

pub mod compare;
pub mod demo;
pub mod geodesic;
pub mod ingest;
pub mod transplant;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use shape_transport_core::kendall::KendallSpace;
use shape_transport_core::zr_transport::{ZrInvariant, ZrSigma};
use shape_transport_core::{PreShape, SpaceTag, ZrSpace};

use crate::config::RunConfig;

/// Creates the output directory and returns the path of `file` inside it.
pub(crate) fn output_path(cfg: &RunConfig, file: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating output directory {}", cfg.output_dir.display()))?;
    Ok(cfg.output_dir.join(file))
}

pub(crate) fn zr_sigma(cfg: &RunConfig, space: &ZrSpace) -> ZrSigma {
    ZrSigma {
        space: space.clone(),
        options: cfg.geodesic_options(),
    }
}

pub(crate) fn zr_invariant(cfg: &RunConfig, space: &ZrSpace) -> ZrInvariant {
    ZrInvariant {
        space: space.clone(),
        options: cfg.geodesic_options(),
    }
}

pub(crate) fn kendall_space(cfg: &RunConfig, like: &PreShape) -> KendallSpace {
    KendallSpace {
        transport: cfg.kendall_options(),
        ..KendallSpace::new(like.m(), like.k())
    }
}

/// `count` equidistant fractions of `[0, 1]`.
pub(crate) fn fractions(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| i as f64 / (count - 1) as f64).collect(),
    }
}

pub(crate) fn space_of_file(space: SpaceTag, cfg: &RunConfig) -> RunConfig {
    RunConfig {
        space,
        ..cfg.clone()
    }
}

pub(crate) fn display(path: &Path) -> String {
    path.display().to_string()
}
