//! Settings shared by every command.

use std::path::PathBuf;

use anyhow::{ensure, Result};
use clap::{Args, ValueEnum};

use shape_transport_core::kendall::{KendallSteps, KendallTransportOptions};
use shape_transport_core::parallelity::MuVariant;
use shape_transport_core::zr_geodesic::GeodesicOptions;
use shape_transport_core::{SpaceTag, ZrSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    /// Closed contours with a fixed initial point.
    Zr,
    /// Closed contours modulo the initial point.
    #[value(alias = "zr_invariant")]
    ZrInvariant,
    /// Kendall landmark shapes.
    Kendall,
}

impl From<SpaceArg> for SpaceTag {
    fn from(s: SpaceArg) -> Self {
        match s {
            SpaceArg::Zr => SpaceTag::ZrSigma,
            SpaceArg::ZrInvariant => SpaceTag::ZrInvariant,
            SpaceArg::Kendall => SpaceTag::Kendall,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MuArg {
    Arccos,
    #[value(alias = "sqrt_arccos")]
    SqrtArccos,
}

impl From<MuArg> for MuVariant {
    fn from(m: MuArg) -> Self {
        match m {
            MuArg::Arccos => MuVariant::Arccos,
            MuArg::SqrtArccos => MuVariant::SqrtArccos,
        }
    }
}

/// Global flags, each overridable through a `SHAPE_TRANSPORT_*` variable.
#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Number of Fourier harmonics N of the turning function.
    #[arg(
        long = "n-harmonics",
        env = "SHAPE_TRANSPORT_N_HARMONICS",
        default_value_t = 100,
        global = true
    )]
    pub harmonics: usize,

    /// Samples of the reconstruction and FFT grid (a power of two).
    #[arg(
        long,
        env = "SHAPE_TRANSPORT_GRID",
        default_value_t = 1024,
        global = true
    )]
    pub grid: usize,

    /// Integrator steps per unit path length.
    #[arg(
        long,
        env = "SHAPE_TRANSPORT_STEPS",
        default_value_t = 256.0,
        global = true
    )]
    pub steps: f64,

    #[arg(
        long,
        value_enum,
        env = "SHAPE_TRANSPORT_SPACE",
        default_value = "zr",
        global = true
    )]
    pub space: SpaceArg,

    #[arg(
        long = "mu-variant",
        value_enum,
        env = "SHAPE_TRANSPORT_MU_VARIANT",
        default_value = "arccos",
        global = true
    )]
    pub mu_variant: MuArg,

    /// Landmarks taken from contours in Kendall space (default: the vertices).
    #[arg(long, env = "SHAPE_TRANSPORT_LANDMARKS", global = true)]
    pub landmarks: Option<usize>,

    /// Output directory.
    #[arg(
        long,
        env = "SHAPE_TRANSPORT_OUT",
        default_value = "out",
        global = true
    )]
    pub out: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub harmonics: usize,
    pub grid: usize,
    pub steps_per_unit: f64,
    pub space: SpaceTag,
    pub mu_variant: MuVariant,
    pub landmarks: Option<usize>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            harmonics: 100,
            grid: 1024,
            steps_per_unit: 256.0,
            space: SpaceTag::ZrSigma,
            mu_variant: MuVariant::Arccos,
            landmarks: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_args(args: &ConfigArgs) -> Result<Self> {
        let cfg = RunConfig {
            harmonics: args.harmonics,
            grid: args.grid,
            steps_per_unit: args.steps,
            space: args.space.into(),
            mu_variant: args.mu_variant.into(),
            landmarks: args.landmarks,
            output_dir: args.out.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.harmonics >= 1, "--n-harmonics must be positive");
        ensure!(self.grid >= 16, "--grid must be at least 16");
        ensure!(
            self.steps_per_unit.is_finite() && self.steps_per_unit > 0.0,
            "--steps must be positive"
        );
        if let Some(k) = self.landmarks {
            ensure!(k >= 3, "--landmarks must be at least 3");
        }
        Ok(())
    }

    pub fn zr_space(&self) -> Result<ZrSpace> {
        Ok(ZrSpace::new(self.harmonics, self.grid)?)
    }

    pub fn geodesic_options(&self) -> GeodesicOptions {
        GeodesicOptions {
            steps_per_unit: self.steps_per_unit,
            ..GeodesicOptions::default()
        }
    }

    pub fn kendall_options(&self) -> KendallTransportOptions {
        KendallTransportOptions {
            steps: KendallSteps::PerUnit(self.steps_per_unit),
            order: None,
        }
    }

    pub fn is_kendall(&self) -> bool {
        self.space == SpaceTag::Kendall
    }
}
