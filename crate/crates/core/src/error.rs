use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input geometry that cannot be turned into a shape.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// An iterative solver stopped before reaching its tolerance.
    #[error("{what} did not converge (final residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("contour is not closed (closure residual {residual:e})")]
    OpenCurve { residual: f64 },

    /// The circle (origin of the contour space) or a near-circle where the
    /// initial-point action degenerates.
    #[error("singular shape: {0}")]
    SingularShape(&'static str),

    #[error("normal frame is degenerate (residual norm {0:e})")]
    DegenerateFrame(f64),

    #[error("integration step too coarse: norm drift {drift:e} exceeds {limit:e}; refine the step count")]
    StepTooCoarse { drift: f64, limit: f64 },

    #[error("path leaves the regular part of the pre-shape sphere at t = {t}")]
    SingularPath { t: f64 },

    #[error("rotation alignment is ambiguous (singular values {0:?})")]
    Ambiguous(Vec<f64>),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported dimension n = {0} (need n >= 3)")]
    UnsupportedDimension(usize),

    #[error("numerical failure at step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },

    /// Failure inside one stage of a multi-stage pipeline.
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_step(step: usize, source: Error) -> Self {
        Error::AtStep {
            step,
            source: Box::new(source),
        }
    }

    pub(crate) fn stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// True for failures of iterative numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonConvergence { .. }
            | Error::DegenerateFrame(_)
            | Error::StepTooCoarse { .. }
            | Error::Ambiguous(_) => true,
            Error::AtStep { source, .. } | Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
