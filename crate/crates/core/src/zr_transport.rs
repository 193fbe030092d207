//! Parallel transport along Σ_ZR geodesics and along horizontal geodesics
//! representing the initial-point quotient, and the growth transplant built
//! on top of it.
//!
//! On Σ_ZR a tangent field is parallel iff `Ẇ = -Σ_j <W, Ẇ_j> W_j`, with
//! `W_1, W_2` the normal frame. In the quotient the horizontal lift also
//! picks up a correction along the vertical direction `γ'`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geodesic::{self, GeodesicPath, ShapeGeometry, SpaceTag, TransportResult};
use crate::vector;
use crate::zr_geodesic::{
    self, geodesic_between, geodesic_between_invariant, GeodesicOptions, Integrator, Mode,
    Stepping, ZrPath,
};
use crate::zr_space::{is_k_symmetric, pairing, pairing_norm, ZrShape, ZrSpace, ZrTangent};

/// Norm drift above which a transport is rejected as under-resolved.
pub const DRIFT_LIMIT: f64 = 1e-4;

/// Tolerance for the tangency preconditions on input vectors, relative to
/// their norm.
const TANGENCY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransportSteps {
    /// RK4 steps per unit path length.
    PerUnit(f64),
    /// A fixed number of steps regardless of the path length.
    Fixed(usize),
}

impl Default for TransportSteps {
    fn default() -> Self {
        TransportSteps::PerUnit(zr_geodesic::DEFAULT_STEPS_PER_UNIT)
    }
}

fn check_tangent(space: &ZrSpace, base: &ZrShape, w: &ZrTangent, horizontal: bool) -> Result<()> {
    space.inner(base.coefficients(), w.coefficients())?;
    let norm = w.norm();
    if norm == 0.0 {
        return Ok(());
    }
    let projected = if horizontal {
        space.project_horizontal_tangent(base.coefficients(), w.coefficients())?
    } else {
        space
            .project_tangent(base, w.coefficients())?
            .into_coefficients()
    };
    let defect = pairing_norm(&vector::sub(&projected, w.coefficients())) / norm;
    if defect > TANGENCY_TOLERANCE {
        let kind = if horizontal { "horizontal" } else { "tangent" };
        return Err(Error::Precondition(alloc::format!(
            "vector is not {kind} at the path start (relative defect {defect:e})"
        )));
    }
    Ok(())
}

/// Transports several vectors at once along `path` using the equation of
/// `mode`.
fn transport_in_mode(
    space: &ZrSpace,
    path: &ZrPath,
    ws: &[ZrTangent],
    mode: Mode,
    steps: TransportSteps,
) -> Result<Vec<TransportResult<ZrTangent>>> {
    if path.space == SpaceTag::Kendall {
        return Err(Error::Precondition(
            "a Kendall path cannot carry contour tangents".into(),
        ));
    }
    let horizontal = mode == Mode::Horizontal;
    for w in ws {
        check_tangent(space, &path.base, w, horizontal)?;
    }
    if path.length == 0.0 {
        return Ok(ws
            .iter()
            .map(|w| TransportResult {
                w_end: ZrTangent::with_flag(w.coefficients().to_vec(), horizontal),
                norm_drift: 0.0,
                steps: 0,
                residuals: Vec::new(),
            })
            .collect());
    }
    let velocity = vector::scaled(path.length, path.v0.coefficients());
    let carried: Vec<Vec<f64>> = ws.iter().map(|w| w.coefficients().to_vec()).collect();
    let stepping = match steps {
        TransportSteps::PerUnit(d) => Stepping::PerUnit(d),
        TransportSteps::Fixed(n) => Stepping::Total(n),
    };
    let flow = Integrator { space, mode }.run(
        path.base.coefficients(),
        &velocity,
        &carried,
        &[0.0, 1.0],
        stepping,
    )?;
    flow.carried
        .into_iter()
        .zip(flow.drift)
        .map(|(w, drift)| {
            if drift > DRIFT_LIMIT {
                return Err(Error::StepTooCoarse {
                    drift,
                    limit: DRIFT_LIMIT,
                });
            }
            Ok(TransportResult {
                w_end: ZrTangent::with_flag(w, horizontal),
                norm_drift: drift,
                steps: flow.steps,
                residuals: flow.residuals.clone(),
            })
        })
        .collect()
}

/// Parallel transport along a geodesic of Σ_ZR.
pub fn transport_sigma(
    space: &ZrSpace,
    path: &ZrPath,
    w0: &ZrTangent,
) -> Result<TransportResult<ZrTangent>> {
    transport_sigma_with(
        space,
        path,
        core::slice::from_ref(w0),
        TransportSteps::default(),
    )
    .map(first)
}

pub fn transport_sigma_with(
    space: &ZrSpace,
    path: &ZrPath,
    ws: &[ZrTangent],
    steps: TransportSteps,
) -> Result<Vec<TransportResult<ZrTangent>>> {
    transport_in_mode(space, path, ws, Mode::Sigma, steps)
}

/// Parallel transport in the initial-point quotient, computed as the
/// horizontal lift along a horizontal geodesic.
pub fn transport_invariant(
    space: &ZrSpace,
    path: &ZrPath,
    w0: &ZrTangent,
) -> Result<TransportResult<ZrTangent>> {
    transport_invariant_with(
        space,
        path,
        core::slice::from_ref(w0),
        TransportSteps::default(),
    )
    .map(first)
}

pub fn transport_invariant_with(
    space: &ZrSpace,
    path: &ZrPath,
    ws: &[ZrTangent],
    steps: TransportSteps,
) -> Result<Vec<TransportResult<ZrTangent>>> {
    if path.length > 0.0 {
        let defect = zr_geodesic::verticality(&path.base, path.v0.coefficients())?;
        if defect > TANGENCY_TOLERANCE {
            return Err(Error::Precondition(alloc::format!(
                "path is not horizontal (vertical component {defect:e})"
            )));
        }
    }
    transport_in_mode(space, path, ws, Mode::Horizontal, steps)
}

fn first<T>(mut v: Vec<T>) -> T {
    v.swap_remove(0)
}

/// Transport inside the k-fold symmetric subspace, which is flat: the
/// coefficients do not change.
pub fn transport_symmetric(
    theta0: &ZrShape,
    theta1: &ZrShape,
    w0: &ZrTangent,
    k: usize,
) -> Result<ZrTangent> {
    if k < 2 {
        return Err(Error::Precondition(
            "symmetry order must be at least 2".into(),
        ));
    }
    let tol = 1e-9;
    for (name, c) in [
        ("start", theta0.coefficients()),
        ("end", theta1.coefficients()),
        ("vector", w0.coefficients()),
    ] {
        if !is_k_symmetric(c, k, tol) {
            return Err(Error::Precondition(alloc::format!(
                "{name} is not {k}-fold symmetric"
            )));
        }
    }
    Ok(w0.clone())
}

/// Transport by the equation matching the path's space.
pub fn transport(
    space: &ZrSpace,
    path: &ZrPath,
    w0: &ZrTangent,
) -> Result<TransportResult<ZrTangent>> {
    match path.space {
        SpaceTag::ZrInvariant => transport_invariant(space, path, w0),
        _ => transport_sigma(space, path, w0),
    }
}

/// Contour space with its geodesic settings, as a [`ShapeGeometry`].
#[derive(Debug, Clone)]
pub struct ZrSigma {
    pub space: ZrSpace,
    pub options: GeodesicOptions,
}

/// The initial-point quotient, worked with through horizontal lifts.
#[derive(Debug, Clone)]
pub struct ZrInvariant {
    pub space: ZrSpace,
    pub options: GeodesicOptions,
}

impl ZrSigma {
    pub fn new(space: ZrSpace) -> Self {
        ZrSigma {
            space,
            options: GeodesicOptions::default(),
        }
    }
}

impl ZrInvariant {
    pub fn new(space: ZrSpace) -> Self {
        ZrInvariant {
            space,
            options: GeodesicOptions::default(),
        }
    }
}

macro_rules! zr_geometry {
    ($ty:ty, $tag:expr, $connect:path, $transport:path, $horizontal:expr) => {
        impl ShapeGeometry for $ty {
            type Point = ZrShape;
            type Tangent = ZrTangent;

            fn tag(&self) -> SpaceTag {
                $tag
            }

            fn connect(&self, from: &ZrShape, to: &ZrShape) -> Result<ZrPath> {
                $connect(&self.space, from, to, &self.options)
            }

            fn transport(
                &self,
                path: &ZrPath,
                w: &ZrTangent,
            ) -> Result<TransportResult<ZrTangent>> {
                let steps = TransportSteps::PerUnit(self.options.steps_per_unit);
                $transport(&self.space, path, core::slice::from_ref(w), steps).map(first)
            }

            fn shoot(&self, base: &ZrShape, v: &ZrTangent, times: &[f64]) -> Result<Vec<ZrShape>> {
                let v = ZrTangent::with_flag(v.coefficients().to_vec(), $horizontal);
                zr_geodesic::shoot(&self.space, base, &v, times, self.options.steps_per_unit)
            }

            fn scale_tangent(&self, v: &ZrTangent, alpha: f64) -> ZrTangent {
                v.scaled(alpha)
            }

            fn coefficients(&self, v: &ZrTangent) -> Vec<f64> {
                v.coefficients().to_vec()
            }

            fn inner(&self, u: &ZrTangent, v: &ZrTangent) -> f64 {
                pairing(u.coefficients(), v.coefficients())
            }

            fn dimension(&self) -> usize {
                self.space.dim()
            }
        }
    };
}

zr_geometry!(
    ZrSigma,
    SpaceTag::ZrSigma,
    geodesic_between,
    transport_sigma_with,
    false
);
zr_geometry!(
    ZrInvariant,
    SpaceTag::ZrInvariant,
    geodesic_between_invariant,
    transport_invariant_with,
    true
);

/// Applies the deformation of `source` to `target`: transports its initial
/// velocity along the connecting geodesic and shoots from `target`,
/// sampling at `times` mapped affinely onto the source's parameter range.
pub fn transplant_growth(
    space: &ZrSpace,
    source: &ZrPath,
    target: &ZrShape,
    times: &[f64],
    options: &GeodesicOptions,
) -> Result<Vec<ZrShape>> {
    match source.space {
        SpaceTag::ZrInvariant => {
            let geometry = ZrInvariant {
                space: space.clone(),
                options: *options,
            };
            geodesic::transplant(&geometry, source, target, times)
        }
        SpaceTag::ZrSigma => {
            let geometry = ZrSigma {
                space: space.clone(),
                options: *options,
            };
            geodesic::transplant(&geometry, source, target, times)
        }
        SpaceTag::Kendall => Err(Error::Precondition(
            "transplant of a Kendall path in contour space".into(),
        )),
    }
}

/// The path traversed backwards: starts at the old end with the negated end
/// velocity.
pub fn reversed(space: &ZrSpace, path: &ZrPath, steps_per_unit: f64) -> Result<ZrPath> {
    let end_v = zr_geodesic::end_velocity(space, path, steps_per_unit)?;
    let samples = path
        .samples
        .iter()
        .rev()
        .enumerate()
        .map(|(i, (_, p))| (path.samples[i].0, p.clone()))
        .collect();
    Ok(GeodesicPath {
        space: path.space,
        base: path.end().clone(),
        v0: end_v.scaled(-1.0),
        length: path.length,
        samples,
    })
}
