//! Parallelity of two deformations: the non-central correlation `ρ` of
//! their initial velocities (after transplanting one to the other's base)
//! and the dimension-adjusted measure `μ`.
//!
//! For a direction drawn uniformly on the unit sphere of `R^n`, the angle
//! `φ` to a fixed axis has density proportional to `sin^{n-2} φ`. `μ(ρ)` is
//! the probability that a random direction makes a larger angle with the
//! axis than `arccos ρ`.

use alloc::string::String;
use core::f64::consts::FRAC_PI_2;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geodesic::{GeodesicPath, ShapeGeometry};
use crate::quadrature::adaptive_simpson;
use crate::vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MuVariant {
    /// Upper limit `arccos ρ`.
    #[default]
    Arccos,
    /// Upper limit `√(arccos ρ)`, as the formula is sometimes printed.
    SqrtArccos,
}

impl MuVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            MuVariant::Arccos => "arccos",
            MuVariant::SqrtArccos => "sqrt_arccos",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "arccos" => Some(MuVariant::Arccos),
            "sqrt_arccos" => Some(MuVariant::SqrtArccos),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelityReport {
    pub rho: f64,
    pub mu: f64,
    /// Dimension of the space the velocities live in.
    pub n: usize,
    pub names: (String, String),
    pub variant: MuVariant,
}

/// `|<v, w>| / (‖v‖ ‖w‖)`.
pub fn rho(v: &[f64], w: &[f64]) -> Result<f64> {
    if v.len() != w.len() {
        return Err(Error::Dimension {
            expected: v.len(),
            found: w.len(),
        });
    }
    let (nv, nw) = (vector::norm(v), vector::norm(w));
    if nv == 0.0 || nw == 0.0 {
        return Err(Error::Precondition("correlation with a zero vector".into()));
    }
    Ok((vector::dot(v, w).abs() / (nv * nw)).min(1.0))
}

/// `μ` with the `arccos ρ` upper limit.
pub fn mu(rho: f64, n: usize) -> Result<f64> {
    mu_with(rho, n, MuVariant::Arccos)
}

pub fn mu_with(rho: f64, n: usize, variant: MuVariant) -> Result<f64> {
    if n < 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Precondition(alloc::format!(
            "correlation {rho} outside [0, 1]"
        )));
    }
    let power = (n - 2) as i32;
    let density = |phi: f64| phi.sin().powi(power);
    let half = adaptive_simpson(density, 0.0, FRAC_PI_2, 1e-15);
    let tol = 1e-13 * half;
    let limit = match variant {
        MuVariant::Arccos => rho.acos(),
        MuVariant::SqrtArccos => rho.acos().sqrt(),
    };
    let mass = if limit <= FRAC_PI_2 {
        adaptive_simpson(density, 0.0, limit, tol)
    } else {
        half + adaptive_simpson(density, FRAC_PI_2, limit, tol)
    };
    Ok((1.0 - mass / (2.0 * half)).clamp(0.0, 1.0))
}

/// Transplants the initial velocity of `a` to the base of `b` and measures
/// how parallel it is to the initial velocity of `b`.
pub fn compare_growth<G: ShapeGeometry>(
    geometry: &G,
    a: &GeodesicPath<G::Point, G::Tangent>,
    b: &GeodesicPath<G::Point, G::Tangent>,
    variant: MuVariant,
) -> Result<ParallelityReport> {
    if a.space != b.space || a.space != geometry.tag() {
        return Err(Error::Precondition("paths live in different spaces".into()));
    }
    let connection = geometry
        .connect(&a.base, &b.base)
        .map_err(Error::stage("connect"))?;
    let moved = geometry
        .transport(&connection, &a.v0)
        .map_err(Error::stage("transport"))?
        .w_end;
    let r = rho(
        &geometry.coefficients(&moved),
        &geometry.coefficients(&b.v0),
    )?;
    let n = geometry.dimension();
    Ok(ParallelityReport {
        rho: r,
        mu: mu_with(r, n, variant)?,
        n,
        names: (String::new(), String::new()),
        variant,
    })
}
