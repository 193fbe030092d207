//! Geometry-independent pieces: sampled geodesic paths, transport results
//! and the transplant pipeline shared by the contour and landmark spaces.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceTag {
    /// Closed contours Σ_ZR.
    ZrSigma,
    /// Closed contours modulo the initial point.
    ZrInvariant,
    /// Kendall shape space of landmark configurations.
    Kendall,
}

impl SpaceTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceTag::ZrSigma => "zr_sigma",
            SpaceTag::ZrInvariant => "zr_invariant",
            SpaceTag::Kendall => "kendall",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "zr_sigma" | "zr" => Some(SpaceTag::ZrSigma),
            "zr_invariant" => Some(SpaceTag::ZrInvariant),
            "kendall" => Some(SpaceTag::Kendall),
            _ => None,
        }
    }
}

/// A constant-speed geodesic `γ : [0, T] → M` with `γ(0) = base`,
/// `γ̇(0) = v0` of unit length (or zero when `T = 0`), sampled on a uniform
/// time grid.
#[derive(Debug, Clone)]
pub struct GeodesicPath<P, V> {
    pub space: SpaceTag,
    pub base: P,
    pub v0: V,
    pub length: f64,
    pub samples: Vec<(f64, P)>,
}

impl<P, V> GeodesicPath<P, V> {
    pub fn end(&self) -> &P {
        &self
            .samples
            .last()
            .expect("a path has at least one sample")
            .1
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|(t, _)| *t)
    }

    pub fn points(&self) -> impl Iterator<Item = &P> + '_ {
        self.samples.iter().map(|(_, p)| p)
    }
}

#[derive(Debug, Clone)]
pub struct TransportResult<V> {
    pub w_end: V,
    /// `|‖w(T)‖ - ‖w(0)‖|` accumulated by the integrator before the
    /// per-step norm correction.
    pub norm_drift: f64,
    pub steps: usize,
    /// Tangency defect of the transported vector after each step, before
    /// re-projection.
    pub residuals: Vec<f64>,
}

/// A shape manifold with the operations needed to transplant deformations.
pub trait ShapeGeometry {
    type Point: Clone;
    type Tangent: Clone;

    fn tag(&self) -> SpaceTag;

    /// Minimal geodesic from `from` to `to`.
    fn connect(
        &self,
        from: &Self::Point,
        to: &Self::Point,
    ) -> Result<GeodesicPath<Self::Point, Self::Tangent>>;

    /// Parallel transport of `w` from the start to the end of `path`.
    fn transport(
        &self,
        path: &GeodesicPath<Self::Point, Self::Tangent>,
        w: &Self::Tangent,
    ) -> Result<TransportResult<Self::Tangent>>;

    /// Geodesic from `base` with initial velocity `v` (of any length),
    /// sampled at the given times.
    fn shoot(
        &self,
        base: &Self::Point,
        v: &Self::Tangent,
        times: &[f64],
    ) -> Result<Vec<Self::Point>>;

    fn scale_tangent(&self, v: &Self::Tangent, alpha: f64) -> Self::Tangent;

    /// Ambient coordinates of a tangent vector, used for correlations.
    fn coefficients(&self, v: &Self::Tangent) -> Vec<f64>;

    /// Inner product of two tangents at a common base point.
    fn inner(&self, u: &Self::Tangent, v: &Self::Tangent) -> f64;

    /// Dimension of the ambient coefficient space.
    fn dimension(&self) -> usize;
}

/// Every stage of a transplant: the connecting geodesic, the transport of
/// the source velocity along it, and the points of the new geodesic.
#[derive(Debug, Clone)]
pub struct Transplanted<P, V> {
    pub connection: GeodesicPath<P, V>,
    pub transport: TransportResult<V>,
    pub points: Vec<P>,
}

/// Moves the deformation `source` to start at `target`: the initial
/// velocity is parallel transported along the connecting geodesic and a new
/// geodesic is shot from `target`. `times` are mapped affinely from
/// `[times[0], times[last]]` onto `[0, T]`.
pub fn transplant<G: ShapeGeometry>(
    geometry: &G,
    source: &GeodesicPath<G::Point, G::Tangent>,
    target: &G::Point,
    times: &[f64],
) -> Result<Vec<G::Point>> {
    transplant_detailed(geometry, source, target, times).map(|t| t.points)
}

/// [`transplant`], keeping the intermediate results.
pub fn transplant_detailed<G: ShapeGeometry>(
    geometry: &G,
    source: &GeodesicPath<G::Point, G::Tangent>,
    target: &G::Point,
    times: &[f64],
) -> Result<Transplanted<G::Point, G::Tangent>> {
    let unit_times = affine_times(times)?;
    let connection = geometry
        .connect(&source.base, target)
        .map_err(Error::stage("connect"))?;
    let transport = geometry
        .transport(&connection, &source.v0)
        .map_err(Error::stage("transport"))?;
    let velocity = geometry.scale_tangent(&transport.w_end, source.length);
    let points = geometry
        .shoot(target, &velocity, &unit_times)
        .map_err(Error::stage("shoot"))?;
    Ok(Transplanted {
        connection,
        transport,
        points,
    })
}

/// Maps increasing times onto `[0, 1]`.
pub fn affine_times(times: &[f64]) -> Result<Vec<f64>> {
    let (first, last) = match (times.first(), times.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::Precondition("no sample times given".into())),
    };
    if times.len() == 1 {
        return Ok(alloc::vec![0.0]);
    }
    if times.windows(2).any(|w| w[1] <= w[0])
        || last.partial_cmp(&first) != Some(core::cmp::Ordering::Greater)
    {
        return Err(Error::Precondition(
            "sample times must be strictly increasing".into(),
        ));
    }
    Ok(times.iter().map(|t| (t - first) / (last - first)).collect())
}
