//! Kendall shape spaces: centred, scaled landmark configurations on the
//! pre-shape sphere, with rotations factored out.
//!
//! Pre-shapes are `m × (k-1)` matrices of unit Frobenius norm. The shape
//! space is reached through horizontal great circles; parallel transport in
//! the shape space is computed as the horizontal lift
//! `Ẇ = -<W, γ̇> γ - Σ_k dω_k(γ̇, W) V_k`, where `V_k` is an orthonormal frame
//! of the vertical space (the orbit directions `e_ij x`).

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::contour::{Contour, Point};
use crate::error::{Error, Result};
use crate::geodesic::{GeodesicPath, ShapeGeometry, SpaceTag, TransportResult};

pub type KendallPath = GeodesicPath<PreShape, KendallTangent>;

/// Singular-value threshold of the regular part.
const RANK_TOLERANCE: f64 = 1e-10;
/// Step of the central differences in the exterior derivative.
const FORM_DIFF_STEP: f64 = 1e-6;
pub const DEFAULT_STEPS_PER_UNIT: f64 = 256.0;
pub const DRIFT_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct PreShape {
    mat: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KendallTangent {
    mat: DMatrix<f64>,
    horizontal: bool,
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

impl PreShape {
    /// Normalises a centred `m × (k-1)` matrix onto the sphere.
    pub fn from_matrix(mat: DMatrix<f64>) -> Result<Self> {
        if mat.nrows() < 1 || mat.ncols() < 1 {
            return Err(Error::Degenerate("empty pre-shape matrix".into()));
        }
        let n = mat.norm();
        if !n.is_finite() || n <= 1e-300 {
            return Err(Error::Degenerate(
                "pre-shape matrix has zero or non-finite norm".into(),
            ));
        }
        Ok(PreShape { mat: mat / n })
    }

    pub fn m(&self) -> usize {
        self.mat.nrows()
    }

    /// Number of landmarks.
    pub fn k(&self) -> usize {
        self.mat.ncols() + 1
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// Landmarks (as columns) of the centred configuration.
    pub fn landmarks(&self) -> DMatrix<f64> {
        &self.mat * sub_helmert(self.k()).transpose()
    }

    /// Rank within the regularity tolerance.
    pub fn rank(&self) -> usize {
        self.mat
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .filter(|s| **s > RANK_TOLERANCE)
            .count()
    }

    pub fn is_regular(&self) -> bool {
        self.rank() + 2 > self.m()
    }
}

impl KendallTangent {
    pub fn new(mat: DMatrix<f64>) -> Self {
        KendallTangent {
            mat,
            horizontal: false,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn is_horizontal(&self) -> bool {
        self.horizontal
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        KendallTangent {
            mat: &self.mat * alpha,
            horizontal: self.horizontal,
        }
    }

    fn horizontal(mat: DMatrix<f64>) -> Self {
        KendallTangent {
            mat,
            horizontal: true,
        }
    }
}

/// The `k × (k-1)` sub-Helmert matrix: orthonormal columns orthogonal to
/// the all-ones vector.
pub fn sub_helmert(k: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(k, k - 1);
    for j in 1..k {
        let jf = j as f64;
        let c = 1.0 / (jf * (jf + 1.0)).sqrt();
        for i in 0..j {
            h[(i, j - 1)] = c;
        }
        h[(j, j - 1)] = -jf * c;
    }
    h
}

/// Removes location and scale from an `m × k` configuration.
pub fn helmertize(config: &DMatrix<f64>) -> Result<PreShape> {
    if config.ncols() < 2 {
        return Err(Error::Degenerate("need at least two landmarks".into()));
    }
    let centred = config * sub_helmert(config.ncols());
    if centred.norm() <= 1e-12 * config.norm().max(1.0) {
        return Err(Error::Degenerate("all landmarks coincide".into()));
    }
    PreShape::from_matrix(centred)
}

/// `x cos t + v sin t` for a unit tangent `v`.
pub fn sphere_geodesic(x: &PreShape, v: &KendallTangent, t: f64) -> PreShape {
    let (s, c) = t.sin_cos();
    PreShape {
        mat: &x.mat * c + &v.mat * s,
    }
}

/// The skew generator `e_ij = E_ij - E_ji` applied from the left.
fn generator_times(i: usize, j: usize, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    out.row_mut(i).copy_from(&x.row(j));
    let neg = -x.row(i);
    out.row_mut(j).copy_from(&neg);
    out
}

/// Index pairs `i < j` in lexicographic order.
pub fn lexicographic_pairs(m: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            pairs.push((i, j));
        }
    }
    pairs
}

fn gram_schmidt_vertical(x: &DMatrix<f64>, order: &[(usize, usize)]) -> Result<Vec<DMatrix<f64>>> {
    let mut basis: Vec<DMatrix<f64>> = Vec::with_capacity(order.len());
    for &(i, j) in order {
        let mut v = generator_times(i, j, x);
        for b in &basis {
            let c = inner(&v, b);
            v -= b * c;
        }
        let n = v.norm();
        if n <= RANK_TOLERANCE {
            return Err(Error::Degenerate(alloc::format!(
                "vertical directions are dependent (pre-shape outside the regular part, residual {n:e})"
            )));
        }
        basis.push(v / n);
    }
    Ok(basis)
}

/// Orthonormal basis of the vertical space at `x` from `{e_ij x}` in
/// lexicographic order.
pub fn vertical_basis(x: &PreShape) -> Result<Vec<DMatrix<f64>>> {
    vertical_basis_ordered(x, &lexicographic_pairs(x.m()))
}

/// Same, with a caller-chosen Gram–Schmidt order.
pub fn vertical_basis_ordered(x: &PreShape, order: &[(usize, usize)]) -> Result<Vec<DMatrix<f64>>> {
    gram_schmidt_vertical(&x.mat, order)
}

fn remove_components(w: &DMatrix<f64>, x: &DMatrix<f64>, basis: &[DMatrix<f64>]) -> DMatrix<f64> {
    let mut out = w - x * inner(w, x);
    for b in basis {
        let c = inner(&out, b);
        out -= b * c;
    }
    out
}

/// Removes the radial and vertical components of `w` at `x`.
pub fn horizontal_project_k(x: &PreShape, w: &DMatrix<f64>) -> Result<KendallTangent> {
    check_shape(x, w)?;
    let basis = vertical_basis(x)?;
    Ok(KendallTangent::horizontal(remove_components(
        w, &x.mat, &basis,
    )))
}

fn check_shape(x: &PreShape, w: &DMatrix<f64>) -> Result<()> {
    if x.mat.shape() != w.shape() {
        return Err(Error::Dimension {
            expected: x.mat.len(),
            found: w.len(),
        });
    }
    Ok(())
}

/// Rotation `g ∈ SO(m)` maximising `<x, g y>`, and `g y`.
pub fn procrustes_align(x: &PreShape, y: &PreShape) -> Result<(DMatrix<f64>, PreShape)> {
    if x.mat.shape() != y.mat.shape() {
        return Err(Error::Dimension {
            expected: x.mat.len(),
            found: y.mat.len(),
        });
    }
    let m = x.m();
    let cross = &x.mat * y.mat.transpose();
    let svd = cross.svd(true, true);
    let (u, vt) = (svd.u.expect("requested U"), svd.v_t.expect("requested V"));
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|a, b| sv[*b].total_cmp(&sv[*a]));
    let mut d = DMatrix::<f64>::identity(m, m);
    let flip = (&u * &vt).determinant() < 0.0;
    let smallest = order[m - 1];
    if flip {
        d[(smallest, smallest)] = -1.0;
    }
    let scale = sv[order[0]];
    if m >= 2 {
        let (a, b) = (sv[order[m - 2]], sv[order[m - 1]]);
        let tie = if flip { a - b } else { a + b };
        if scale <= 1e-14 || tie <= 1e-12 * scale {
            return Err(Error::Ambiguous(order.iter().map(|i| sv[*i]).collect()));
        }
    }
    let g = u * d * vt;
    let aligned = PreShape { mat: &g * &y.mat };
    Ok((g, aligned))
}

/// Procrustes distance: the length of the horizontal great circle between
/// the two orbits.
pub fn distance(x: &PreShape, y: &PreShape) -> Result<f64> {
    let (_, aligned) = procrustes_align(x, y)?;
    Ok(inner(&x.mat, &aligned.mat).clamp(-1.0, 1.0).acos())
}

/// Horizontal great circle from `x` to the rotation orbit of `y`.
pub fn geodesic_between(x: &PreShape, y: &PreShape, samples: usize) -> Result<KendallPath> {
    if samples < 2 {
        return Err(Error::Precondition(
            "a geodesic needs at least 2 samples".into(),
        ));
    }
    if !x.is_regular() {
        return Err(Error::Degenerate(
            "start pre-shape is outside the regular part".into(),
        ));
    }
    let (_, aligned) = procrustes_align(x, y)?;
    let c = inner(&x.mat, &aligned.mat).clamp(-1.0, 1.0);
    let angle = c.acos();
    let (v0, length) = if angle <= 1e-14 {
        (DMatrix::zeros(x.m(), x.k() - 1), 0.0)
    } else {
        let mut v = &aligned.mat - &x.mat * c;
        v /= v.norm();
        (v, angle)
    };
    let v0 = KendallTangent::horizontal(v0);
    let last = (samples - 1) as f64;
    let points = (0..samples)
        .map(|i| {
            let t = length * i as f64 / last;
            (t, sphere_geodesic(x, &v0, t))
        })
        .collect();
    Ok(KendallPath {
        space: SpaceTag::Kendall,
        base: x.clone(),
        v0,
        length,
        samples: points,
    })
}

/// Velocity of the unit-speed great circle of `path` at time `t`.
fn great_circle_velocity(path: &KendallPath, t: f64) -> DMatrix<f64> {
    let (s, c) = t.sin_cos();
    &path.v0.mat * c - &path.base.mat * s
}

fn great_circle_point(path: &KendallPath, t: f64) -> DMatrix<f64> {
    let (s, c) = t.sin_cos();
    &path.base.mat * c + &path.v0.mat * s
}

/// `dω_k(X, Y) = ½ (<Y, DV_k[X]> - <X, DV_k[Y]>)` for every frame element,
/// by central differences of the frame.
fn exterior_derivatives(
    x: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    order: &[(usize, usize)],
) -> Result<Vec<f64>> {
    let derivative = |dir: &DMatrix<f64>| -> Result<Vec<DMatrix<f64>>> {
        let n = dir.norm();
        if n == 0.0 {
            return Ok(vec![DMatrix::zeros(x.nrows(), x.ncols()); order.len()]);
        }
        let h = FORM_DIFF_STEP / n;
        let ahead = gram_schmidt_vertical(&(x + dir * h), order)?;
        let behind = gram_schmidt_vertical(&(x - dir * h), order)?;
        Ok(ahead
            .iter()
            .zip(&behind)
            .map(|(p, q)| (p - q) / (2.0 * h))
            .collect())
    };
    let da = derivative(a)?;
    let db = derivative(b)?;
    Ok(da
        .iter()
        .zip(&db)
        .map(|(dva, dvb)| 0.5 * (inner(b, dva) - inner(a, dvb)))
        .collect())
}

#[derive(Debug, Clone)]
pub struct KendallTransportOptions {
    pub steps: KendallSteps,
    /// Gram–Schmidt order of the vertical frame.
    pub order: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KendallSteps {
    PerUnit(f64),
    Fixed(usize),
}

impl Default for KendallTransportOptions {
    fn default() -> Self {
        KendallTransportOptions {
            steps: KendallSteps::PerUnit(DEFAULT_STEPS_PER_UNIT),
            order: None,
        }
    }
}

/// Transport along a horizontal great circle by integrating the lifted
/// parallel-transport equation with RK4.
pub fn transport_kendall(
    path: &KendallPath,
    w0: &KendallTangent,
) -> Result<TransportResult<KendallTangent>> {
    transport_kendall_with(
        path,
        core::slice::from_ref(w0),
        &KendallTransportOptions::default(),
    )
    .map(|mut v| v.swap_remove(0))
}

pub fn transport_kendall_with(
    path: &KendallPath,
    ws: &[KendallTangent],
    options: &KendallTransportOptions,
) -> Result<Vec<TransportResult<KendallTangent>>> {
    let x0 = &path.base;
    let order = options
        .order
        .clone()
        .unwrap_or_else(|| lexicographic_pairs(x0.m()));
    let basis0 = gram_schmidt_vertical(&x0.mat, &order)?;
    for w in ws {
        check_shape(x0, &w.mat)?;
        let defect = (remove_components(&w.mat, &x0.mat, &basis0) - &w.mat).norm();
        if defect > 1e-6 * w.norm().max(1e-300) && w.norm() > 0.0 {
            return Err(Error::Precondition(alloc::format!(
                "transported vector is not horizontal (defect {defect:e})"
            )));
        }
    }
    if path.length == 0.0 {
        return Ok(ws
            .iter()
            .map(|w| TransportResult {
                w_end: KendallTangent::horizontal(w.mat.clone()),
                norm_drift: 0.0,
                steps: 0,
                residuals: Vec::new(),
            })
            .collect());
    }
    let steps = match options.steps {
        KendallSteps::PerUnit(d) => (d * path.length).ceil().max(8.0) as usize,
        KendallSteps::Fixed(n) => n.max(1),
    };
    let h = path.length / steps as f64;
    let m = x0.m();
    let rhs = |t: f64, w: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let x = great_circle_point(path, t);
        let xdot = great_circle_velocity(path, t);
        let basis = gram_schmidt_vertical(&x, &order).map_err(|_| Error::SingularPath { t })?;
        let forms = exterior_derivatives(&x, &xdot, w, &order)?;
        let mut out = &x * (-inner(w, &xdot));
        for (f, v) in forms.iter().zip(&basis) {
            out -= v * *f;
        }
        Ok(out)
    };
    let mut state: Vec<DMatrix<f64>> = ws.iter().map(|w| w.mat.clone()).collect();
    let targets: Vec<f64> = state.iter().map(|w| w.norm()).collect();
    let mut growth = vec![1.0; ws.len()];
    let mut residuals = Vec::with_capacity(steps);
    for step in 0..steps {
        let t = h * step as f64;
        let t_next = t + h;
        let x_next = PreShape {
            mat: great_circle_point(path, t_next),
        };
        if x_next.rank() + 2 <= m {
            return Err(Error::SingularPath { t: t_next });
        }
        let basis_next = gram_schmidt_vertical(&x_next.mat, &order)
            .map_err(|_| Error::SingularPath { t: t_next })?;
        let mut worst: f64 = 0.0;
        for (i, w) in state.iter_mut().enumerate() {
            let k1 = rhs(t, w)?;
            let k2 = rhs(t + 0.5 * h, &(&*w + &k1 * (0.5 * h)))?;
            let k3 = rhs(t + 0.5 * h, &(&*w + &k2 * (0.5 * h)))?;
            let k4 = rhs(t_next, &(&*w + &k3 * h))?;
            let raw = &*w + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            let projected = remove_components(&raw, &x_next.mat, &basis_next);
            worst = worst.max((&raw - &projected).norm());
            let after = projected.norm();
            *w = projected;
            if targets[i] > 0.0 && after > 0.0 {
                growth[i] *= after / targets[i];
                *w *= targets[i] / after;
            }
        }
        residuals.push(worst);
    }
    state
        .into_iter()
        .zip(targets.iter().zip(&growth))
        .map(|(w, (n0, g))| {
            let drift = (n0 * g - n0).abs();
            if drift > DRIFT_LIMIT {
                return Err(Error::StepTooCoarse {
                    drift,
                    limit: DRIFT_LIMIT,
                });
            }
            Ok(TransportResult {
                w_end: KendallTangent::horizontal(w),
                norm_drift: drift,
                steps,
                residuals: residuals.clone(),
            })
        })
        .collect()
}

/// Closed-form transport for planar configurations at time `t` along the
/// path.
pub fn transport_kendall_m2_at(
    path: &KendallPath,
    w0: &KendallTangent,
    t: f64,
) -> Result<KendallTangent> {
    let x = &path.base;
    if x.m() != 2 {
        return Err(Error::Precondition(alloc::format!(
            "closed-form transport needs planar landmarks, got m = {}",
            x.m()
        )));
    }
    check_shape(x, &w0.mat)?;
    let symmetric_defect = |a: &DMatrix<f64>, b: &DMatrix<f64>| {
        let p = a * b.transpose();
        (&p - p.transpose()).norm()
    };
    if symmetric_defect(&x.mat, &path.v0.mat) > 1e-9 || symmetric_defect(&x.mat, &w0.mat) > 1e-9 {
        return Err(Error::Precondition(
            "closed-form transport needs horizontal inputs".into(),
        ));
    }
    let v = &path.v0.mat;
    let ev = generator_times(0, 1, v);
    let (a, b) = (inner(&w0.mat, v), inner(&w0.mat, &ev));
    let gdot = great_circle_velocity(path, t);
    let egdot = generator_times(0, 1, &gdot);
    let w = &w0.mat - (v * a + &ev * b) + gdot * a + egdot * b;
    Ok(KendallTangent::horizontal(w))
}

/// Closed-form transport to the end of the path (planar landmarks only).
pub fn transport_kendall_m2(path: &KendallPath, w0: &KendallTangent) -> Result<KendallTangent> {
    transport_kendall_m2_at(path, w0, path.length)
}

/// Points along the contour used as landmarks: its vertices when there are
/// exactly `k`, otherwise `k` samples equally spaced in arclength.
pub fn contour_landmarks(contour: &Contour, k: usize) -> Vec<Point> {
    if contour.len() == k {
        contour.points().to_vec()
    } else {
        contour.resample_uniform(k).points().to_vec()
    }
}

/// Pre-shape of `k` landmarks taken from a contour.
pub fn transfer_zr_kendall(contour: &Contour, k: usize) -> Result<PreShape> {
    if k < 3 {
        return Err(Error::Precondition(alloc::format!(
            "planar shapes need at least 3 landmarks, got {k}"
        )));
    }
    let pts = contour_landmarks(contour, k);
    let config = DMatrix::from_fn(2, k, |r, c| pts[c][r]);
    helmertize(&config)
}

/// Polygon through the landmarks of a planar pre-shape, each edge split
/// into `edge_resolution` segments.
pub fn sample_polygon(x: &PreShape, edge_resolution: usize) -> Result<Contour> {
    if x.m() != 2 {
        return Err(Error::Precondition(
            "only planar pre-shapes can be drawn".into(),
        ));
    }
    let lm = x.landmarks();
    let k = lm.ncols();
    let per_edge = edge_resolution.max(1);
    let mut points = Vec::with_capacity(k * per_edge);
    for i in 0..k {
        let j = (i + 1) % k;
        for s in 0..per_edge {
            let t = s as f64 / per_edge as f64;
            points.push([
                lm[(0, i)] * (1.0 - t) + lm[(0, j)] * t,
                lm[(1, i)] * (1.0 - t) + lm[(1, j)] * t,
            ]);
        }
    }
    Ok(Contour::from_points_unchecked(points))
}

/// Kendall's shape space `Σ^k_m` as a [`ShapeGeometry`].
#[derive(Debug, Clone)]
pub struct KendallSpace {
    pub m: usize,
    pub k: usize,
    pub samples: usize,
    pub transport: KendallTransportOptions,
}

impl KendallSpace {
    pub fn new(m: usize, k: usize) -> Self {
        KendallSpace {
            m,
            k,
            samples: 33,
            transport: KendallTransportOptions::default(),
        }
    }
}

impl ShapeGeometry for KendallSpace {
    type Point = PreShape;
    type Tangent = KendallTangent;

    fn tag(&self) -> SpaceTag {
        SpaceTag::Kendall
    }

    fn connect(&self, from: &PreShape, to: &PreShape) -> Result<KendallPath> {
        geodesic_between(from, to, self.samples)
    }

    fn transport(
        &self,
        path: &KendallPath,
        w: &KendallTangent,
    ) -> Result<TransportResult<KendallTangent>> {
        transport_kendall_with(path, core::slice::from_ref(w), &self.transport)
            .map(|mut v| v.swap_remove(0))
    }

    fn shoot(&self, base: &PreShape, v: &KendallTangent, times: &[f64]) -> Result<Vec<PreShape>> {
        let speed = v.norm();
        if speed == 0.0 {
            return Ok(times.iter().map(|_| base.clone()).collect());
        }
        let unit = v.scaled(1.0 / speed);
        Ok(times
            .iter()
            .map(|t| sphere_geodesic(base, &unit, t * speed))
            .collect())
    }

    fn scale_tangent(&self, v: &KendallTangent, alpha: f64) -> KendallTangent {
        v.scaled(alpha)
    }

    fn coefficients(&self, v: &KendallTangent) -> Vec<f64> {
        v.mat.iter().copied().collect()
    }

    fn inner(&self, u: &KendallTangent, v: &KendallTangent) -> f64 {
        inner(&u.mat, &v.mat)
    }

    fn dimension(&self) -> usize {
        self.m * (self.k - 1)
    }
}
