//! Closed polygonal contours and their conversion to and from the
//! Zahn–Roskies representation.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::zr_space::{restore_gauge, ZrShape, ZrSpace};

pub type Point = [f64; 2];

/// Closed planar polyline traversed counterclockwise. The closing edge from
/// the last point back to the first is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    points: Vec<Point>,
    length: f64,
}

/// Similarity data dropped by the ZR encoding and needed to draw the shape
/// back in place: perimeter and the direction of the curve at the initial
/// point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub length: f64,
    pub base_angle: f64,
}

impl Default for Placement {
    fn default() -> Self {
        Placement {
            length: 2.0 * PI,
            base_angle: 0.0,
        }
    }
}

/// Output of [`zr_to_contour`]: the sampled curve and the distance between
/// its integrated endpoint and its start.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub contour: Contour,
    pub endpoint_gap: f64,
}

/// Turning-function samples `(s_j, θ(s_j))` on a uniform grid.
#[derive(Debug, Clone)]
pub struct SampledTurningFunction {
    pub samples: Vec<(f64, f64)>,
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn perimeter(points: &[Point]) -> f64 {
    (0..points.len())
        .map(|i| dist(points[i], points[(i + 1) % points.len()]))
        .sum()
}

impl Contour {
    /// Validates a polygon and orients it counterclockwise. The first point
    /// stays the initial point; a clockwise input is traversed backwards.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Degenerate(alloc::format!(
                "a contour needs at least 3 points, got {}",
                points.len()
            )));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("non-finite coordinate".into()));
        }
        let length = perimeter(&points);
        for i in 0..points.len() {
            let j = (i + 1) % points.len();
            if dist(points[i], points[j]) <= 1e-12 * length {
                return Err(Error::Degenerate(alloc::format!(
                    "zero-length edge between points {i} and {j}"
                )));
            }
        }
        let mut contour = Contour { points, length };
        if contour.signed_area() < 0.0 {
            contour.points[1..].reverse();
        }
        let index = contour.rotation_index();
        if (index - 1.0).abs() > 1e-6 {
            return Err(Error::Degenerate(alloc::format!(
                "contour turns {index:.3} times; only simple closed curves winding once are supported"
            )));
        }
        Ok(contour)
    }

    /// Wraps sampled points without orientation or simplicity checks, as
    /// produced by reconstruction.
    pub fn from_points_unchecked(points: Vec<Point>) -> Self {
        let length = perimeter(&points);
        Contour { points, length }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Perimeter including the closing edge.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Direction of the first edge, `arg z'(0)`.
    pub fn base_angle(&self) -> f64 {
        let [a, b] = [self.points[0], self.points[1]];
        (b[1] - a[1]).atan2(b[0] - a[0])
    }

    fn edge(&self, i: usize) -> Point {
        let a = self.points[i];
        let b = self.points[(i + 1) % self.points.len()];
        [b[0] - a[0], b[1] - a[1]]
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        0.5 * (0..n)
            .map(|i| cross(self.points[i], self.points[(i + 1) % n]))
            .sum::<f64>()
    }

    /// Total exterior turning divided by `2π`.
    pub fn rotation_index(&self) -> f64 {
        let n = self.points.len();
        let total: f64 = (0..n)
            .map(|i| {
                let (e, f) = (self.edge(i), self.edge((i + 1) % n));
                cross(e, f).atan2(e[0] * f[0] + e[1] * f[1])
            })
            .sum();
        total / (2.0 * PI)
    }

    /// Area centroid, or the vertex mean for (nearly) zero-area curves.
    pub fn centroid(&self) -> Point {
        let n = self.points.len();
        let area = self.signed_area();
        if area.abs() <= 1e-14 * self.length * self.length {
            let (sx, sy) = self
                .points
                .iter()
                .fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
            return [sx / n as f64, sy / n as f64];
        }
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let (p, q) = (self.points[i], self.points[(i + 1) % n]);
            let c = cross(p, q);
            cx += (p[0] + q[0]) * c;
            cy += (p[1] + q[1]) * c;
        }
        [cx / (6.0 * area), cy / (6.0 * area)]
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                best = best.max(dist(*p, *q));
            }
        }
        best
    }

    /// `p ↦ scale · R(angle) p + shift`.
    pub fn transformed(&self, scale: f64, angle: f64, shift: Point) -> Contour {
        let (s, c) = angle.sin_cos();
        let points = self
            .points
            .iter()
            .map(|p| {
                [
                    scale * (c * p[0] - s * p[1]) + shift[0],
                    scale * (s * p[0] + c * p[1]) + shift[1],
                ]
            })
            .collect();
        Contour {
            points,
            length: scale * self.length,
        }
    }

    pub fn translated(&self, shift: Point) -> Contour {
        self.transformed(1.0, 0.0, shift)
    }

    /// Moves the centroid to the origin.
    pub fn centered(&self) -> Contour {
        let c = self.centroid();
        self.translated([-c[0], -c[1]])
    }

    /// Point at arclength `ell` from the initial point, measured along the
    /// closed polyline.
    pub fn point_at_arclength(&self, ell: f64) -> Point {
        let mut remaining = num_traits::Euclid::rem_euclid(&ell, &self.length);
        let n = self.points.len();
        for i in 0..n {
            let e = self.edge(i);
            let len = e[0].hypot(e[1]);
            if remaining <= len || i == n - 1 {
                let t = (remaining / len).min(1.0);
                let p = self.points[i];
                return [p[0] + t * e[0], p[1] + t * e[1]];
            }
            remaining -= len;
        }
        unreachable!("polyline has at least one edge")
    }

    /// `count` points equally spaced in arclength, starting at the initial
    /// point.
    pub fn resample_uniform(&self, count: usize) -> Contour {
        let points = (0..count)
            .map(|j| self.point_at_arclength(self.length * j as f64 / count as f64))
            .collect();
        Contour::from_points_unchecked(points)
    }

    /// Pairs `(i, j)` of non-adjacent edges that intersect; edge `i` joins
    /// point `i` to point `i+1`. Touching within `tol` counts.
    pub fn self_intersections(&self, tol: f64) -> Vec<(usize, usize)> {
        let n = self.points.len();
        let mut hits = Vec::new();
        for i in 0..n {
            let (a, b) = (self.points[i], self.points[(i + 1) % n]);
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = (self.points[j], self.points[(j + 1) % n]);
                if segments_intersect(a, b, c, d, tol) {
                    hits.push((i, j));
                }
            }
        }
        hits
    }
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point, tol: f64) -> bool {
    if a[0].max(b[0]) + tol < c[0].min(d[0])
        || c[0].max(d[0]) + tol < a[0].min(b[0])
        || a[1].max(b[1]) + tol < c[1].min(d[1])
        || c[1].max(d[1]) + tol < a[1].min(b[1])
    {
        return false;
    }
    point_segment_distance(a, c, d) <= tol
        || point_segment_distance(b, c, d) <= tol
        || point_segment_distance(c, a, b) <= tol
        || point_segment_distance(d, a, b) <= tol
        || {
            let sub = |p: Point, q: Point| [p[0] - q[0], p[1] - q[1]];
            let o1 = cross(sub(b, a), sub(c, a));
            let o2 = cross(sub(b, a), sub(d, a));
            let o3 = cross(sub(d, c), sub(a, c));
            let o4 = cross(sub(d, c), sub(b, c));
            o1 * o2 < 0.0 && o3 * o4 < 0.0
        }
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

fn directed_hausdorff(a: &Contour, b: &Contour) -> f64 {
    let n = b.points.len();
    a.points
        .iter()
        .map(|p| {
            (0..n)
                .map(|i| point_segment_distance(*p, b.points[i], b.points[(i + 1) % n]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between the vertex sets of each contour and
/// the closed polyline of the other.
pub fn hausdorff(a: &Contour, b: &Contour) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Exact Fourier coefficients of the staircase turning function of a
/// polygon, together with the true mean `x_0` before gauge fixing.
///
/// The polygon is traversed at constant speed over `s ∈ [0, 2π)`, so on
/// edge `e` spanning `[a_e, b_e)` the turning function is `c_e - s` with
/// `c_e` the edge direction relative to the first edge.
pub fn turning_coefficients(contour: &Contour, harmonics: usize) -> Vec<f64> {
    let n = contour.points.len();
    let scale = 2.0 * PI / contour.length;
    let mut coeffs = alloc::vec![0.0; 2 * harmonics + 1];
    let mut phi = 0.0;
    let mut start = 0.0;
    let mut mean = 0.0;
    for e in 0..n {
        if e > 0 {
            let (p, q) = (contour.edge(e - 1), contour.edge(e));
            phi += cross(p, q).atan2(p[0] * q[0] + p[1] * q[1]);
        }
        let edge = contour.edge(e);
        let end = if e == n - 1 {
            2.0 * PI
        } else {
            start + scale * edge[0].hypot(edge[1])
        };
        mean += phi * (end - start);
        for k in 1..=harmonics {
            let kf = k as f64;
            let (sa, ca) = (kf * start).sin_cos();
            let (sb, cb) = (kf * end).sin_cos();
            coeffs[2 * k - 1] += phi * (sb - sa) / (PI * kf);
            coeffs[2 * k] += phi * (ca - cb) / (PI * kf);
        }
        start = end;
    }
    // the -s ramp contributes only to the mean and the sine terms
    for k in 1..=harmonics {
        coeffs[2 * k] += 2.0 / k as f64;
    }
    coeffs[0] = mean / (2.0 * PI) - PI;
    coeffs
}

/// Encodes a contour as a point of Σ_ZR together with its placement.
///
/// The constant term is reset to `θ(0) = 0` and the coefficients projected
/// onto the closure constraint; the resulting shift of the mean turning
/// angle is folded into the returned base angle so that reconstruction
/// keeps the input's orientation.
pub fn contour_to_zr(space: &ZrSpace, contour: &Contour) -> Result<(ZrShape, Placement)> {
    let raw = turning_coefficients(contour, space.harmonics());
    let true_mean = raw[0];
    let mut gauged = raw;
    restore_gauge(&mut gauged);
    let shape = space.project_to_sigma(&gauged)?;
    let placement = Placement {
        length: contour.length,
        base_angle: contour.base_angle() + true_mean - shape.x0(),
    };
    Ok((shape, placement))
}

/// Samples `θ` on `samples` uniform points of `[0, 2π)`.
pub fn sample_turning_function(theta: &ZrShape, samples: usize) -> SampledTurningFunction {
    SampledTurningFunction {
        samples: (0..samples)
            .map(|j| {
                let s = 2.0 * PI * j as f64 / samples as f64;
                (s, theta.evaluate(s))
            })
            .collect(),
    }
}

/// Integrates `ż(s) = (L/2π) e^{i(θ(s) + base_angle + s)}` by the composite
/// trapezoid rule on `samples` uniform steps. Translation is not encoded,
/// so the curve starts at the origin.
pub fn zr_to_contour(
    space: &ZrSpace,
    theta: &ZrShape,
    samples: usize,
    placement: Placement,
) -> Result<Reconstruction> {
    if samples < 16 {
        return Err(Error::Precondition(alloc::format!(
            "reconstruction needs at least 16 samples, got {samples}"
        )));
    }
    let residual = space.closure_map(theta)?.norm();
    if residual > 1e-6 {
        return Err(Error::OpenCurve { residual });
    }
    let h = 2.0 * PI / samples as f64;
    let speed = placement.length / (2.0 * PI);
    let velocity = |j: usize| {
        let s = h * j as f64;
        Complex64::from_polar(speed, theta.evaluate(s) + placement.base_angle + s)
    };
    let mut z = Complex64::new(0.0, 0.0);
    let mut points = Vec::with_capacity(samples);
    let mut prev = velocity(0);
    for j in 0..samples {
        points.push([z.re, z.im]);
        let next = velocity(j + 1);
        z += (prev + next) * (0.5 * h);
        prev = next;
    }
    Ok(Reconstruction {
        contour: Contour::from_points_unchecked(points),
        endpoint_gap: z.norm(),
    })
}
