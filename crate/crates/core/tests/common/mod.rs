//! Shared generators and reference computations for the integration suites.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use shape_transport_core::kendall::{self, horizontal_project_k, KendallPath};
use shape_transport_core::zr_geodesic::{self, ZrPath};
use shape_transport_core::{KendallTangent, PreShape, ZrShape, ZrSpace, ZrTangent};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// A random closed shape whose first `active` harmonics have amplitude
/// `scale / n`.
pub fn random_shape(space: &ZrSpace, rng: &mut impl Rng, active: usize, scale: f64) -> ZrShape {
    let mut c = vec![0.0; space.dim()];
    for n in 1..=active.min(space.harmonics()) {
        let a = scale / n as f64;
        c[2 * n - 1] = a * normal(rng);
        c[2 * n] = a * normal(rng);
    }
    space.project_to_sigma(&c).expect("random shape projects")
}

/// A random tangent of the given norm, supported on the first `active`
/// harmonics before projection.
pub fn random_tangent(
    space: &ZrSpace,
    at: &ZrShape,
    rng: &mut impl Rng,
    active: usize,
    norm: f64,
) -> ZrTangent {
    let mut c = vec![0.0; space.dim()];
    for n in 1..=active.min(space.harmonics()) {
        c[2 * n - 1] = normal(rng) / n as f64;
        c[2 * n] = normal(rng) / n as f64;
    }
    let t = space.project_tangent(at, &c).unwrap();
    t.scaled(norm / t.norm())
}

/// Horizontal and tangent projection through the public API.
pub fn horizontal_tangent(space: &ZrSpace, at: &ZrShape, v: &[f64]) -> ZrTangent {
    let mut w = space.project_tangent(at, v).unwrap();
    for _ in 0..2 {
        w = space.horizontal_project(at, &w).unwrap();
        w = space.project_tangent(at, w.coefficients()).unwrap();
    }
    space.horizontal_project(at, &w).unwrap()
}

pub fn random_horizontal(
    space: &ZrSpace,
    at: &ZrShape,
    rng: &mut impl Rng,
    active: usize,
    norm: f64,
) -> ZrTangent {
    let t = random_tangent(space, at, rng, active, 1.0);
    let h = horizontal_tangent(space, at, t.coefficients());
    h.scaled(norm / h.norm())
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn tangent_distance(a: &ZrTangent, b: &ZrTangent) -> f64 {
    let d: Vec<f64> = a
        .coefficients()
        .iter()
        .zip(b.coefficients())
        .map(|(x, y)| x - y)
        .collect();
    ZrTangent::from_coefficients(d).norm()
}

/// Transport by repeated projection onto the next tangent (or horizontal)
/// space along `steps` equally spaced points of the path: a first-order
/// scheme.
fn projection_transport(
    space: &ZrSpace,
    path: &ZrPath,
    w0: &ZrTangent,
    steps: usize,
    horizontal: bool,
) -> Vec<f64> {
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    let velocity = path.v0.scaled(path.length);
    let points = zr_geodesic::shoot(space, &path.base, &velocity, &times, 512.0).unwrap();
    let mut w = w0.clone();
    for p in &points[1..] {
        w = if horizontal {
            horizontal_tangent(space, p, w.coefficients())
        } else {
            space.project_tangent(p, w.coefficients()).unwrap()
        };
    }
    w.into_coefficients()
}

fn richardson(
    space: &ZrSpace,
    path: &ZrPath,
    w0: &ZrTangent,
    steps: usize,
    horizontal: bool,
) -> ZrTangent {
    let coarse = projection_transport(space, path, w0, steps, horizontal);
    let fine = projection_transport(space, path, w0, 2 * steps, horizontal);
    ZrTangent::from_coefficients(fine.iter().zip(&coarse).map(|(f, c)| 2.0 * f - c).collect())
}

/// Richardson-extrapolated horizontal projection transport,
/// `2 W_{h/2} - W_h`.
pub fn projection_oracle(
    space: &ZrSpace,
    path: &ZrPath,
    w0: &ZrTangent,
    steps: usize,
) -> ZrTangent {
    richardson(space, path, w0, steps, true)
}

/// The same scheme with plain tangent projections, for transport in Σ_ZR.
pub fn tangent_projection_oracle(
    space: &ZrSpace,
    path: &ZrPath,
    w0: &ZrTangent,
    steps: usize,
) -> ZrTangent {
    richardson(space, path, w0, steps, false)
}

pub fn random_preshape(m: usize, k: usize, rng: &mut impl Rng) -> PreShape {
    let c = DMatrix::from_fn(m, k, |_, _| normal(rng));
    kendall::helmertize(&c).unwrap()
}

pub fn random_kendall_horizontal(x: &PreShape, rng: &mut impl Rng, norm: f64) -> KendallTangent {
    let w = DMatrix::from_fn(x.m(), x.k() - 1, |_, _| normal(rng));
    let h = horizontal_project_k(x, &w).unwrap();
    h.scaled(norm / h.norm())
}

/// A horizontal great circle of random direction and the given length.
pub fn random_kendall_path(m: usize, k: usize, rng: &mut impl Rng, length: f64) -> KendallPath {
    let x = random_preshape(m, k, rng);
    let v = random_kendall_horizontal(&x, rng, 1.0);
    let y = kendall::sphere_geodesic(&x, &v, length);
    kendall::geodesic_between(&x, &y, 33).unwrap()
}
