//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;

use common::*;
use shape_transport_core::contour::{contour_to_zr, hausdorff, zr_to_contour};
use shape_transport_core::kendall::{self, transfer_zr_kendall, KendallPath};
use shape_transport_core::parallelity::{mu, mu_with, MuVariant};
use shape_transport_core::zr_geodesic::{self, GeodesicOptions, ZrPath};
use shape_transport_core::zr_space::is_k_symmetric;
use shape_transport_core::zr_transport::{self, TransportSteps};
use shape_transport_core::{polygons, KendallTangent, Placement, ZrShape, ZrSpace, ZrTangent};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, cap: f64) -> bool {
    elapsed.as_secs_f64() < cap
}

fn published_mu() -> Outcome {
    let start = Instant::now();
    let cases = [(0.17, 0.99), (0.12, 0.96), (0.44, 1.00), (0.083, 0.88)];
    let mut worst: f64 = 0.0;
    let mut values = Vec::new();
    for (rho, expected) in cases {
        let m = mu_with(rho, 201, MuVariant::Arccos).map_err(|e| e.to_string())?;
        worst = worst.max((m - expected).abs());
        values.push(format!("{m:.3}"));
    }
    let elapsed = start.elapsed();
    check(
        worst <= 0.015 && within(elapsed, 1.0),
        format!(
            "mu = [{}], max deviation {worst:.4}, {elapsed:.2?}",
            values.join(", ")
        ),
    )
}

/// Sub-path of a horizontal great circle ending at time `t`.
fn kendall_prefix(path: &KendallPath, t: f64) -> KendallPath {
    let end = kendall::sphere_geodesic(&path.base, &path.v0, t);
    kendall::geodesic_between(&path.base, &end, 3).unwrap()
}

fn kendall_closed_form() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let k = 3 + case % 6;
        let length = r.random_range(0.3..1.2);
        let path = random_kendall_path(2, k, &mut r, length);
        let w = random_kendall_horizontal(&path.base, &mut r, 1.0);
        for i in 1..=8 {
            let t = path.length * i as f64 / 8.0;
            let numeric = kendall::transport_kendall(&kendall_prefix(&path, t), &w)
                .map_err(|e| e.to_string())?;
            let exact =
                kendall::transport_kendall_m2_at(&path, &w, t).map_err(|e| e.to_string())?;
            worst = worst.max((numeric.w_end.matrix() - exact.matrix()).amax());
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-6 && within(elapsed, 30.0),
        format!("sup deviation {worst:.2e} over 50 paths, {elapsed:.2?}"),
    )
}

fn flat_subspace() -> Outcome {
    let start = Instant::now();
    let space = ZrSpace::default();
    let [s1, s2, s3] = polygons::demo_triple();
    let shapes: Vec<ZrShape> = [&s1, &s2, &s3]
        .iter()
        .map(|c| contour_to_zr(&space, c).map(|z| z.0))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut r = rng(3);
    let (mut transport_err, mut line_err): (f64, f64) = (0.0, 0.0);
    for (a, b) in [(0, 2), (0, 1), (1, 2)] {
        let (from, to) = (&shapes[a], &shapes[b]);
        if !is_k_symmetric(from.coefficients(), 2, 1e-9)
            || !is_k_symmetric(to.coefficients(), 2, 1e-9)
        {
            return Err(format!("demo shape {a} or {b} is not two-fold symmetric"));
        }
        let opts = GeodesicOptions {
            samples: 17,
            ..Default::default()
        };
        let path =
            zr_geodesic::geodesic_between(&space, from, to, &opts).map_err(|e| e.to_string())?;
        for (t, p) in &path.samples {
            let s = t / path.length;
            let line: Vec<f64> = from
                .coefficients()
                .iter()
                .zip(to.coefficients())
                .map(|(x, y)| (1.0 - s) * x + s * y)
                .collect();
            line_err = line_err.max(max_diff(p.coefficients(), &line));
        }
        let mut c = vec![0.0; space.dim()];
        for n in (2..=12).step_by(2) {
            c[2 * n - 1] = r.random_range(-1.0..1.0) / n as f64;
            c[2 * n] = r.random_range(-1.0..1.0) / n as f64;
        }
        let w = space.project_tangent(from, &c).map_err(|e| e.to_string())?;
        let vectors = [w, path.v0.clone()];
        let moved =
            zr_transport::transport_sigma_with(&space, &path, &vectors, TransportSteps::default())
                .map_err(|e| e.to_string())?;
        for (w0, res) in vectors.iter().zip(&moved) {
            transport_err =
                transport_err.max(max_diff(w0.coefficients(), res.w_end.coefficients()));
        }
    }
    let elapsed = start.elapsed();
    check(
        transport_err <= 1e-6 && line_err <= 1e-6 && within(elapsed, 60.0),
        format!("transport vs identity {transport_err:.2e}, geodesic vs line {line_err:.2e}, {elapsed:.2?}"),
    )
}

/// Space used for the random-case criteria: enough harmonics for generic
/// non-symmetric shapes while keeping 100-case sweeps fast.
fn random_case_space() -> ZrSpace {
    ZrSpace::new(16, 128).unwrap()
}

fn random_zr_path(space: &ZrSpace, r: &mut impl Rng, horizontal: bool) -> (ZrPath, ZrShape) {
    let theta = random_shape(space, r, 6, 0.4);
    let v = if horizontal {
        random_horizontal(space, &theta, r, 6, 1.0)
    } else {
        random_tangent(space, &theta, r, 6, 1.0)
    };
    let length = r.random_range(0.3..1.0);
    let path = zr_geodesic::exp_map(space, &theta, &v, length, 64).unwrap();
    (path, theta)
}

fn random_pair(
    space: &ZrSpace,
    at: &ZrShape,
    r: &mut impl Rng,
    horizontal: bool,
) -> [ZrTangent; 2] {
    let draw = |r: &mut _| {
        if horizontal {
            random_horizontal(space, at, r, 6, 1.0)
        } else {
            random_tangent(space, at, r, 6, 1.0)
        }
    };
    [draw(r), draw(r)]
}

/// Worst inner-product drift and round-trip error over `cases` paths in a
/// contour space.
fn zr_isometry(horizontal: bool, cases: usize, seed: u64) -> Result<(f64, f64), String> {
    let space = random_case_space();
    let mut r = rng(seed);
    let (mut drift, mut round): (f64, f64) = (0.0, 0.0);
    let transport = |path: &ZrPath, ws: &[ZrTangent]| {
        if horizontal {
            zr_transport::transport_invariant_with(&space, path, ws, TransportSteps::default())
        } else {
            zr_transport::transport_sigma_with(&space, path, ws, TransportSteps::default())
        }
    };
    for _ in 0..cases {
        let (path, theta) = random_zr_path(&space, &mut r, horizontal);
        let pair = random_pair(&space, &theta, &mut r, horizontal);
        let moved = transport(&path, &pair).map_err(|e| e.to_string())?;
        let inner =
            |a: &ZrTangent, b: &ZrTangent| space.inner(a.coefficients(), b.coefficients()).unwrap();
        for (a, b) in [(0, 0), (0, 1), (1, 1)] {
            drift = drift
                .max((inner(&moved[a].w_end, &moved[b].w_end) - inner(&pair[a], &pair[b])).abs());
        }
        let back_path = zr_transport::reversed(&space, &path, 512.0).map_err(|e| e.to_string())?;
        let back = transport(&back_path, &[moved[0].w_end.clone()]).map_err(|e| e.to_string())?;
        round = round.max(tangent_distance(&back[0].w_end, &pair[0]));
    }
    Ok((drift, round))
}

fn kendall_isometry(cases: usize, seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let (mut drift, mut round): (f64, f64) = (0.0, 0.0);
    let dot = |a: &DMatrix<f64>, b: &DMatrix<f64>| a.dot(b);
    for case in 0..cases {
        let m = 2 + case % 2;
        let k = r.random_range(m + 1..=8);
        let length = r.random_range(0.3..1.2);
        let path = random_kendall_path(m, k, &mut r, length);
        let pair = [
            random_kendall_horizontal(&path.base, &mut r, 1.0),
            random_kendall_horizontal(&path.base, &mut r, 1.0),
        ];
        let moved = kendall::transport_kendall_with(&path, &pair, &Default::default())
            .expect("kendall transport");
        for (a, b) in [(0, 0), (0, 1), (1, 1)] {
            let before = dot(pair[a].matrix(), pair[b].matrix());
            let after = dot(moved[a].w_end.matrix(), moved[b].w_end.matrix());
            drift = drift.max((after - before).abs());
        }
        let back_path = kendall::geodesic_between(path.end(), &path.base, 3).expect("reverse path");
        let back = kendall::transport_kendall(&back_path, &moved[0].w_end).expect("back transport");
        round = round.max((back.w_end.matrix() - pair[0].matrix()).norm());
    }
    (drift, round)
}

fn transport_isometry() -> Outcome {
    let start = Instant::now();
    let (sd, sr) = zr_isometry(false, 100, 41)?;
    let (id, ir) = zr_isometry(true, 100, 42)?;
    let (kd, kr) = kendall_isometry(100, 43);
    let worst = [sd, sr, id, ir, kd, kr].into_iter().fold(0.0, f64::max);
    check(
        worst <= 1e-6,
        format!(
            "inner drift / round trip: sigma {sd:.1e}/{sr:.1e}, invariant {id:.1e}/{ir:.1e}, kendall {kd:.1e}/{kr:.1e}, {:.2?}",
            start.elapsed()
        ),
    )
}

fn zr_self_transport(horizontal: bool, seed: u64) -> Result<f64, String> {
    let space = random_case_space();
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (path, _) = random_zr_path(&space, &mut r, horizontal);
        let moved = zr_transport::transport(&space, &path, &path.v0).map_err(|e| e.to_string())?;
        let end = zr_geodesic::end_velocity(&space, &path, 512.0).map_err(|e| e.to_string())?;
        worst = worst.max(tangent_distance(&moved.w_end, &end));
    }
    Ok(worst)
}

fn velocity_self_transport() -> Outcome {
    let start = Instant::now();
    let sigma = zr_self_transport(false, 51)?;
    let invariant = zr_self_transport(true, 52)?;
    let mut r = rng(53);
    let mut kend: f64 = 0.0;
    for case in 0..20 {
        let m = 2 + case % 2;
        let k = r.random_range(m + 1..=8);
        let length = r.random_range(0.3..1.2);
        let path = random_kendall_path(m, k, &mut r, length);
        let moved = kendall::transport_kendall(&path, &path.v0).map_err(|e| e.to_string())?;
        let (s, c) = path.length.sin_cos();
        let end = KendallTangent::new(path.v0.matrix() * c - path.base.matrix() * s);
        kend = kend.max((moved.w_end.matrix() - end.matrix()).norm());
    }
    check(
        sigma.max(invariant).max(kend) <= 1e-6,
        format!(
            "sigma {sigma:.1e}, invariant {invariant:.1e}, kendall {kend:.1e}, {:.2?}",
            start.elapsed()
        ),
    )
}

fn quotient_correction() -> Outcome {
    let start = Instant::now();
    let space = random_case_space();
    let mut r = rng(6);
    let (mut differing, mut worst_oracle, mut smallest_gap) = (0, 0.0f64, f64::INFINITY);
    for _ in 0..20 {
        let (path, theta) = random_zr_path(&space, &mut r, true);
        if is_k_symmetric(theta.coefficients(), 2, 1e-6) {
            return Err("generator produced a symmetric shape".into());
        }
        let w = random_horizontal(&space, &theta, &mut r, 6, 1.0);
        let quotient =
            zr_transport::transport_invariant(&space, &path, &w).map_err(|e| e.to_string())?;
        let full = zr_transport::transport_sigma(&space, &path, &w).map_err(|e| e.to_string())?;
        let gap = tangent_distance(&quotient.w_end, &full.w_end);
        smallest_gap = smallest_gap.min(gap);
        if gap >= 1e-3 {
            differing += 1;
        }
        let oracle = projection_oracle(&space, &path, &w, 256);
        worst_oracle = worst_oracle.max(tangent_distance(&quotient.w_end, &oracle));
    }
    check(
        differing >= 15 && worst_oracle <= 1e-4,
        format!(
            "{differing}/20 differ by >= 1e-3 (smallest {smallest_gap:.1e}), oracle deviation {worst_oracle:.1e}, {:.2?}",
            start.elapsed()
        ),
    )
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let space = ZrSpace::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, c) in [
        ("square", polygons::unit_square()),
        ("rectangle", polygons::rectangle()),
        ("hexagon", polygons::hexagon()),
    ] {
        let (theta, placement) = contour_to_zr(&space, &c).map_err(|e| e.to_string())?;
        let back = zr_to_contour(&space, &theta, 1024, placement).map_err(|e| e.to_string())?;
        let start = c.points()[0];
        let anchored = c.translated([-start[0], -start[1]]);
        let rel = hausdorff(&anchored, &back.contour) / c.diameter();
        ok &= rel <= 0.02;
        parts.push(format!("{name} {:.2}%", 100.0 * rel));
    }
    check(
        ok,
        format!(
            "Hausdorff / diameter: {}, {:.2?}",
            parts.join(", "),
            start.elapsed()
        ),
    )
}

fn landmark_deviation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let k = a.ncols();
    let mut diameter: f64 = 0.0;
    let mut err: f64 = 0.0;
    for p in 0..k {
        err = err.max((a.column(p) - b.column(p)).norm());
        for q in 0..k {
            diameter = diameter.max((a.column(p) - a.column(q)).norm());
        }
    }
    err / diameter
}

fn cross_geometry() -> Outcome {
    let start = Instant::now();
    let space = ZrSpace::default();
    let (s1, s3) = (polygons::rectangle(), polygons::hexagon());
    let z1 = contour_to_zr(&space, &s1).map_err(|e| e.to_string())?.0;
    let z3 = contour_to_zr(&space, &s3).map_err(|e| e.to_string())?.0;
    let samples = 11;
    let opts = GeodesicOptions {
        samples,
        ..Default::default()
    };
    let zr_path =
        zr_geodesic::geodesic_between(&space, &z1, &z3, &opts).map_err(|e| e.to_string())?;
    let k1 = transfer_zr_kendall(&s1, 6).map_err(|e| e.to_string())?;
    let k3 = transfer_zr_kendall(&s3, 6).map_err(|e| e.to_string())?;
    let k_path = kendall::geodesic_between(&k1, &k3, samples).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for ((_, z), (_, k)) in zr_path.samples.iter().zip(&k_path.samples) {
        let contour =
            zr_to_contour(&space, z, 1024, Placement::default()).map_err(|e| e.to_string())?;
        let from_zr = transfer_zr_kendall(&contour.contour, 6).map_err(|e| e.to_string())?;
        let (_, aligned) = kendall::procrustes_align(k, &from_zr).map_err(|e| e.to_string())?;
        worst = worst.max(landmark_deviation(&k.landmarks(), &aligned.landmarks()));
    }
    check(
        worst <= 0.05,
        format!(
            "max landmark deviation {:.2}% of diameter over {samples} fractions, {:.2?}",
            100.0 * worst,
            start.elapsed()
        ),
    )
}

fn integrator_order() -> Outcome {
    let start = Instant::now();
    let space = random_case_space();
    let mut r = rng(9);
    let mut worst_ratio = f64::INFINITY;
    for case in 0..20 {
        let horizontal = case % 2 == 1;
        let (path, theta) = random_zr_path(&space, &mut r, horizontal);
        let w = if horizontal {
            random_horizontal(&space, &theta, &mut r, 6, 1.0)
        } else {
            random_tangent(&space, &theta, &mut r, 6, 1.0)
        };
        let drift = |steps| {
            let ws = std::slice::from_ref(&w);
            let res = if horizontal {
                zr_transport::transport_invariant_with(
                    &space,
                    &path,
                    ws,
                    TransportSteps::Fixed(steps),
                )
            } else {
                zr_transport::transport_sigma_with(&space, &path, ws, TransportSteps::Fixed(steps))
            };
            res.map(|v| v[0].norm_drift).map_err(|e| e.to_string())
        };
        let (coarse, fine) = (drift(8)?, drift(16)?);
        worst_ratio = worst_ratio.min(coarse / fine);
    }
    check(
        worst_ratio >= 4.0,
        format!(
            "smallest drift reduction {worst_ratio:.1}x over 20 cases, {:.2?}",
            start.elapsed()
        ),
    )
}

fn mu_analytic() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let rho = i as f64 / 99.0;
        let m = mu(rho, 3).map_err(|e| e.to_string())?;
        worst = worst.max((m - 0.5 * (1.0 + rho)).abs());
    }
    let mut ends: f64 = 0.0;
    for n in [3, 4, 10, 50, 201] {
        ends = ends.max((mu(0.0, n).unwrap() - 0.5).abs());
        ends = ends.max((mu(1.0, n).unwrap() - 1.0).abs());
    }
    check(
        worst <= 1e-10 && ends <= 1e-10,
        format!(
            "n=3 deviation {worst:.1e}, endpoint deviation {ends:.1e}, {:.2?}",
            start.elapsed()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("published mu values", published_mu),
        ("Kendall planar closed form vs ODE", kendall_closed_form),
        ("flat symmetric subspace", flat_subspace),
        ("transport isometry", transport_isometry),
        ("velocity self-transport", velocity_self_transport),
        ("quotient correction", quotient_correction),
        ("round-trip contour fidelity", round_trip),
        ("cross-geometry consistency", cross_geometry),
        ("integrator order", integrator_order),
        ("mu analytic check", mu_analytic),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}
