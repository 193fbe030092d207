use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use shape_transport::formats::{
    read_json, GeodesicJson, LoadedPath, Manifest, ReportJson, ZrShapeJson,
};
use shape_transport::shapes::CLOSURE_TOLERANCE;
use shape_transport_core::contour::contour_to_zr;
use shape_transport_core::zr_geodesic;
use shape_transport_core::{polygons, Contour, Placement, ZrShape, ZrSpace, ZrTangent};

/// Harmonics used to keep the pipeline tests quick.
const N: &str = "24";

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shape-transport"));
    for (key, _) in std::env::vars() {
        if key.starts_with("SHAPE_TRANSPORT_") {
            cmd.env_remove(key);
        }
    }
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_csv(dir: &Path, name: &str, c: &Contour) -> PathBuf {
    let mut text = String::from("x,y\n");
    for p in c.points() {
        text.push_str(&format!("{},{}\n", p[0], p[1]));
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn regular_polygon(sides: usize, radius: f64) -> Contour {
    let pts = (0..sides)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / sides as f64;
            [radius * a.cos(), radius * a.sin()]
        })
        .collect();
    Contour::new(pts).unwrap()
}

fn glyphs(svg: &Path) -> usize {
    fs::read_to_string(svg).unwrap().matches("<polygon").count()
}

#[test]
fn ingest_writes_a_shape_per_contour_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let inputs: Vec<PathBuf> = (0..5)
        .map(|i| {
            write_csv(
                dir.path(),
                &format!("c{i}.csv"),
                &regular_polygon(4 + i, 1.0),
            )
        })
        .collect();
    let mut args = vec!["--n-harmonics", N, "--out", s(&out), "ingest"];
    args.extend(inputs.iter().map(|p| s(p)));
    let res = run(&args);
    assert!(res.status.success(), "{}", stderr(&res));
    let manifest: Manifest = read_json(&out.join("manifest.json")).unwrap();
    assert_eq!(manifest.entries.len(), 5);
    assert!(manifest.failures.is_empty());
    for (i, e) in manifest.entries.iter().enumerate() {
        assert_eq!(e.time, i as f64);
        assert!(e.closure_residual.unwrap() < CLOSURE_TOLERANCE);
        assert!(out.join(&e.shape).exists());
    }
}

#[test]
fn ingest_reports_a_corrupt_file_and_keeps_the_rest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut inputs: Vec<PathBuf> = (0..4)
        .map(|i| {
            write_csv(
                dir.path(),
                &format!("c{i}.csv"),
                &regular_polygon(5 + i, 1.0),
            )
        })
        .collect();
    let bad = dir.path().join("broken.csv");
    fs::write(&bad, "x,y\n0,0\n1,zero\n1,1\n").unwrap();
    inputs.insert(2, bad);
    let mut args = vec!["--n-harmonics", N, "--out", s(&out), "ingest"];
    args.extend(inputs.iter().map(|p| s(p)));
    let res = run(&args);
    assert_eq!(res.status.code(), Some(1));
    let err = stderr(&res);
    assert!(
        err.contains("broken.csv") && err.contains("line 3"),
        "{err}"
    );
    let shapes = fs::read_dir(&out)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .ends_with(".shape.json")
        })
        .count();
    assert_eq!(shapes, 4);
    let manifest: Manifest = read_json(&out.join("manifest.json")).unwrap();
    assert_eq!(manifest.failures.len(), 1);
}

#[test]
fn ingest_without_inputs_is_a_usage_error() {
    let res = run(&["ingest"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("Usage"));
}

#[test]
fn help_exits_cleanly() {
    let res = run(&["--help"]);
    assert_eq!(res.status.code(), Some(0));
    assert!(stdout(&res).contains("transplant"));
}

#[test]
fn geodesic_square_to_hexagon_draws_seven_frames() {
    let dir = tempfile::tempdir().unwrap();
    let sq = write_csv(dir.path(), "square.csv", &polygons::unit_square());
    let hex = write_csv(dir.path(), "hexagon.csv", &polygons::hexagon());
    let out = dir.path().join("out");
    let res = run(&[
        "--n-harmonics",
        N,
        "--out",
        s(&out),
        "geodesic",
        s(&sq),
        s(&hex),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let svg = out.join("geodesic.svg");
    assert_eq!(glyphs(&svg), 7);
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches(r#"class="bullet""#).count(), 7);
    assert!(!text.contains("href"));
    let json: GeodesicJson = read_json(&out.join("geodesic.json")).unwrap();
    assert_eq!(json.space, "zr_sigma");
    assert!(matches!(json.to_path().unwrap(), LoadedPath::Zr { .. }));
}

#[test]
fn identical_shapes_draw_a_single_frame() {
    let dir = tempfile::tempdir().unwrap();
    let hex = write_csv(dir.path(), "hexagon.csv", &polygons::hexagon());
    let out = dir.path().join("out");
    let res = run(&[
        "--n-harmonics",
        N,
        "--out",
        s(&out),
        "geodesic",
        s(&hex),
        s(&hex),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    assert_eq!(glyphs(&out.join("geodesic.svg")), 1);
    let json: GeodesicJson = read_json(&out.join("geodesic.json")).unwrap();
    assert_eq!(json.t, 0.0);
}

#[test]
fn open_curve_shape_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let n = 24;
    let mut open = ZrShape::circle(n).into_coefficients();
    open[1] = 0.3;
    let json = ZrShapeJson::from_shape(
        &ZrShape::from_coefficients(open).unwrap(),
        Placement::default(),
    );
    let path = dir.path().join("open.json");
    fs::write(&path, serde_json::to_string(&json).unwrap()).unwrap();
    let hex = write_csv(dir.path(), "hexagon.csv", &polygons::hexagon());
    let out = dir.path().join("out");
    let res = run(&[
        "--n-harmonics",
        N,
        "--out",
        s(&out),
        "geodesic",
        s(&path),
        s(&hex),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("not closed"), "{}", stderr(&res));
}

/// Ingests the demo rectangles and hexagon, returning their shape files.
fn demo_shapes(dir: &Path, out: &Path) -> [PathBuf; 3] {
    let [c1, c2, c3] = polygons::demo_triple();
    let inputs = [
        write_csv(dir, "sigma1.csv", &c1),
        write_csv(dir, "sigma2.csv", &c2),
        write_csv(dir, "sigma3.csv", &c3),
    ];
    let res = run(&[
        "--n-harmonics",
        N,
        "--out",
        s(out),
        "ingest",
        s(&inputs[0]),
        s(&inputs[1]),
        s(&inputs[2]),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    ["sigma1", "sigma2", "sigma3"].map(|n| out.join(format!("{n}.shape.json")))
}

fn load_zr(path: &Path) -> ZrShape {
    let json: ZrShapeJson = read_json(path).unwrap();
    json.to_shape().unwrap().0
}

#[test]
fn transplant_onto_its_own_base_replays_the_geodesic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let [s1, _, s3] = demo_shapes(dir.path(), &out);
    let res = run(&[
        "--n-harmonics",
        N,
        "--out",
        s(&out),
        "geodesic",
        s(&s1),
        s(&s3),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let geo = out.join("geodesic.json");
    let json: GeodesicJson = read_json(&geo).unwrap();
    let times: Vec<String> = (0..json.samples.len()).map(|i| i.to_string()).collect();
    let res = run(&[
        "--n-harmonics",
        N,
        "--out",
        s(&out),
        "transplant",
        s(&geo),
        s(&s1),
        "--times",
        &times.join(","),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    for (i, row) in json.samples.iter().enumerate() {
        let got = load_zr(&out.join(format!("transplant_{i:03}.shape.json")));
        let gap = got
            .coefficients()
            .iter()
            .zip(&row[1..])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(gap < 1e-6, "sample {i}: {gap}");
    }
    assert!(out.join("transplant.transport.json").exists());
    assert!(out.join("transplant.report.json").exists());
}

#[test]
fn rectangle_growth_carries_over_as_a_translation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let [s1, s2, s3] = demo_shapes(dir.path(), &out);
    let res = run(&[
        "--n-harmonics",
        N,
        "--out",
        s(&out),
        "geodesic",
        s(&s1),
        s(&s3),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let res = run(&[
        "--n-harmonics",
        N,
        "--out",
        s(&out),
        "transplant",
        s(&out.join("geodesic.json")),
        s(&s2),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let space = ZrSpace::new(24, 1024).unwrap();
    let (a, b, c) = (load_zr(&s1), load_zr(&s2), load_zr(&s3));
    for i in 0..7 {
        let t = i as f64 / 6.0;
        let raw: Vec<f64> = (0..a.coefficients().len())
            .map(|j| b.coefficients()[j] + t * (c.coefficients()[j] - a.coefficients()[j]))
            .collect();
        let oracle = space.project_to_sigma(&raw).unwrap();
        let got = load_zr(&out.join(format!("transplant_{i:03}.shape.json")));
        assert!(space.distance(&got, &oracle) < 1e-5, "t = {t}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("transplant.report.json")).unwrap())
            .unwrap();
    assert_eq!(report["shapes"].as_array().unwrap().len(), 7);
}

#[test]
fn kendall_pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let [c1, c2, c3] = polygons::demo_triple();
    let files = [
        write_csv(dir.path(), "a.csv", &c1),
        write_csv(dir.path(), "b.csv", &c2),
        write_csv(dir.path(), "c.csv", &c3),
    ];
    let base = ["--space", "kendall", "--out", s(&out)];
    let res = bin()
        .args(base)
        .args(["geodesic", s(&files[0]), s(&files[2])])
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", stderr(&res));
    assert_eq!(glyphs(&out.join("geodesic.svg")), 7);
    let res = bin()
        .args(base)
        .args(["transplant", s(&out.join("geodesic.json")), s(&files[1])])
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", stderr(&res));
    assert!(out.join("transplant_006.preshape.json").exists());
    assert_eq!(glyphs(&out.join("transplant.svg")), 7);
}

/// A series directory holding the given shapes at times 0, 1, ...
fn series(dir: &Path, name: &str, shapes: &[ZrShape]) -> PathBuf {
    let path = dir.join(name);
    fs::create_dir_all(&path).unwrap();
    for (i, theta) in shapes.iter().enumerate() {
        let json = ZrShapeJson::from_shape(theta, Placement::default());
        fs::write(
            path.join(format!("{i:02}.json")),
            serde_json::to_string(&json).unwrap(),
        )
        .unwrap();
    }
    path
}

/// Shapes along the geodesic from the circle in direction `v`.
fn growth(space: &ZrSpace, v: &ZrTangent) -> Vec<ZrShape> {
    let circle = ZrShape::circle(space.harmonics());
    zr_geodesic::shoot(space, &circle, v, &[0.0, 0.5, 1.0], 256.0).unwrap()
}

fn unit_harmonic(space: &ZrSpace, slot: usize, size: f64) -> ZrTangent {
    let mut c = vec![0.0; space.dim()];
    c[slot] = size;
    ZrTangent::from_coefficients(c)
}

#[test]
fn identical_series_are_fully_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let space = ZrSpace::new(24, 1024).unwrap();
    let a = series(
        dir.path(),
        "a",
        &growth(&space, &unit_harmonic(&space, 3, 0.2)),
    );
    let out = dir.path().join("out");
    let res = run(&[
        "--n-harmonics",
        N,
        "--out",
        s(&out),
        "compare",
        s(&a),
        s(&a),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let report: ReportJson = read_json(&out.join("report.json")).unwrap();
    assert!((report.rho - 1.0).abs() < 1e-9);
    assert!((report.mu - 1.0).abs() < 1e-9);
    assert_eq!(report.n, 49);
}

#[test]
fn orthogonal_series_sit_at_the_median() {
    let dir = tempfile::tempdir().unwrap();
    let space = ZrSpace::new(100, 1024).unwrap();
    // x_2 and y_3 directions
    let a = series(
        dir.path(),
        "a",
        &growth(&space, &unit_harmonic(&space, 3, 0.2)),
    );
    let b = series(
        dir.path(),
        "b",
        &growth(&space, &unit_harmonic(&space, 6, 0.2)),
    );
    let out = dir.path().join("out");
    let res = run(&["--out", s(&out), "compare", s(&a), s(&b)]);
    assert!(res.status.success(), "{}", stderr(&res));
    let report: ReportJson = read_json(&out.join("report.json")).unwrap();
    assert_eq!(report.n, 201);
    assert!(report.rho < 1e-6, "{}", report.rho);
    assert!((report.mu - 0.5).abs() < 0.01, "{}", report.mu);
    assert_eq!(report.pair, ["a".to_string(), "b".to_string()]);
}

#[test]
fn transplanted_series_is_parallel_to_its_source() {
    let dir = tempfile::tempdir().unwrap();
    let space = ZrSpace::new(24, 1024).unwrap();
    let v =
        ZrTangent::from_coefficients((0..space.dim()).map(|j| 0.1 / (1.0 + j as f64)).collect());
    let v = space
        .project_tangent(&ZrShape::circle(24), v.coefficients())
        .unwrap();
    let a = series(dir.path(), "a", &growth(&space, &v));
    let hex = write_csv(dir.path(), "hexagon.csv", &polygons::hexagon());
    let b = dir.path().join("b");
    let res = run(&[
        "--n-harmonics",
        N,
        "--out",
        s(&b),
        "geodesic",
        s(&a.join("00.json")),
        s(&a.join("02.json")),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let res = run(&[
        "--n-harmonics",
        N,
        "--out",
        s(&b),
        "transplant",
        s(&b.join("geodesic.json")),
        s(&hex),
        "--times",
        "0,1,2",
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let out = dir.path().join("out");
    let res = run(&[
        "--n-harmonics",
        N,
        "--out",
        s(&out),
        "compare",
        s(&a),
        s(&b),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let report: ReportJson = read_json(&out.join("report.json")).unwrap();
    assert!(report.rho >= 0.999, "{}", report.rho);
}

#[test]
fn compare_needs_two_shapes_per_series() {
    let dir = tempfile::tempdir().unwrap();
    let space = ZrSpace::new(24, 1024).unwrap();
    let a = series(dir.path(), "a", &[ZrShape::circle(space.harmonics())]);
    let res = run(&[
        "--n-harmonics",
        N,
        "--out",
        s(&dir.path().join("out")),
        "compare",
        s(&a),
        s(&a),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("at least two"));
}

#[test]
fn table_demo_prints_both_variants() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&["--out", s(dir.path()), "demo", "table1"]);
    assert!(res.status.success(), "{}", stderr(&res));
    let text = stdout(&res);
    let arccos = text.lines().find(|l| l.starts_with("arccos")).unwrap();
    let values: Vec<f64> = arccos
        .split_whitespace()
        .skip(1)
        .map(|v| v.parse().unwrap())
        .collect();
    for (got, want) in values.iter().zip([0.99, 0.96, 1.0, 0.88]) {
        assert!((got - want).abs() <= 0.015);
    }
    assert!(text.lines().any(|l| l.starts_with("sqrt_arccos")));
}

#[test]
fn environment_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from-env");
    let input = write_csv(dir.path(), "hexagon.csv", &polygons::hexagon());
    let res = bin()
        .env("SHAPE_TRANSPORT_N_HARMONICS", "12")
        .env("SHAPE_TRANSPORT_OUT", &out)
        .args(["ingest", s(&input)])
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", stderr(&res));
    let json: ZrShapeJson = read_json(&out.join("hexagon.shape.json")).unwrap();
    assert_eq!(json.n, 12);
}

#[test]
fn emitted_json_reads_back_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let [s1, _, s3] = demo_shapes(dir.path(), &out);
    let space = ZrSpace::new(24, 1024).unwrap();
    let (direct, _) = contour_to_zr(&space, &polygons::rectangle()).unwrap();
    let stored = load_zr(&s1);
    assert_eq!(stored.coefficients(), direct.coefficients());

    let res = run(&[
        "--n-harmonics",
        N,
        "--out",
        s(&out),
        "geodesic",
        s(&s1),
        s(&s3),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let json: GeodesicJson = read_json(&out.join("geodesic.json")).unwrap();
    let LoadedPath::Zr { path, placement } = json.to_path().unwrap() else {
        panic!("expected a contour-space geodesic");
    };
    assert_eq!(GeodesicJson::from_zr(&path, placement), json);
}
