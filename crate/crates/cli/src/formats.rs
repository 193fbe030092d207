//! On-disk formats: contour CSV/JSON, shape, tangent, geodesic, transport
//! and report JSON.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use shape_transport_core::kendall::{horizontal_project_k, KendallPath};
use shape_transport_core::zr_geodesic::ZrPath;
use shape_transport_core::{
    Contour, Error as CoreError, GeodesicPath, Placement, PreShape, SpaceTag, TransportResult,
    ZrShape, ZrTangent,
};

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}, line {line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Shape {
        path: PathBuf,
        #[source]
        source: CoreError,
    },
    #[error("{}: {message}", path.display())]
    Content { path: PathBuf, message: String },
}

impl InputError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        InputError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn json(path: &Path, source: serde_json::Error) -> Self {
        InputError::Json {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn shape(path: &Path, source: CoreError) -> Self {
        InputError::Shape {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn content(path: &Path, message: impl Into<String>) -> Self {
        InputError::Content {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourFormat {
    Csv,
    Json,
}

impl ContourFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(ContourFormat::Csv),
            "json" => Some(ContourFormat::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NamedContour {
    pub name: String,
    pub contour: Contour,
}

/// File stem used to name shapes in reports.
pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContourJson {
    pub points: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// Reads a closed polygon, oriented counterclockwise.
pub fn load_contour(path: &Path, format: ContourFormat) -> Result<NamedContour, InputError> {
    let (points, name) = match format {
        ContourFormat::Csv => (read_contour_csv(path)?, None),
        ContourFormat::Json => {
            let parsed: ContourJson = read_json(path)?;
            (parsed.points, parsed.name)
        }
    };
    let contour = Contour::new(points).map_err(|e| InputError::shape(path, e))?;
    Ok(NamedContour {
        name: name.unwrap_or_else(|| stem(path)),
        contour,
    })
}

fn read_contour_csv(path: &Path) -> Result<Vec<[f64; 2]>, InputError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.len() != 2 || &header[0] != "x" || &header[1] != "y" {
        return Err(InputError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!(
                "expected header `x,y`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| InputError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if record.len() != 2 {
            return Err(bad(format!("expected 2 fields, found {}", record.len())));
        }
        let mut xy = [0.0; 2];
        for (slot, field) in xy.iter_mut().zip(record.iter()) {
            *slot = field
                .parse()
                .map_err(|_| bad(format!("`{field}` is not a number")))?;
        }
        points.push(xy);
    }
    Ok(points)
}

fn csv_error(path: &Path, e: csv::Error) -> InputError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => InputError::io(path, source),
        other => InputError::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, InputError> {
    let text = fs::read_to_string(path).map_err(|e| InputError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| InputError::json(path, e))
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes()).map_err(|e| InputError::io(path, e))?;
    Ok(())
}

/// Hex SHA-256 of the little-endian bytes of a coefficient vector.
pub fn content_hash(coeffs: &[f64]) -> String {
    let mut h = Sha256::new();
    for c in coeffs {
        h.update(c.to_le_bytes());
    }
    format!("{:x}", h.finalize())
}

fn split_coefficients(coeffs: &[f64]) -> (f64, Vec<[f64; 2]>) {
    let xy = coeffs[1..].chunks_exact(2).map(|p| [p[0], p[1]]).collect();
    (coeffs[0], xy)
}

fn join_coefficients(x0: f64, xy: &[[f64; 2]]) -> Vec<f64> {
    let mut c = Vec::with_capacity(1 + 2 * xy.len());
    c.push(x0);
    for p in xy {
        c.extend_from_slice(p);
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZrShapeJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub x0: f64,
    pub xy: Vec<[f64; 2]>,
    pub length: f64,
    pub base_angle: f64,
}

impl ZrShapeJson {
    pub fn from_shape(theta: &ZrShape, placement: Placement) -> Self {
        let (x0, xy) = split_coefficients(theta.coefficients());
        ZrShapeJson {
            n: theta.harmonics(),
            x0,
            xy,
            length: placement.length,
            base_angle: placement.base_angle,
        }
    }

    pub fn to_shape(&self) -> Result<(ZrShape, Placement), CoreError> {
        if self.xy.len() != self.n {
            return Err(CoreError::Dimension {
                expected: self.n,
                found: self.xy.len(),
            });
        }
        let theta = ZrShape::from_coefficients(join_coefficients(self.x0, &self.xy))?;
        Ok((
            theta,
            Placement {
                length: self.length,
                base_angle: self.base_angle,
            },
        ))
    }
}

/// A tangent vector with a content-hash reference to its base shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZrTangentJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub x0: f64,
    pub xy: Vec<[f64; 2]>,
    pub base: String,
    #[serde(default)]
    pub horizontal: bool,
}

impl ZrTangentJson {
    pub fn from_tangent(v: &ZrTangent, base: &ZrShape) -> Self {
        let (x0, xy) = split_coefficients(v.coefficients());
        ZrTangentJson {
            n: v.harmonics(),
            x0,
            xy,
            base: content_hash(base.coefficients()),
            horizontal: v.is_horizontal(),
        }
    }

    pub fn coefficients(&self) -> Vec<f64> {
        join_coefficients(self.x0, &self.xy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreShapeJson {
    pub m: usize,
    pub k: usize,
    /// Rows of the `m × (k-1)` matrix.
    pub mat: Vec<Vec<f64>>,
}

fn matrix_rows(mat: &DMatrix<f64>) -> Vec<Vec<f64>> {
    mat.row_iter()
        .map(|r| r.iter().copied().collect())
        .collect()
}

fn matrix_from_rows(rows: &[Vec<f64>], m: usize, cols: usize) -> Result<DMatrix<f64>, CoreError> {
    if rows.len() != m || rows.iter().any(|r| r.len() != cols) {
        return Err(CoreError::Precondition(format!(
            "expected a {m} x {cols} matrix"
        )));
    }
    Ok(DMatrix::from_fn(m, cols, |i, j| rows[i][j]))
}

impl PreShapeJson {
    pub fn from_preshape(x: &PreShape) -> Self {
        PreShapeJson {
            m: x.m(),
            k: x.k(),
            mat: matrix_rows(x.matrix()),
        }
    }

    pub fn to_preshape(&self) -> Result<PreShape, CoreError> {
        if self.k < 2 {
            return Err(CoreError::Precondition(
                "a pre-shape needs at least 2 landmarks".into(),
            ));
        }
        PreShape::from_matrix(matrix_from_rows(&self.mat, self.m, self.k - 1)?)
    }
}

/// Landmark CSV: one row of `m` coordinates per landmark, no header.
pub fn landmark_csv(x: &PreShape) -> String {
    let lm = x.landmarks();
    let mut out = String::new();
    for j in 0..lm.ncols() {
        let row: Vec<String> = lm.column(j).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShapeJson {
    Zr(ZrShapeJson),
    Kendall(PreShapeJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicJson {
    pub space: String,
    #[serde(rename = "T")]
    pub t: f64,
    pub base: ShapeJson,
    /// Unit initial velocity; Kendall matrices are flattened row by row.
    pub v0: Vec<f64>,
    /// `[t, coefficients...]` per sample.
    pub samples: Vec<Vec<f64>>,
}

/// A geodesic read back from disk.
#[derive(Debug, Clone)]
pub enum LoadedPath {
    Zr { path: ZrPath, placement: Placement },
    Kendall(KendallPath),
}

impl GeodesicJson {
    pub fn from_zr(path: &ZrPath, placement: Placement) -> Self {
        GeodesicJson {
            space: path.space.as_str().into(),
            t: path.length,
            base: ShapeJson::Zr(ZrShapeJson::from_shape(&path.base, placement)),
            v0: path.v0.coefficients().to_vec(),
            samples: path
                .samples
                .iter()
                .map(|(t, p)| {
                    std::iter::once(*t)
                        .chain(p.coefficients().iter().copied())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_kendall(path: &KendallPath) -> Self {
        let flat = |m: &DMatrix<f64>| matrix_rows(m).concat();
        GeodesicJson {
            space: path.space.as_str().into(),
            t: path.length,
            base: ShapeJson::Kendall(PreShapeJson::from_preshape(&path.base)),
            v0: flat(path.v0.matrix()),
            samples: path
                .samples
                .iter()
                .map(|(t, p)| std::iter::once(*t).chain(flat(p.matrix())).collect())
                .collect(),
        }
    }

    pub fn to_path(&self) -> Result<LoadedPath, CoreError> {
        let space = SpaceTag::parse(&self.space)
            .ok_or_else(|| CoreError::Precondition(format!("unknown space `{}`", self.space)))?;
        let samples_of = |dim: usize| -> Result<Vec<(f64, Vec<f64>)>, CoreError> {
            self.samples
                .iter()
                .map(|row| {
                    if row.len() != dim + 1 {
                        return Err(CoreError::Dimension {
                            expected: dim + 1,
                            found: row.len(),
                        });
                    }
                    Ok((row[0], row[1..].to_vec()))
                })
                .collect()
        };
        if self.samples.is_empty() {
            return Err(CoreError::Precondition(
                "a geodesic needs at least one sample".into(),
            ));
        }
        match (&self.base, space) {
            (ShapeJson::Zr(base), SpaceTag::ZrSigma | SpaceTag::ZrInvariant) => {
                let (theta, placement) = base.to_shape()?;
                let dim = theta.coefficients().len();
                if self.v0.len() != dim {
                    return Err(CoreError::Dimension {
                        expected: dim,
                        found: self.v0.len(),
                    });
                }
                let samples = samples_of(dim)?
                    .into_iter()
                    .map(|(t, c)| Ok((t, ZrShape::from_coefficients(c)?)))
                    .collect::<Result<_, CoreError>>()?;
                let path = GeodesicPath {
                    space,
                    base: theta,
                    v0: ZrTangent::from_coefficients(self.v0.clone()),
                    length: self.t,
                    samples,
                };
                Ok(LoadedPath::Zr { path, placement })
            }
            (ShapeJson::Kendall(base), SpaceTag::Kendall) => {
                let x = base.to_preshape()?;
                let (m, cols) = (x.m(), x.k() - 1);
                let unflatten = |v: &[f64]| DMatrix::from_row_slice(m, cols, v);
                if self.v0.len() != m * cols {
                    return Err(CoreError::Dimension {
                        expected: m * cols,
                        found: self.v0.len(),
                    });
                }
                let v0 = horizontal_project_k(&x, &unflatten(&self.v0))?;
                let samples = samples_of(m * cols)?
                    .into_iter()
                    .map(|(t, c)| Ok((t, PreShape::from_matrix(unflatten(&c))?)))
                    .collect::<Result<_, CoreError>>()?;
                Ok(LoadedPath::Kendall(GeodesicPath {
                    space,
                    base: x,
                    v0,
                    length: self.t,
                    samples,
                }))
            }
            _ => Err(CoreError::Precondition(format!(
                "base shape does not belong to space `{}`",
                self.space
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportResultJson {
    pub w_end: Vec<f64>,
    pub norm_drift: f64,
    pub steps: usize,
}

impl TransportResultJson {
    pub fn new<V>(result: &TransportResult<V>, coefficients: Vec<f64>) -> Self {
        TransportResultJson {
            w_end: coefficients,
            norm_drift: result.norm_drift,
            steps: result.steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub pair: [String; 2],
    pub rho: f64,
    pub mu: f64,
    pub n: usize,
    pub mu_variant: String,
}

/// Index written by `ingest`, read by `compare` to order a series.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub space: String,
    pub entries: Vec<ManifestEntry>,
    #[serde(default)]
    pub failures: Vec<ManifestFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub source: String,
    pub shape: String,
    pub time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFailure {
    pub source: String,
    pub error: String,
}
