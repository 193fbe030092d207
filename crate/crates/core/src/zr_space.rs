//! The Zahn–Roskies contour space.
//!
//! A shape is the turning function `θ(s) = x_0 + Σ x_n cos(ns) + y_n sin(ns)`
//! truncated at `N` harmonics, stored as `(x_0, x_1, y_1, …, x_N, y_N)`.
//! Points satisfy `θ(0) = 0`, i.e. `x_0 = -Σ x_n`, and the closure condition
//! `Ψ(θ) = ∫ e^{i(θ(s)+s)} ds = 0`.
//!
//! The constant `x_0` only rotates the reconstructed contour, so it is a
//! gauge: points keep it pinned by `θ(0) = 0`, tangent vectors carry
//! `x_0 = 0`. The metric on tangents is then `½ Σ (u_n v_n + ũ_n ṽ_n)`, the
//! initial-point action is an isometry, and the vertical direction is the
//! pure harmonic field `θ'`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{check_dim, Error, Result};
use crate::fourier::{self, SpectralGrid};
use crate::vector;

pub const DEFAULT_HARMONICS: usize = 100;
pub const DEFAULT_GRID: usize = 1024;

/// Closure residual accepted by [`ZrSpace::project_to_sigma`].
pub const PROJECTION_TOLERANCE: f64 = 1e-10;
pub const PROJECTION_MAX_ITER: usize = 50;
/// Below this harmonic norm a shape is treated as the circle singularity.
pub const SINGULAR_NORM: f64 = 1e-6;

/// A point of the closed-contour space Σ_ZR.
#[derive(Debug, Clone, PartialEq)]
pub struct ZrShape {
    coeffs: Vec<f64>,
}

/// A tangent vector in coefficient layout; `x_0` is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ZrTangent {
    coeffs: Vec<f64>,
    horizontal: bool,
}

/// Orthonormal basis `(W1, W2)` of the normal space at a shape.
#[derive(Debug, Clone)]
pub struct NormalFrame {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

/// Result of registering one shape's initial point against another.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    /// Shift `s0` in `[0, 2π)` such that `shift_initial_point(η, s0)` is
    /// closest to `θ`.
    pub shift: f64,
    pub distance: f64,
}

fn harmonics_of(len: usize) -> Result<usize> {
    if len < 3 || len.is_multiple_of(2) {
        return Err(Error::Degenerate(alloc::format!(
            "coefficient vector of length {len} is not of the form 2N+1 with N >= 1"
        )));
    }
    Ok((len - 1) / 2)
}

/// Sets `x_0 = -Σ x_n`, the `θ(0) = 0` normalisation.
pub(crate) fn restore_gauge(coeffs: &mut [f64]) {
    let sum: f64 = coeffs[1..].iter().step_by(2).sum();
    coeffs[0] = -sum;
}

fn metric_weight(k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        0.5
    }
}

/// `u_0 v_0 + ½ Σ (u_n v_n + ũ_n ṽ_n)`, the L² pairing `(1/2π)∫ u v`.
pub(crate) fn pairing(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .enumerate()
        .map(|(k, (a, b))| metric_weight(k) * a * b)
        .sum()
}

pub(crate) fn pairing_norm(u: &[f64]) -> f64 {
    pairing(u, u).sqrt()
}

/// Harmonic part of `u` (the `x_0` slot dropped), as a tangent-gauge vector.
pub(crate) fn harmonic_part(u: &[f64]) -> Vec<f64> {
    let mut out = u.to_vec();
    out[0] = 0.0;
    out
}

/// Norm of the harmonic part.
pub(crate) fn harmonic_norm(u: &[f64]) -> f64 {
    (0.5 * vector::dot(&u[1..], &u[1..])).sqrt()
}

/// Phase-rotates harmonic `n` by `n·s0`, which realises `θ ↦ θ(· + s0)` on
/// the non-constant part.
pub(crate) fn rotate_harmonics(coeffs: &[f64], s0: f64) -> Vec<f64> {
    let mut out = coeffs.to_vec();
    for n in 1..=(coeffs.len() - 1) / 2 {
        let (sn, cn) = (n as f64 * s0).sin_cos();
        let (x, y) = (coeffs[2 * n - 1], coeffs[2 * n]);
        out[2 * n - 1] = x * cn + y * sn;
        out[2 * n] = y * cn - x * sn;
    }
    out
}

impl ZrShape {
    /// Wraps a coefficient vector without projecting it; use
    /// [`ZrSpace::project_to_sigma`] to obtain a closed shape.
    pub fn from_coefficients(coeffs: Vec<f64>) -> Result<Self> {
        harmonics_of(coeffs.len())?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Degenerate("non-finite coefficient".into()));
        }
        Ok(ZrShape { coeffs })
    }

    /// The circle, origin of Σ_ZR.
    pub fn circle(harmonics: usize) -> Self {
        ZrShape {
            coeffs: vec![0.0; 2 * harmonics + 1],
        }
    }

    pub fn harmonics(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn x0(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn x(&self, n: usize) -> f64 {
        self.coeffs[2 * n - 1]
    }

    pub fn y(&self, n: usize) -> f64 {
        self.coeffs[2 * n]
    }

    /// `θ(s)` of the truncated series.
    pub fn evaluate(&self, s: f64) -> f64 {
        fourier::evaluate(&self.coeffs, s)
    }

    /// `|x_0 + Σ x_n|`, zero on S_ZR.
    pub fn gauge_residual(&self) -> f64 {
        let sum: f64 = self.coeffs[1..].iter().step_by(2).sum();
        (self.coeffs[0] + sum).abs()
    }

    /// Norm of the non-constant part, `‖θ - x_0‖`.
    pub fn harmonic_norm(&self) -> f64 {
        harmonic_norm(&self.coeffs)
    }

    /// Tangent-gauge displacement `other - self`.
    pub fn displacement_to(&self, other: &ZrShape) -> ZrTangent {
        ZrTangent::from_coefficients(vector::sub(&other.coeffs, &self.coeffs))
    }
}

impl ZrTangent {
    /// Wraps a raw vector; the `x_0` slot is cleared.
    pub fn from_coefficients(mut coeffs: Vec<f64>) -> Self {
        coeffs[0] = 0.0;
        ZrTangent {
            coeffs,
            horizontal: false,
        }
    }

    pub fn zero(harmonics: usize) -> Self {
        ZrTangent {
            coeffs: vec![0.0; 2 * harmonics + 1],
            horizontal: false,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn harmonics(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    pub fn is_horizontal(&self) -> bool {
        self.horizontal
    }

    pub fn norm(&self) -> f64 {
        pairing_norm(&self.coeffs)
    }

    pub fn scaled(&self, alpha: f64) -> ZrTangent {
        ZrTangent {
            coeffs: vector::scaled(alpha, &self.coeffs),
            horizontal: self.horizontal,
        }
    }

    pub(crate) fn with_flag(coeffs: Vec<f64>, horizontal: bool) -> Self {
        let mut t = ZrTangent::from_coefficients(coeffs);
        t.horizontal = horizontal;
        t
    }
}

/// `θ ↦ θ(· + s0) - θ(s0)`: moves the initial point of the contour forward
/// by the parameter `s0`.
pub fn shift_initial_point(theta: &ZrShape, s0: f64) -> ZrShape {
    let mut coeffs = rotate_harmonics(&theta.coeffs, s0);
    restore_gauge(&mut coeffs);
    ZrShape { coeffs }
}

/// The differential of [`shift_initial_point`] acting on a tangent vector.
pub fn shift_tangent(v: &ZrTangent, s0: f64) -> ZrTangent {
    ZrTangent::with_flag(rotate_harmonics(&v.coeffs, s0), v.horizontal)
}

/// True when every harmonic `n` with `n mod k != 0` is below `tol`
/// (k-fold rotational symmetry of the contour).
pub fn is_k_symmetric(coeffs: &[f64], k: usize, tol: f64) -> bool {
    assert!(k >= 2, "symmetry order must be at least 2");
    (1..=(coeffs.len() - 1) / 2)
        .filter(|n| n % k != 0)
        .all(|n| coeffs[2 * n - 1].abs() <= tol && coeffs[2 * n].abs() <= tol)
}

/// Numerical context for Σ_ZR: truncation order `N` and the quadrature grid.
#[derive(Debug, Clone)]
pub struct ZrSpace {
    grid: SpectralGrid,
}

impl Default for ZrSpace {
    fn default() -> Self {
        ZrSpace::new(DEFAULT_HARMONICS, DEFAULT_GRID).expect("default grid is valid")
    }
}

impl ZrSpace {
    pub fn new(harmonics: usize, grid_size: usize) -> Result<Self> {
        Ok(ZrSpace {
            grid: SpectralGrid::new(harmonics, grid_size)?,
        })
    }

    pub fn harmonics(&self) -> usize {
        self.grid.harmonics()
    }

    /// Coefficient dimension `2N + 1`.
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn grid_size(&self) -> usize {
        self.grid.size()
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        check_dim(self.dim(), v.len())
    }

    /// The L² inner product in coefficient form.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(pairing(u, v))
    }

    /// Geodesic-free distance between two shapes: the norm of the harmonic
    /// part of their difference.
    pub fn distance(&self, a: &ZrShape, b: &ZrShape) -> f64 {
        let d = vector::sub(&a.coeffs, &b.coeffs);
        harmonic_norm(&d)
    }

    /// `Ψ(θ) = ∫ e^{i(θ(s)+s)} ds` by the trapezoid rule on the grid.
    pub fn closure_map(&self, theta: &ZrShape) -> Result<Complex64> {
        self.check(&theta.coeffs)?;
        Ok(self.closure_of(&theta.coeffs))
    }

    pub(crate) fn closure_of(&self, coeffs: &[f64]) -> Complex64 {
        let samples = self.grid.synthesize(coeffs);
        let sum: Complex64 = samples
            .iter()
            .enumerate()
            .map(|(j, t)| Complex64::from_polar(1.0, t + self.grid.node(j)))
            .sum();
        sum * (2.0 * PI / self.grid.size() as f64)
    }

    /// `|Ψ(θ)|`.
    pub fn closure_residual(&self, theta: &ZrShape) -> f64 {
        self.closure_of(&theta.coeffs).norm()
    }

    /// Orthonormal normal frame built from `V1 = cos(θ+s)`, `V2 = sin(θ+s)`.
    pub fn normal_frame(&self, theta: &ZrShape) -> Result<NormalFrame> {
        self.check(&theta.coeffs)?;
        self.frame_of(&theta.coeffs)
    }

    /// Frame at an arbitrary coefficient vector (used off the manifold by
    /// the integrators' difference quotients).
    pub(crate) fn frame_of(&self, coeffs: &[f64]) -> Result<NormalFrame> {
        let spectrum = self.grid.phase_spectrum(coeffs);
        frame_from(spectrum.cos, spectrum.sin)
    }

    /// Projects a raw coefficient vector onto Σ_ZR: `x_0` is reset to
    /// `-Σ x_n`, then Gauss–Newton with minimal-norm steps drives `Ψ` to zero.
    pub fn project_to_sigma(&self, raw: &[f64]) -> Result<ZrShape> {
        self.check(raw)?;
        if raw.iter().any(|c| !c.is_finite()) {
            return Err(Error::Degenerate("non-finite coefficient".into()));
        }
        let mut coeffs = raw.to_vec();
        restore_gauge(&mut coeffs);
        let mut history = Vec::new();
        let mut spectrum = self.grid.phase_spectrum(&coeffs);
        for _ in 0..=PROJECTION_MAX_ITER {
            let residual = spectrum.closure.norm();
            history.push(residual);
            if residual <= PROJECTION_TOLERANCE {
                return Ok(ZrShape { coeffs });
            }
            if history.len() > PROJECTION_MAX_ITER {
                break;
            }
            let step = newton_step(&spectrum)?;
            // halve until the residual decreases; far from Σ_ZR the full
            // Newton step can overshoot
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let mut trial = vector::add_scaled(&coeffs, alpha, &step);
                restore_gauge(&mut trial);
                let trial_spectrum = self.grid.phase_spectrum(&trial);
                if trial_spectrum.closure.norm() < residual {
                    coeffs = trial;
                    spectrum = trial_spectrum;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Err(Error::NonConvergence {
            what: "closure projection",
            residual: *history.last().unwrap_or(&f64::NAN),
            history,
        })
    }

    /// Orthogonal projection onto `T_θ Σ_ZR` in tangent gauge.
    pub fn project_tangent(&self, theta: &ZrShape, v: &[f64]) -> Result<ZrTangent> {
        self.check(&theta.coeffs)?;
        self.check(v)?;
        let frame = self.frame_of(&theta.coeffs)?;
        Ok(ZrTangent::from_coefficients(frame.remove_normal(v)))
    }

    /// Unit vertical direction `θ'/‖θ'‖` of the initial-point action.
    pub fn vertical_direction(&self, theta: &ZrShape) -> Result<ZrTangent> {
        self.check(&theta.coeffs)?;
        vertical_of(&theta.coeffs).map(|u| ZrTangent::with_flag(u, false))
    }

    /// Removes the component along the vertical direction.
    pub fn horizontal_project(&self, theta: &ZrShape, v: &ZrTangent) -> Result<ZrTangent> {
        self.check(&theta.coeffs)?;
        self.check(&v.coeffs)?;
        let u = vertical_of(&theta.coeffs)?;
        let mut out = harmonic_part(&v.coeffs);
        vector::axpy(-pairing(&out, &u), &u, &mut out);
        Ok(ZrTangent::with_flag(out, true))
    }

    /// Tangent projection followed by removal of the vertical component,
    /// i.e. the orthogonal projector onto the horizontal space.
    pub(crate) fn project_horizontal_tangent(&self, coeffs: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let frame = self.frame_of(coeffs)?;
        let u = frame.orthogonalised_vertical(coeffs)?;
        let mut out = frame.remove_normal(v);
        vector::axpy(-pairing(&out, &u), &u, &mut out);
        Ok(out)
    }

    /// Registers `eta` against `theta` over the initial-point action:
    /// a search over the `M`-point grid, then golden-section and Newton
    /// refinement of the best few peaks.
    pub fn align_initial_point(&self, theta: &ZrShape, eta: &ZrShape) -> Result<Alignment> {
        self.check(&theta.coeffs)?;
        self.check(&eta.coeffs)?;
        if theta.harmonic_norm() < SINGULAR_NORM || eta.harmonic_norm() < SINGULAR_NORM {
            return Err(Error::SingularShape(
                "initial-point registration of a circle-like shape",
            ));
        }
        // correlation f(s) = Σ <rot_{ns}(η_n), θ_n> is itself a trig polynomial
        let n_max = self.harmonics();
        let mut corr = vec![0.0; self.dim()];
        for n in 1..=n_max {
            let (ex, ey) = (eta.x(n), eta.y(n));
            let (tx, ty) = (theta.x(n), theta.y(n));
            corr[2 * n - 1] = ex * tx + ey * ty;
            corr[2 * n] = ey * tx - ex * ty;
        }
        let samples = self.grid.synthesize(&corr);
        let m = samples.len();
        // refine the strongest grid peaks: two near-equal optima can swap
        // order between the grid and the continuum
        let mut peaks: Vec<usize> = (0..m)
            .filter(|&j| {
                samples[j] >= samples[(j + m - 1) % m] && samples[j] >= samples[(j + 1) % m]
            })
            .collect();
        peaks.sort_by(|&a, &b| samples[b].total_cmp(&samples[a]));
        peaks.truncate(4);
        let h = 2.0 * PI / self.grid_size() as f64;
        let f = |s: f64| -fourier::evaluate(&corr, s);
        let refine = |center: f64| {
            let mut s = golden_section(f, center - h, center + h, 1e-8);
            // Newton steps on f' sharpen the optimum beyond the bracket tolerance
            for _ in 0..3 {
                let (mut d1, mut d2) = (0.0, 0.0);
                for n in 1..=n_max {
                    let nf = n as f64;
                    let (sn, cn) = (nf * s).sin_cos();
                    let (a, b) = (corr[2 * n - 1], corr[2 * n]);
                    d1 += nf * (-a * sn + b * cn);
                    d2 += -nf * nf * (a * cn + b * sn);
                }
                if d2 < 0.0 {
                    let step = d1 / d2;
                    if step.abs() < h {
                        s -= step;
                    }
                }
            }
            s
        };
        let s = peaks
            .iter()
            .map(|&j| refine(self.grid.node(j)))
            .min_by(|&a, &b| f(a).total_cmp(&f(b)))
            .unwrap_or(0.0);
        let shift = num_traits::Euclid::rem_euclid(&s, &(2.0 * PI));
        let distance = self.distance(theta, &shift_initial_point(eta, shift));
        Ok(Alignment { shift, distance })
    }

    /// Zeroes all harmonics not divisible by `k` and re-projects.
    pub fn project_k_symmetric(&self, theta: &ZrShape, k: usize) -> Result<ZrShape> {
        if k < 2 {
            return Err(Error::Precondition(
                "symmetry order must be at least 2".into(),
            ));
        }
        self.check(&theta.coeffs)?;
        let mut coeffs = theta.coeffs.clone();
        for n in (1..=self.harmonics()).filter(|n| n % k != 0) {
            coeffs[2 * n - 1] = 0.0;
            coeffs[2 * n] = 0.0;
        }
        restore_gauge(&mut coeffs);
        self.project_to_sigma(&coeffs)
    }
}

fn frame_from(mut v1: Vec<f64>, mut v2: Vec<f64>) -> Result<NormalFrame> {
    v1[0] = 0.0;
    v2[0] = 0.0;
    let n1 = pairing_norm(&v1);
    if n1 <= 1e-12 {
        return Err(Error::DegenerateFrame(n1));
    }
    vector::scale(1.0 / n1, &mut v1);
    let c = pairing(&v2, &v1);
    vector::axpy(-c, &v1, &mut v2);
    let n2 = pairing_norm(&v2);
    if n2 <= 1e-12 {
        return Err(Error::DegenerateFrame(n2));
    }
    vector::scale(1.0 / n2, &mut v2);
    Ok(NormalFrame { w1: v1, w2: v2 })
}

fn newton_step(spectrum: &fourier::PhaseSpectrum) -> Result<Vec<f64>> {
    // dΨ[Δ] = 2π(-<Δ,V2> + i<Δ,V1>); solve for Δ in span(V1, V2)
    let v1 = harmonic_part(&spectrum.cos);
    let v2 = harmonic_part(&spectrum.sin);
    let g11 = pairing(&v1, &v1);
    let g12 = pairing(&v1, &v2);
    let g22 = pairing(&v2, &v2);
    let det = g11 * g22 - g12 * g12;
    if det.abs() <= 1e-24 {
        return Err(Error::DegenerateFrame(det));
    }
    let psi = spectrum.closure / (2.0 * PI);
    let r1 = -psi.im; // target <Δ,V1>
    let r2 = psi.re; // target <Δ,V2>
    let a = (g22 * r1 - g12 * r2) / det;
    let b = (g11 * r2 - g12 * r1) / det;
    let mut step = vector::scaled(a, &v1);
    vector::axpy(b, &v2, &mut step);
    Ok(step)
}

pub(crate) fn vertical_of(coeffs: &[f64]) -> Result<Vec<f64>> {
    let harmonics = (coeffs.len() - 1) / 2;
    let mut u = vec![0.0; coeffs.len()];
    let mut weight = 0.0;
    for n in 1..=harmonics {
        let nf = n as f64;
        let (x, y) = (coeffs[2 * n - 1], coeffs[2 * n]);
        u[2 * n - 1] = nf * y;
        u[2 * n] = -nf * x;
        weight += nf * nf * (x * x + y * y);
    }
    if weight <= 1e-18 {
        return Err(Error::SingularShape("the circle has no vertical direction"));
    }
    vector::scale((2.0 / weight).sqrt(), &mut u);
    Ok(u)
}

impl NormalFrame {
    /// `v - <v,W1>W1 - <v,W2>W2` in tangent gauge.
    pub fn remove_normal(&self, v: &[f64]) -> Vec<f64> {
        let mut out = harmonic_part(v);
        let c1 = pairing(&out, &self.w1);
        let c2 = pairing(&out, &self.w2);
        vector::axpy(-c1, &self.w1, &mut out);
        vector::axpy(-c2, &self.w2, &mut out);
        out
    }

    /// Vertical direction with its (quadrature-level) normal components
    /// removed and renormalised.
    pub(crate) fn orthogonalised_vertical(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let mut u = self.remove_normal(&vertical_of(coeffs)?);
        let n = pairing_norm(&u);
        vector::scale(1.0 / n, &mut u);
        Ok(u)
    }
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub(crate) fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let ratio = 0.5 * (5.0.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
