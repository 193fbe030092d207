//! Geodesics on Σ_ZR and horizontal geodesics for the initial-point
//! quotient.
//!
//! The exponential map integrates `p' = v`, `v' = -Σ_j <v, DW_j[v]> W_j`
//! with classical RK4, re-projecting the position onto Σ_ZR and the velocity
//! onto the tangent space after every step. Point-to-point geodesics come
//! from path straightening followed by a shooting polish, so that the
//! returned samples are exactly what the exponential map produces.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geodesic::{GeodesicPath, SpaceTag};
use crate::vector;
use crate::zr_space::{
    harmonic_part, pairing, pairing_norm, shift_initial_point, vertical_of, ZrShape, ZrSpace,
    ZrTangent, SINGULAR_NORM,
};

pub type ZrPath = GeodesicPath<ZrShape, ZrTangent>;

pub const DEFAULT_SAMPLES: usize = 33;
pub const DEFAULT_STEPS_PER_UNIT: f64 = 256.0;

/// Relative step of the directional difference quotients of the frame.
const FRAME_DIFF_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicOptions {
    /// Number of samples `P` on the returned path.
    pub samples: usize,
    /// RK4 steps per unit of path length.
    pub steps_per_unit: f64,
    pub max_iterations: usize,
    /// Stop path straightening when the relative energy decrease falls
    /// below this.
    pub energy_tolerance: f64,
    pub max_shooting: usize,
    /// Endpoint residual accepted by the shooting polish.
    pub shooting_tolerance: f64,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions {
            samples: DEFAULT_SAMPLES,
            steps_per_unit: DEFAULT_STEPS_PER_UNIT,
            max_iterations: 500,
            energy_tolerance: 1e-10,
            max_shooting: 60,
            shooting_tolerance: 1e-11,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Sigma,
    /// Velocity and carried vectors kept horizontal; carried vectors follow
    /// the quotient transport equation.
    Horizontal,
}

impl Mode {
    pub(crate) fn of(tag: SpaceTag) -> Mode {
        match tag {
            SpaceTag::ZrInvariant => Mode::Horizontal,
            _ => Mode::Sigma,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Stepping {
    /// Steps per unit of `speed × time`.
    PerUnit(f64),
    /// Fixed total number of steps over the whole time span.
    Total(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct FlowResult {
    /// Positions at the requested times.
    pub positions: Vec<Vec<f64>>,
    pub velocity: Vec<f64>,
    pub carried: Vec<Vec<f64>>,
    /// `|‖w0‖ Π r_k - ‖w0‖|` per carried vector, `r_k` the norm ratio of
    /// step `k` before correction.
    pub drift: Vec<f64>,
    /// Largest normal component of a carried vector before each
    /// re-projection.
    pub residuals: Vec<f64>,
    pub steps: usize,
}

/// Coefficient pattern of `θ'`: `(x_n, y_n) ↦ n (y_n, -x_n)`.
pub(crate) fn derivative_pattern(c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; c.len()];
    for n in 1..=(c.len() - 1) / 2 {
        let nf = n as f64;
        out[2 * n - 1] = nf * c[2 * n];
        out[2 * n] = -nf * c[2 * n - 1];
    }
    out
}

/// Coefficient pattern of `θ''`: `(x_n, y_n) ↦ -n² (x_n, y_n)`.
pub(crate) fn second_derivative_pattern(c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; c.len()];
    for n in 1..=(c.len() - 1) / 2 {
        let n2 = (n * n) as f64;
        out[2 * n - 1] = -n2 * c[2 * n - 1];
        out[2 * n] = -n2 * c[2 * n];
    }
    out
}

pub(crate) struct Integrator<'a> {
    pub space: &'a ZrSpace,
    pub mode: Mode,
}

impl Integrator<'_> {
    /// Right-hand side for the state `[p, v, W_1, …]`.
    fn rhs(&self, state: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let (p, v) = (&state[0], &state[1]);
        let mut out = Vec::with_capacity(state.len());
        out.push(harmonic_part(v));
        let speed = pairing_norm(v);
        if speed == 0.0 {
            out.extend(state[1..].iter().map(|w| vec![0.0; w.len()]));
            return Ok(out);
        }
        let frame = self.space.frame_of(p)?;
        let delta = FRAME_DIFF_STEP / speed;
        let ahead = self.space.frame_of(&vector::add_scaled(p, delta, v))?;
        let behind = self.space.frame_of(&vector::add_scaled(p, -delta, v))?;
        let inv = 1.0 / (2.0 * delta);
        let dw1 = vector::scaled(inv, &vector::sub(&ahead.w1, &behind.w1));
        let dw2 = vector::scaled(inv, &vector::sub(&ahead.w2, &behind.w2));
        let normal_rate = |w: &[f64]| {
            let mut r = vector::scaled(-pairing(w, &dw1), &frame.w1);
            vector::axpy(-pairing(w, &dw2), &frame.w2, &mut r);
            r
        };
        out.push(normal_rate(v));
        if state.len() > 2 {
            let quotient = match self.mode {
                Mode::Horizontal => Some(QuotientTerms::new(p, v)),
                Mode::Sigma => None,
            };
            for w in &state[2..] {
                let mut r = normal_rate(w);
                if let Some(q) = &quotient {
                    q.add_to(w, &mut r);
                }
                out.push(r);
            }
        }
        Ok(out)
    }

    fn rk4(&self, state: &[Vec<f64>], h: f64) -> Result<Vec<Vec<f64>>> {
        let shifted = |k: &[Vec<f64>], a: f64| -> Vec<Vec<f64>> {
            state
                .iter()
                .zip(k)
                .map(|(s, d)| vector::add_scaled(s, a, d))
                .collect()
        };
        let k1 = self.rhs(state)?;
        let k2 = self.rhs(&shifted(&k1, 0.5 * h))?;
        let k3 = self.rhs(&shifted(&k2, 0.5 * h))?;
        let k4 = self.rhs(&shifted(&k3, h))?;
        Ok(state
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut next = s.clone();
                for (k, weight) in [(&k1, 1.0), (&k2, 2.0), (&k3, 2.0), (&k4, 1.0)] {
                    vector::axpy(h * weight / 6.0, &k[i], &mut next);
                }
                next
            })
            .collect())
    }

    /// Tangent (or horizontal) projector at `p`.
    fn projector(&self, p: &[f64]) -> Result<impl Fn(&[f64]) -> Vec<f64>> {
        let frame = self.space.frame_of(p)?;
        let vertical = match self.mode {
            Mode::Horizontal => Some(frame.orthogonalised_vertical(p)?),
            Mode::Sigma => None,
        };
        Ok(move |x: &[f64]| {
            let mut out = frame.remove_normal(x);
            if let Some(u) = &vertical {
                vector::axpy(-pairing(&out, u), u, &mut out);
            }
            out
        })
    }

    /// Integrates from `t = 0` and records positions at `times`
    /// (non-decreasing, starting at 0).
    pub fn run(
        &self,
        p0: &[f64],
        v0: &[f64],
        carried: &[Vec<f64>],
        times: &[f64],
        stepping: Stepping,
    ) -> Result<FlowResult> {
        let project = self.projector(p0)?;
        let v0 = project(v0);
        let speed = pairing_norm(&v0);
        let mut state = Vec::with_capacity(carried.len() + 2);
        state.push(p0.to_vec());
        state.push(v0);
        state.extend(carried.iter().map(|w| project(w)));
        let targets: Vec<f64> = state[2..].iter().map(|w| pairing_norm(w)).collect();
        let mut growth = vec![1.0; carried.len()];
        let mut positions = Vec::with_capacity(times.len());
        let mut residuals = Vec::new();
        let span = times.last().copied().unwrap_or(0.0);
        let mut t = 0.0;
        let mut step = 0;
        for &target in times {
            let interval = target - t;
            if interval > 0.0 {
                let substeps = match stepping {
                    Stepping::PerUnit(d) => (d * speed * interval).ceil().max(1.0) as usize,
                    Stepping::Total(n) => ((n as f64) * interval / span).round().max(1.0) as usize,
                };
                let h = interval / substeps as f64;
                for _ in 0..substeps {
                    step += 1;
                    let next = self.rk4(&state, h).map_err(|e| Error::at_step(step, e))?;
                    state = self
                        .settle(next, speed, &targets, &mut growth, &mut residuals)
                        .map_err(|e| Error::at_step(step, e))?;
                }
                t = target;
            }
            positions.push(state[0].clone());
        }
        let drift = targets
            .iter()
            .zip(&growth)
            .map(|(n0, g)| (n0 * g - n0).abs())
            .collect();
        let mut rest = state.into_iter();
        rest.next();
        let velocity = rest.next().expect("state holds a velocity");
        Ok(FlowResult {
            positions,
            velocity,
            carried: rest.collect(),
            drift,
            residuals,
            steps: step,
        })
    }

    /// Re-projection and norm correction after one RK4 step.
    fn settle(
        &self,
        mut state: Vec<Vec<f64>>,
        speed: f64,
        targets: &[f64],
        growth: &mut [f64],
        residuals: &mut Vec<f64>,
    ) -> Result<Vec<Vec<f64>>> {
        let p = self.space.project_to_sigma(&state[0])?.into_coefficients();
        let project = self.projector(&p)?;
        state[0] = p;
        let mut v = project(&state[1]);
        let vn = pairing_norm(&v);
        if vn > 0.0 {
            vector::scale(speed / vn, &mut v);
        }
        state[1] = v;
        let mut worst: f64 = 0.0;
        for (i, w) in state[2..].iter_mut().enumerate() {
            let raw = harmonic_part(w);
            let projected = project(&raw);
            worst = worst.max(pairing_norm(&vector::sub(&raw, &projected)));
            let after = pairing_norm(&projected);
            *w = projected;
            if targets[i] > 0.0 && after > 0.0 {
                growth[i] *= after / targets[i];
                vector::scale(targets[i] / after, w);
            }
        }
        residuals.push(worst);
        Ok(state)
    }
}

/// The vertical-correction terms of quotient transport along a horizontal
/// geodesic through `p` with velocity `v`.
struct QuotientTerms {
    g1: Vec<f64>,
    g2: Vec<f64>,
    g1_dot: Vec<f64>,
    g1_sq: f64,
    g2_v: f64,
    g1_v: f64,
}

impl QuotientTerms {
    fn new(p: &[f64], v: &[f64]) -> Self {
        let g1 = derivative_pattern(p);
        let g2 = second_derivative_pattern(p);
        let g1_dot = derivative_pattern(v);
        let g1_sq = vector::dot(&g1, &g1);
        let g2_v = vector::dot(&g2, v);
        let g1_v = vector::dot(&g1, v);
        QuotientTerms {
            g1,
            g2,
            g1_dot,
            g1_sq,
            g2_v,
            g1_v,
        }
    }

    /// `γ'/(2‖γ'‖⁴) (<γ',W><γ'',γ̇> - <γ',γ̇><W,γ''>) - γ' <γ̇',W>/‖γ'‖²`
    fn add_to(&self, w: &[f64], out: &mut [f64]) {
        let twist = vector::dot(&self.g1, w) * self.g2_v - self.g1_v * vector::dot(w, &self.g2);
        let coeff =
            twist / (2.0 * self.g1_sq * self.g1_sq) - vector::dot(&self.g1_dot, w) / self.g1_sq;
        // the x_0 slots of g1, g2 are zero, so only harmonics are affected
        vector::axpy(coeff, &self.g1, out);
    }
}

fn uniform_times(samples: usize) -> Vec<f64> {
    let last = (samples - 1).max(1) as f64;
    (0..samples).map(|i| i as f64 / last).collect()
}

fn wrap_points(points: Vec<Vec<f64>>) -> Vec<ZrShape> {
    points
        .into_iter()
        .map(|c| ZrShape::from_coefficients(c).expect("integrator keeps finite coefficients"))
        .collect()
}

fn build_path(
    space_tag: SpaceTag,
    base: &ZrShape,
    velocity: &[f64],
    points: Vec<ZrShape>,
    horizontal: bool,
) -> ZrPath {
    let length = pairing_norm(velocity);
    let last = (points.len() - 1).max(1) as f64;
    let v0 = if length > 0.0 {
        vector::scaled(1.0 / length, velocity)
    } else {
        vec![0.0; velocity.len()]
    };
    ZrPath {
        space: space_tag,
        base: base.clone(),
        v0: ZrTangent::with_flag(v0, horizontal),
        length,
        samples: points
            .into_iter()
            .enumerate()
            .map(|(i, p)| (length * i as f64 / last, p))
            .collect(),
    }
}

fn trivial_path(space_tag: SpaceTag, base: &ZrShape, samples: usize) -> ZrPath {
    let dim = base.coefficients().len();
    ZrPath {
        space: space_tag,
        base: base.clone(),
        v0: ZrTangent::with_flag(vec![0.0; dim], space_tag == SpaceTag::ZrInvariant),
        length: 0.0,
        samples: (0..samples.max(1)).map(|_| (0.0, base.clone())).collect(),
    }
}

/// Exponential map: the geodesic with `γ(0) = θ`, `γ̇(0) = v` on
/// `[0, t_end]`, integrated with `steps` RK4 steps and sampled after each.
/// A horizontal `v` yields a horizontal geodesic tagged for the quotient.
pub fn exp_map(
    space: &ZrSpace,
    theta: &ZrShape,
    v: &ZrTangent,
    t_end: f64,
    steps: usize,
) -> Result<ZrPath> {
    if steps < 8 {
        return Err(Error::Precondition(alloc::format!(
            "exp_map needs at least 8 steps, got {steps}"
        )));
    }
    space.inner(theta.coefficients(), v.coefficients())?;
    let mode = if v.is_horizontal() {
        Mode::Horizontal
    } else {
        Mode::Sigma
    };
    let tag = if v.is_horizontal() {
        SpaceTag::ZrInvariant
    } else {
        SpaceTag::ZrSigma
    };
    let velocity = vector::scaled(t_end, v.coefficients());
    if pairing_norm(&velocity) == 0.0 {
        return Ok(trivial_path(tag, theta, steps + 1));
    }
    let flow = Integrator { space, mode }.run(
        theta.coefficients(),
        &velocity,
        &[],
        &uniform_times(steps + 1),
        Stepping::Total(steps),
    )?;
    Ok(build_path(
        tag,
        theta,
        &velocity,
        wrap_points(flow.positions),
        v.is_horizontal(),
    ))
}

/// Points `exp_θ(t v)` for the given `t` values in `[0, 1]` (increasing).
pub fn shoot(
    space: &ZrSpace,
    theta: &ZrShape,
    v: &ZrTangent,
    times: &[f64],
    steps_per_unit: f64,
) -> Result<Vec<ZrShape>> {
    let mode = if v.is_horizontal() {
        Mode::Horizontal
    } else {
        Mode::Sigma
    };
    if pairing_norm(v.coefficients()) == 0.0 {
        return Ok(times.iter().map(|_| theta.clone()).collect());
    }
    let flow = Integrator { space, mode }.run(
        theta.coefficients(),
        v.coefficients(),
        &[],
        times,
        Stepping::PerUnit(steps_per_unit),
    )?;
    Ok(wrap_points(flow.positions))
}

/// Unit velocity at the end of a path, obtained by re-integrating it.
pub fn end_velocity(space: &ZrSpace, path: &ZrPath, steps_per_unit: f64) -> Result<ZrTangent> {
    if path.length == 0.0 {
        return Ok(path.v0.clone());
    }
    let mode = Mode::of(path.space);
    let velocity = vector::scaled(path.length, path.v0.coefficients());
    let flow = Integrator { space, mode }.run(
        path.base.coefficients(),
        &velocity,
        &[],
        &uniform_times(path.samples.len()),
        Stepping::PerUnit(steps_per_unit),
    )?;
    Ok(ZrTangent::with_flag(
        vector::scaled(1.0 / path.length, &flow.velocity),
        mode == Mode::Horizontal,
    ))
}

/// Discrete energy `Σ ‖p_{i+1} - p_i‖²` of a sampled path.
pub fn path_energy(points: &[Vec<f64>]) -> f64 {
    points
        .windows(2)
        .map(|w| {
            let d = harmonic_part(&vector::sub(&w[1], &w[0]));
            pairing(&d, &d)
        })
        .sum()
}

/// Solves the tridiagonal system `-x_{i-1} + 2 x_i - x_{i+1} = r_i` for
/// vector-valued unknowns. The first end is fixed; with `free_end` the last
/// row is `x_n - x_{n-1} = r_n` instead.
fn solve_laplacian(rhs: &[Vec<f64>], free_end: bool) -> Vec<Vec<f64>> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut d: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let diag = if free_end && i + 1 == n { 1.0 } else { 2.0 };
        let denom = if i == 0 { diag } else { diag + c[i - 1] };
        c[i] = -1.0 / denom;
        let mut row = rhs[i].clone();
        if i > 0 {
            vector::axpy(1.0, &d[i - 1], &mut row);
        }
        vector::scale(1.0 / denom, &mut row);
        d.push(row);
    }
    for i in (0..n.saturating_sub(1)).rev() {
        let next = d[i + 1].clone();
        vector::axpy(-c[i], &next, &mut d[i]);
    }
    d
}

struct Straightened {
    points: Vec<Vec<f64>>,
    energy_trace: Vec<f64>,
}

/// Free end of a path constrained to the initial-point orbit of `target`,
/// currently at `shift`.
struct OrbitEnd<'a> {
    target: &'a ZrShape,
    shift: f64,
}

impl OrbitEnd<'_> {
    fn point(&self, shift: f64) -> Vec<f64> {
        shift_initial_point(self.target, shift).into_coefficients()
    }

    /// Derivative of the orbit point with respect to the shift.
    fn tangent(&self) -> Vec<f64> {
        let h = 1e-6;
        let ahead = self.point(self.shift + h);
        let behind = self.point(self.shift - h);
        harmonic_part(&vector::scaled(0.5 / h, &vector::sub(&ahead, &behind)))
    }
}

/// Path straightening with a Laplacian-preconditioned projected gradient.
/// With `orbit` set, the last point is a further unknown that slides along
/// the orbit.
fn straighten(
    space: &ZrSpace,
    mut points: Vec<Vec<f64>>,
    mut orbit: Option<OrbitEnd<'_>>,
    opts: &GeodesicOptions,
) -> Result<Straightened> {
    let p = points.len();
    let mut energy = path_energy(&points);
    let mut trace = vec![energy];
    if p < 3 {
        return Ok(Straightened {
            points,
            energy_trace: trace,
        });
    }
    for _ in 0..opts.max_iterations {
        let mut grads = Vec::with_capacity(p - 1);
        for i in 1..p - 1 {
            let mut g = vector::scaled(2.0, &points[i]);
            vector::axpy(-1.0, &points[i - 1], &mut g);
            vector::axpy(-1.0, &points[i + 1], &mut g);
            grads.push(
                space
                    .project_tangent(&ZrShape::from_coefficients(points[i].clone())?, &g)?
                    .into_coefficients(),
            );
        }
        let slide = orbit.as_ref().map(|end| {
            let tau = end.tangent();
            let tt = pairing(&tau, &tau);
            let along = |v: &[f64]| pairing(&harmonic_part(v), &tau) / tt;
            grads.push(vector::scaled(
                along(&vector::sub(&points[p - 1], &points[p - 2])),
                &tau,
            ));
            let dirs = solve_laplacian(&grads, true);
            (along(&dirs[p - 2]), dirs)
        });
        let (ds, dirs) = match slide {
            Some((ds, mut dirs)) => {
                dirs.pop();
                (ds, dirs)
            }
            None => (0.0, solve_laplacian(&grads, false)),
        };
        let dirs: Vec<Vec<f64>> = dirs
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let base = ZrShape::from_coefficients(points[i + 1].clone())?;
                Ok(space.project_tangent(&base, d)?.into_coefficients())
            })
            .collect::<Result<_>>()?;
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let mut trial = points.clone();
            for (i, d) in dirs.iter().enumerate() {
                let moved = vector::add_scaled(&points[i + 1], -alpha, d);
                trial[i + 1] = space.project_to_sigma(&moved)?.into_coefficients();
            }
            let shift = orbit.as_ref().map(|end| end.shift - alpha * ds);
            if let (Some(end), Some(s)) = (&orbit, shift) {
                trial[p - 1] = end.point(s);
            }
            let e = path_energy(&trial);
            if e < energy {
                accepted = Some((trial, e, shift));
                break;
            }
            alpha *= 0.5;
        }
        let Some((next, e, shift)) = accepted else {
            break;
        };
        if let (Some(end), Some(s)) = (orbit.as_mut(), shift) {
            end.shift = s;
        }
        let decrease = (energy - e) / energy.max(f64::MIN_POSITIVE);
        points = next;
        energy = e;
        trace.push(e);
        if decrease < opts.energy_tolerance {
            break;
        }
    }
    Ok(Straightened {
        points,
        energy_trace: trace,
    })
}

/// The point of the orbit of `target` nearest to `anchor`.
fn register_on_orbit(space: &ZrSpace, anchor: &[f64], target: &ZrShape) -> Result<Vec<f64>> {
    let anchor = ZrShape::from_coefficients(anchor.to_vec())?;
    let a = space.align_initial_point(&anchor, target)?;
    Ok(shift_initial_point(target, a.shift).into_coefficients())
}

fn linear_initialisation(
    space: &ZrSpace,
    a: &ZrShape,
    b: &ZrShape,
    samples: usize,
) -> Result<Vec<Vec<f64>>> {
    uniform_times(samples)
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            if i == 0 {
                return Ok(a.coefficients().to_vec());
            }
            if i == samples - 1 {
                return Ok(b.coefficients().to_vec());
            }
            let mut c = vector::scaled(1.0 - t, a.coefficients());
            vector::axpy(t, b.coefficients(), &mut c);
            Ok(space.project_to_sigma(&c)?.into_coefficients())
        })
        .collect()
}

/// Second-order one-sided difference for the initial velocity.
fn initial_velocity(points: &[Vec<f64>]) -> Vec<f64> {
    let dt = 1.0 / (points.len() - 1) as f64;
    if points.len() < 3 {
        return harmonic_part(&vector::scaled(
            1.0 / dt,
            &vector::sub(&points[1], &points[0]),
        ));
    }
    let mut v = vector::scaled(-3.0, &points[0]);
    vector::axpy(4.0, &points[1], &mut v);
    vector::axpy(-1.0, &points[2], &mut v);
    harmonic_part(&vector::scaled(1.0 / (2.0 * dt), &v))
}

struct Shot {
    velocity: Vec<f64>,
    points: Vec<Vec<f64>>,
}

/// Newton-like correction of the initial velocity until the shot ends at
/// `target` (or, with `orbit`, on the orbit of `target`).
fn polish_by_shooting(
    space: &ZrSpace,
    base: &ZrShape,
    guess: Vec<f64>,
    target: &ZrShape,
    mode: Mode,
    orbit: bool,
    opts: &GeodesicOptions,
) -> Option<Shot> {
    let integrator = Integrator { space, mode };
    let times = uniform_times(opts.samples);
    let project = integrator.projector(base.coefficients()).ok()?;
    let mut v = project(&guess);
    let mut last_residual = f64::INFINITY;
    for _ in 0..opts.max_shooting {
        let flow = integrator
            .run(
                base.coefficients(),
                &v,
                &[],
                &times,
                Stepping::PerUnit(opts.steps_per_unit),
            )
            .ok()?;
        let end = flow.positions.last()?;
        let goal = if orbit {
            register_on_orbit(space, end, target).ok()?
        } else {
            target.coefficients().to_vec()
        };
        let miss = harmonic_part(&vector::sub(&goal, end));
        let residual = pairing_norm(&miss);
        if residual <= opts.shooting_tolerance {
            return Some(Shot {
                velocity: v,
                points: flow.positions,
            });
        }
        if residual > 0.9 * last_residual && last_residual < 1e-8 {
            // stagnating at the integrator's noise floor
            return Some(Shot {
                velocity: v,
                points: flow.positions,
            });
        }
        if residual > 2.0 * last_residual {
            return None;
        }
        last_residual = residual;
        v = project(&vector::add(&v, &miss));
    }
    None
}

/// Minimal geodesic in Σ_ZR between two shapes, sampled at
/// `opts.samples` equally spaced times.
pub fn geodesic_between(
    space: &ZrSpace,
    theta0: &ZrShape,
    theta1: &ZrShape,
    opts: &GeodesicOptions,
) -> Result<ZrPath> {
    connect(space, theta0, theta1, opts, false)
}

/// Horizontal geodesic from `theta0` to the initial-point orbit of
/// `theta1`, representing the geodesic of the quotient space.
pub fn geodesic_between_invariant(
    space: &ZrSpace,
    theta0: &ZrShape,
    theta1: &ZrShape,
    opts: &GeodesicOptions,
) -> Result<ZrPath> {
    connect(space, theta0, theta1, opts, true)
}

fn connect(
    space: &ZrSpace,
    theta0: &ZrShape,
    theta1: &ZrShape,
    opts: &GeodesicOptions,
    invariant: bool,
) -> Result<ZrPath> {
    space.inner(theta0.coefficients(), theta1.coefficients())?;
    if opts.samples < 3 {
        return Err(Error::Precondition(
            "a geodesic needs at least 3 samples".into(),
        ));
    }
    for theta in [theta0, theta1] {
        let residual = space.closure_residual(theta);
        if residual > 1e-6 {
            return Err(Error::OpenCurve { residual });
        }
    }
    let (tag, mode, shift) = if invariant {
        if theta0.harmonic_norm() < SINGULAR_NORM || theta1.harmonic_norm() < SINGULAR_NORM {
            return Err(Error::SingularShape(
                "quotient geodesics through the circle",
            ));
        }
        let a = space.align_initial_point(theta0, theta1)?;
        (SpaceTag::ZrInvariant, Mode::Horizontal, a.shift)
    } else {
        (SpaceTag::ZrSigma, Mode::Sigma, 0.0)
    };
    let target = shift_initial_point(theta1, shift);
    if space.distance(theta0, &target) <= 1e-12 {
        return Ok(trivial_path(tag, theta0, opts.samples));
    }
    let init = linear_initialisation(space, theta0, &target, opts.samples)?;
    let orbit = invariant.then_some(OrbitEnd {
        target: theta1,
        shift,
    });
    let straight = straighten(space, init, orbit, opts)?;
    let guess = initial_velocity(&straight.points);
    let goal = if invariant { theta1 } else { &target };
    match polish_by_shooting(space, theta0, guess.clone(), goal, mode, invariant, opts) {
        Some(shot) => Ok(build_path(
            tag,
            theta0,
            &shot.velocity,
            wrap_points(shot.points),
            invariant,
        )),
        None => {
            if straight.energy_trace.len() > opts.max_iterations {
                return Err(Error::NonConvergence {
                    what: "path straightening",
                    residual: *straight.energy_trace.last().unwrap_or(&f64::NAN),
                    history: straight.energy_trace,
                });
            }
            let velocity = if invariant {
                space.project_horizontal_tangent(theta0.coefficients(), &guess)?
            } else {
                space.project_tangent(theta0, &guess)?.into_coefficients()
            };
            Ok(build_path(
                tag,
                theta0,
                &velocity,
                wrap_points(straight.points),
                invariant,
            ))
        }
    }
}

/// A geodesic fitted through a time series together with the time
/// registration of each observation.
#[derive(Debug, Clone)]
pub struct SeriesFit {
    pub path: ZrPath,
    /// Points of the geodesic at the observation times.
    pub fitted: Vec<ZrShape>,
    /// Distance of each observation to its fitted point.
    pub residuals: Vec<f64>,
}

/// Geodesic through the first and last shape of a series, with the
/// observation times mapped affinely onto the path.
pub fn fit_geodesic_to_series(
    space: &ZrSpace,
    shapes: &[ZrShape],
    times: &[f64],
    tag: SpaceTag,
    opts: &GeodesicOptions,
) -> Result<SeriesFit> {
    if shapes.len() < 2 {
        return Err(Error::Precondition(
            "a series needs at least two shapes".into(),
        ));
    }
    if shapes.len() != times.len() {
        return Err(Error::Precondition(alloc::format!(
            "{} shapes but {} times",
            shapes.len(),
            times.len()
        )));
    }
    let unit = crate::geodesic::affine_times(times)?;
    let (first, last) = (&shapes[0], &shapes[shapes.len() - 1]);
    let path = match tag {
        SpaceTag::ZrInvariant => geodesic_between_invariant(space, first, last, opts)?,
        _ => geodesic_between(space, first, last, opts)?,
    };
    let velocity = path.v0.scaled(path.length);
    let fitted = shoot(space, first, &velocity, &unit, opts.steps_per_unit)?;
    let residuals = shapes
        .iter()
        .zip(&fitted)
        .map(|(s, f)| match tag {
            SpaceTag::ZrInvariant => space.align_initial_point(f, s).map(|a| a.distance),
            _ => Ok(space.distance(s, f)),
        })
        .collect::<Result<_>>()?;
    Ok(SeriesFit {
        path,
        fitted,
        residuals,
    })
}

/// Horizontality defect of a unit tangent: `|<v, U>|` with `U` the unit
/// vertical direction at `theta`.
pub fn verticality(theta: &ZrShape, v: &[f64]) -> Result<f64> {
    let u = vertical_of(theta.coefficients())?;
    Ok(pairing(v, &u).abs())
}
