//! Collapse of the 3-fold metrics onto `S³×S¹`: the degenerate direction,
//! integral curves of its real and imaginary parts, their lengths, and the
//! pointwise C⁰ distance between the surface metrics.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::charts::{ChartPoint, Family, ManifoldSpec};
use crate::error::{GeometryError, Result};
use crate::exec::{map_indexed, Execution};
use crate::metrics::{hermitian_matrix, real_metric_matrix};

/// Index of `x₂`, `x₅` and the other coordinates on the 3-fold chart.
const X2: usize = 2;
const X5: usize = 5;

fn require_three_fold(spec: &ManifoldSpec) -> Result<()> {
    if spec.family != Family::CalabiEckmann3Fold {
        return Err(GeometryError::PreconditionViolated("collapse lives on the 3-fold".into()));
    }
    Ok(())
}

/// Null direction `α = −w̄₂/(2π) ∂w₀ + B ∂w₂` of the degenerate metric,
/// with `ζ₁`, `ζ₂` the real vectors of `ᾱ` and `iᾱ` spanning the null plane
/// of the real metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegenerateFrame {
    /// Coefficients over `(∂w₀, ∂w₁, ∂w₂)` as `[re, im]`.
    pub alpha: [[f64; 2]; 3],
    /// Real coordinate components over `(x₀, …, x₅)`.
    pub zeta1: [f64; 6],
    pub zeta2: [f64; 6],
    pub b: f64,
}

impl DegenerateFrame {
    pub fn alpha_complex(&self) -> [Complex64; 3] {
        self.alpha.map(|[re, im]| Complex64::new(re, im))
    }
}

pub fn degenerate_frame(p: &ChartPoint, spec: &ManifoldSpec) -> Result<DegenerateFrame> {
    require_three_fold(spec)?;
    if p.chart != 0 {
        return Err(GeometryError::InvalidChart { chart: p.chart, charts: 1 });
    }
    let (x2, x5) = (p.coords[X2], p.coords[X5]);
    let b = 1.0 + x2 * x2 + x5 * x5;
    let mut zeta1 = [0.0; 6];
    zeta1[X2] = b;
    zeta1[0] = -x2 / (2.0 * PI);
    zeta1[3] = -x5 / (2.0 * PI);
    let mut zeta2 = [0.0; 6];
    zeta2[X5] = b;
    zeta2[0] = x5 / (2.0 * PI);
    zeta2[3] = -x2 / (2.0 * PI);
    Ok(DegenerateFrame { alpha: [[-x2 / (2.0 * PI), x5 / (2.0 * PI)], [0.0, 0.0], [b, 0.0]], zeta1, zeta2, b })
}

/// `max_j |g₀(α, ∂w_j)|` at `p`.
pub fn null_direction_residual(p: &ChartPoint, spec: &ManifoldSpec) -> Result<f64> {
    let frame = degenerate_frame(p, spec)?;
    let g0 = hermitian_matrix(p, &spec.with_epsilon(0.0)?)?;
    let alpha = frame.alpha_complex();
    Ok((0..3)
        .map(|j| (0..3).map(|i| alpha[i] * g0[(i, j)]).sum::<Complex64>().norm())
        .fold(0.0, f64::max))
}

/// `(g̃(ζ₁,ζ₁), g̃(ζ₂,ζ₂), g̃(ζ₁,ζ₂))` under the real metric.
pub fn frame_gram(p: &ChartPoint, spec: &ManifoldSpec) -> Result<[f64; 3]> {
    let frame = degenerate_frame(p, spec)?;
    let g = real_metric_matrix(p, spec)?;
    let ip = |a: &[f64; 6], b: &[f64; 6]| quadratic_pair(&g, a, b);
    Ok([ip(&frame.zeta1, &frame.zeta1), ip(&frame.zeta2, &frame.zeta2), ip(&frame.zeta1, &frame.zeta2)])
}

fn quadratic_pair(g: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| a[i] * g[(i, j)] * b[j]).sum::<f64>()).sum()
}

/// One sample along an integral curve of `aζ₁ + bζ₂`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseCurveState {
    pub t: f64,
    pub coords: [f64; 6],
    /// `(r, θ)` with `x₂ = r cos θ`, `x₅ = r sin θ`.
    pub polar: (f64, f64),
    pub ab: (f64, f64),
    /// Angle with `cos ν = b`, `sin ν = a`.
    pub nu: f64,
    /// `arctan r(0)`.
    pub a1: f64,
}

impl CollapseCurveState {
    /// Start at `coords` with the direction that drives `r` to zero:
    /// `(a, b) = −(cos θ₀, sin θ₀)`, so `sin(θ₀ + ν) = −1`.
    pub fn start(coords: [f64; 6]) -> Result<Self> {
        let (x2, x5) = (coords[X2], coords[X5]);
        let r = x2.hypot(x5);
        if r == 0.0 {
            return Err(GeometryError::PreconditionViolated("start already lies on S³×S¹".into()));
        }
        let theta = x5.atan2(x2);
        let (a, b) = (-theta.cos(), -theta.sin());
        Ok(Self { t: 0.0, coords, polar: (r, theta), ab: (a, b), nu: a.atan2(b), a1: r.atan() })
    }

    /// Start at `x₂ = r₀ cos θ₀`, `x₅ = r₀ sin θ₀`, other coordinates zero.
    pub fn from_polar(r0: f64, theta0: f64) -> Result<Self> {
        let mut coords = [0.0; 6];
        coords[X2] = r0 * theta0.cos();
        coords[X5] = r0 * theta0.sin();
        Self::start(coords)
    }

    fn with(&self, t: f64, coords: [f64; 6]) -> Self {
        let (x2, x5) = (coords[X2], coords[X5]);
        Self { t, coords, polar: (x2.hypot(x5), x5.atan2(x2)), ..self.clone() }
    }

    /// Selection constant `sin(θ₀ + ν)`.
    pub fn selection(&self) -> f64 {
        (self.polar.1 + self.nu).sin()
    }

    /// `r(t) = sin(θ₀+ν) tan(t + sin(θ₀+ν) a₁)`.
    pub fn closed_form_radius(&self, t: f64) -> f64 {
        let s = self.selection();
        s * (t + s * self.a1).tan()
    }

    /// First blow-up time of the closed form after `t = 0`.
    pub fn pole(&self) -> f64 {
        self.a1 + FRAC_PI_2
    }

    pub fn velocity(&self) -> [f64; 6] {
        collapse_field(&self.coords, self.ab)
    }
}

fn collapse_field(x: &[f64; 6], (a, b): (f64, f64)) -> [f64; 6] {
    let (x2, x5) = (x[X2], x[X5]);
    let bb = 1.0 + x2 * x2 + x5 * x5;
    let mut v = [0.0; 6];
    v[X2] = a * bb;
    v[X5] = b * bb;
    v[0] = (b * x5 - a * x2) / (2.0 * PI);
    v[3] = -(a * x5 + b * x2) / (2.0 * PI);
    v
}

fn rk4_step(x: &[f64; 6], ab: (f64, f64), h: f64) -> [f64; 6] {
    let add = |x: &[f64; 6], k: &[f64; 6], s: f64| std::array::from_fn::<f64, 6, _>(|i| x[i] + s * k[i]);
    let k1 = collapse_field(x, ab);
    let k2 = collapse_field(&add(x, &k1, h / 2.0), ab);
    let k3 = collapse_field(&add(x, &k2, h / 2.0), ab);
    let k4 = collapse_field(&add(x, &k3, h), ab);
    std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Growth bound per step: `h (1 + r²)` stays below this.
const GROWTH_PER_STEP: f64 = 0.05;
const MIN_STEP: f64 = 1e-12;

/// Classical RK4 on `[0, t_end]` with `steps` nominal steps, halving the
/// step where `r` grows. Returns every accepted state.
pub fn integrate_collapse_curve(
    start: &CollapseCurveState,
    spec: &ManifoldSpec,
    t_end: f64,
    steps: usize,
) -> Result<Vec<CollapseCurveState>> {
    require_three_fold(spec)?;
    if steps == 0 || !(t_end > 0.0) {
        return Err(GeometryError::PreconditionViolated("need a positive window and step count".into()));
    }
    let pole = start.pole();
    if t_end >= pole {
        return Err(GeometryError::StepTooLarge { pole });
    }
    let nominal = t_end / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut state = start.clone();
    out.push(state.clone());
    while t_end - state.t > 1e-14 {
        let mut h = nominal.min(t_end - state.t);
        let r = state.polar.0;
        while h * (1.0 + r * r) > GROWTH_PER_STEP {
            h /= 2.0;
            if h <= MIN_STEP {
                return Err(GeometryError::StepTooLarge { pole });
            }
        }
        let t = if t_end - state.t - h < 1e-14 { t_end } else { state.t + h };
        state = state.with(t, rk4_step(&state.coords, state.ab, h));
        out.push(state.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveCheck {
    /// `max |r − r_closed|` over the trajectory.
    pub radius_error: f64,
    /// `max |θ − θ₀|` while `r` stays away from zero.
    pub angle_drift: f64,
    /// `max |x₁ − x₁(0)| + |x₄ − x₄(0)|`.
    pub transverse_drift: f64,
    pub end_radius: f64,
}

pub fn check_against_closed_form(traj: &[CollapseCurveState]) -> CurveCheck {
    let start = &traj[0];
    let mut check = CurveCheck { radius_error: 0.0, angle_drift: 0.0, transverse_drift: 0.0, end_radius: 0.0 };
    for s in traj {
        // signed radius along the starting ray
        let signed = s.coords[X2] * start.polar.1.cos() + s.coords[X5] * start.polar.1.sin();
        check.radius_error = check.radius_error.max((signed - start.closed_form_radius(s.t)).abs());
        if s.polar.0 > 1e-6 {
            let mut d = (s.polar.1 - start.polar.1).rem_euclid(2.0 * PI);
            if d > PI {
                d -= 2.0 * PI;
            }
            // a ray through the origin flips θ by π
            let d = d.abs().min((d.abs() - PI).abs());
            check.angle_drift = check.angle_drift.max(d);
        }
        let tr = (s.coords[1] - start.coords[1]).abs() + (s.coords[4] - start.coords[4]).abs();
        check.transverse_drift = check.transverse_drift.max(tr);
    }
    check.end_radius = traj.last().map_or(0.0, |s| s.polar.0);
    check
}

/// Length of the trajectory under the 3-fold metric, by the trapezoid rule
/// on the speed `√(γ̇ᵀ g̃ γ̇)`.
pub fn curve_length(traj: &[CollapseCurveState], spec: &ManifoldSpec) -> Result<f64> {
    require_three_fold(spec)?;
    let speed = |s: &CollapseCurveState| -> Result<f64> {
        let p = ChartPoint { chart: 0, coords: s.coords.to_vec() };
        let g = real_metric_matrix(&p, spec)?;
        let v = s.velocity();
        Ok(quadratic_pair(&g, &v, &v).max(0.0).sqrt())
    };
    let mut length = 0.0;
    let mut prev = speed(&traj[0])?;
    for w in traj.windows(2) {
        let next = speed(&w[1])?;
        length += 0.5 * (w[1].t - w[0].t) * (prev + next);
        prev = next;
    }
    Ok(length)
}

/// `|g_ε − g₀|²_{g₀} = tr((G₀⁻¹ D)²)` with `D = G_ε − G₀` on the surface.
pub fn c0_distance(p: &ChartPoint, epsilon: f64) -> Result<f64> {
    let spec = ManifoldSpec::hopf_surface(epsilon)?;
    let g_eps = hermitian_matrix(p, &spec)?;
    let g0 = hermitian_matrix(p, &spec.with_epsilon(0.0)?)?;
    let inv = g0.clone().try_inverse().ok_or(GeometryError::SingularMetric)?;
    let m = inv * (g_eps - g0);
    Ok((&m * &m).trace().re)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C0Report {
    pub epsilon: f64,
    pub expected: f64,
    pub max_value: f64,
    pub min_value: f64,
    pub max_deviation: f64,
    pub variance: f64,
}

pub fn c0_distance_check(grid: &[ChartPoint], epsilon: f64, exec: Execution) -> Result<C0Report> {
    let values: Vec<f64> =
        map_indexed(exec, grid.len(), |i| c0_distance(&grid[i], epsilon)).into_iter().collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(GeometryError::PreconditionViolated("empty grid".into()));
    }
    let expected = epsilon.powi(4);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(C0Report {
        epsilon,
        expected,
        max_value: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_value: values.iter().copied().fold(f64::INFINITY, f64::min),
        max_deviation: values.iter().map(|v| (v - expected).abs()).fold(0.0, f64::max),
        variance: values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64,
    })
}

/// Collapse summary for one ε.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseRun {
    pub epsilon: f64,
    pub r0: f64,
    pub a1: f64,
    pub steps: usize,
    pub check: CurveCheck,
    pub length: f64,
    /// `length / ε`, absent at ε = 0.
    pub length_constant: Option<f64>,
    pub c0: f64,
}

/// Integrate from `r₀` along `θ₀ = 0` to `t = a₁` and measure.
pub fn collapse_run(epsilon: f64, r0: f64, steps: usize, grid: &[ChartPoint], exec: Execution) -> Result<CollapseRun> {
    let spec = ManifoldSpec::calabi_eckmann(epsilon)?;
    let start = CollapseCurveState::from_polar(r0, 0.0)?;
    let traj = integrate_collapse_curve(&start, &spec, start.a1, steps)?;
    let length = curve_length(&traj, &spec)?;
    let c0 = c0_distance_check(grid, epsilon, exec)?;
    Ok(CollapseRun {
        epsilon,
        r0,
        a1: start.a1,
        steps,
        check: check_against_closed_form(&traj),
        length,
        length_constant: (epsilon > 0.0).then(|| length / epsilon),
        c0: c0.max_value,
    })
}

/// Upper bound `C ε + ε²` from the path-length and C⁰ legs.
pub fn gh_bound(constant: f64, epsilon: f64) -> f64 {
    constant * epsilon + epsilon * epsilon
}
