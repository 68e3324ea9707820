//! Adaptive explicit integrator for the curvature flows.
//!
//! Dormand-Prince 5(4) stepping in `u`-coordinates. Beyond the embedded
//! error control, a step is rejected when it would increase the (modified)
//! Calabi energy past rounding slack or push any `u_i` against the blow-up
//! guard; both rules only ever shrink the step, so accepted trajectories are
//! energy-monotone by construction.

use alloc::vec::Vec;

use crate::fp;
use crate::hypgeom::{self, GeometryError, WeightedPacking};
use crate::laplacian::DualLaplacian;
use crate::linalg;
use crate::mesh::TriangulatedSurface;

use super::{
    energy_of, energy_slack, fit_log_energy_slope, target_or_zeros, FlowConfig, FlowError,
    FlowSample, FlowTrajectory, Termination,
};

// Dormand-Prince RK5(4)7M coefficients.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
/// Fifth-order weights (also the last stage row: first-same-as-last).
const B5: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
/// Error weights `b5 - b4` including the seventh stage.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const H_MIN: f64 = 1e-14;

/// State evaluated at one point of the flow.
struct Eval {
    curvature: Vec<f64>,
    lap: DualLaplacian,
    velocity: Vec<f64>,
    energy: f64,
}

enum StageResult {
    Ok(Eval),
    /// The trial point left the admissible domain (`u >= 0`, degenerate
    /// geometry); the step must shrink.
    OutOfDomain,
}

fn eval_at(
    surface: &TriangulatedSurface,
    work: &mut WeightedPacking,
    u: &[f64],
    target: &[f64],
) -> Result<StageResult, FlowError> {
    if u.iter().any(|&x| !(x.is_finite() && x < 0.0)) {
        return Ok(StageResult::OutOfDomain);
    }
    work.set_u(u).map_err(FlowError::Geometry)?;
    let geom = match hypgeom::curvatures(surface, work) {
        Ok(g) => g,
        Err(GeometryError::DimensionMismatch { expected, got }) => {
            return Err(FlowError::DimensionMismatch { expected, got });
        }
        Err(_) => return Ok(StageResult::OutOfDomain),
    };
    let lap = match DualLaplacian::assemble(surface, work) {
        Ok(l) => l,
        Err(GeometryError::DimensionMismatch { expected, got }) => {
            return Err(FlowError::DimensionMismatch { expected, got });
        }
        Err(_) => return Ok(StageResult::OutOfDomain),
    };
    let diff: Vec<f64> = target.iter().zip(&geom.curvature).map(|(t, k)| t - k).collect();
    let velocity = lap.mul_vec(&diff)?;
    if velocity.iter().any(|v| !v.is_finite()) {
        return Ok(StageResult::OutOfDomain);
    }
    let energy = energy_of(&geom.curvature, target);
    Ok(StageResult::Ok(Eval { curvature: geom.curvature, lap, velocity, energy }))
}

fn combine(u: &[f64], h: f64, stages: &[&[f64]], coef: &[f64]) -> Vec<f64> {
    let mut out = u.to_vec();
    for (k, &c) in stages.iter().zip(coef) {
        if c == 0.0 {
            continue;
        }
        for (o, &ki) in out.iter_mut().zip(*k) {
            *o += h * c * ki;
        }
    }
    out
}

enum RejectReason {
    Error,
    Guard,
}

enum StepAttempt {
    Accepted { u: Vec<f64>, eval: Eval, err_norm: f64 },
    Rejected { reason: RejectReason, err_norm: Option<f64> },
}

/// One trial step from `u` with slope `k1 = f(u)` already evaluated.
#[allow(clippy::too_many_arguments)]
fn try_step(
    surface: &TriangulatedSurface,
    work: &mut WeightedPacking,
    target: &[f64],
    u: &[f64],
    k1: &[f64],
    h: f64,
    energy: f64,
    guard: f64,
    step_tol: f64,
) -> Result<StepAttempt, FlowError> {
    macro_rules! stage {
        ($coef:expr, $stages:expr) => {{
            let y = combine(u, h, $stages, &$coef);
            match eval_at(surface, work, &y, target)? {
                StageResult::Ok(e) => e.velocity,
                StageResult::OutOfDomain => {
                    return Ok(StepAttempt::Rejected { reason: RejectReason::Guard, err_norm: None })
                }
            }
        }};
    }
    let k2 = stage!(A2, &[k1]);
    let k3 = stage!(A3, &[k1, &k2]);
    let k4 = stage!(A4, &[k1, &k2, &k3]);
    let k5 = stage!(A5, &[k1, &k2, &k3, &k4]);
    let k6 = stage!(A6, &[k1, &k2, &k3, &k4, &k5]);

    let y5 = combine(u, h, &[k1, &k2, &k3, &k4, &k5, &k6], &B5);
    if y5.iter().any(|&x| !(x.is_finite() && x < -guard)) {
        return Ok(StepAttempt::Rejected { reason: RejectReason::Guard, err_norm: None });
    }
    // seventh stage sits at y5 (first-same-as-last); its evaluation doubles
    // as the state of the prospective new sample
    let eval5 = match eval_at(surface, work, &y5, target)? {
        StageResult::Ok(e) => e,
        StageResult::OutOfDomain => {
            return Ok(StepAttempt::Rejected { reason: RejectReason::Guard, err_norm: None })
        }
    };

    let stages: [&[f64]; 7] = [k1, &k2, &k3, &k4, &k5, &k6, &eval5.velocity];
    let mut err_sq = 0.0;
    for i in 0..u.len() {
        let mut e = 0.0;
        for (k, &c) in stages.iter().zip(&E) {
            e += c * k[i];
        }
        e *= h;
        let scale = step_tol * (1.0 + fp::abs(u[i]).max(fp::abs(y5[i])));
        let ratio = e / scale;
        err_sq += ratio * ratio;
    }
    let err_norm = fp::sqrt(err_sq / u.len() as f64);
    if !err_norm.is_finite() || err_norm > 1.0 {
        return Ok(StepAttempt::Rejected { reason: RejectReason::Error, err_norm: Some(err_norm) });
    }
    if eval5.energy > energy + energy_slack(energy) {
        return Ok(StepAttempt::Rejected { reason: RejectReason::Error, err_norm: None });
    }
    Ok(StepAttempt::Accepted { u: y5, eval: eval5, err_norm })
}

fn grow_factor(err_norm: f64) -> f64 {
    if err_norm <= 0.0 {
        return 5.0;
    }
    (0.9 * fp::exp(-0.2 * fp::ln(err_norm))).clamp(0.2, 5.0)
}

/// Integrates the flow `du/dt = L(target - K)` from `packing`.
///
/// Terminations ([`Termination`]) are part of the returned trajectory, not
/// errors; `Err` is reserved for invalid configuration or inconsistent
/// dimensions.
pub fn integrate(
    surface: &TriangulatedSurface,
    packing: &WeightedPacking,
    config: &FlowConfig,
) -> Result<FlowTrajectory, FlowError> {
    let n = surface.vertex_count();
    config.validate(n)?;
    if packing.vertex_count() != n {
        return Err(FlowError::DimensionMismatch { expected: n, got: packing.vertex_count() });
    }
    let target = target_or_zeros(config, n);
    let mut work = packing.clone();
    let mut u = packing.u().to_vec();

    let mut cur = match eval_at(surface, &mut work, &u, &target)? {
        StageResult::Ok(e) => e,
        StageResult::OutOfDomain => {
            return Err(FlowError::Geometry(GeometryError::Domain {
                what: "initial packing",
                value: linalg::norm_inf(&u),
            }))
        }
    };

    let mut samples = Vec::new();
    let lambda1 = |lap: &DualLaplacian, on: bool| if on { lap.min_eigenvalue().ok() } else { None };
    samples.push(FlowSample {
        t: 0.0,
        u: u.clone(),
        curvature: cur.curvature.clone(),
        energy: cur.energy,
        h_used: 0.0,
        lambda1: lambda1(&cur.lap, config.record_lambda1),
    });

    let mut t = 0.0;
    let mut h = config.h0.min(config.h_max);
    let mut accepted = 0usize;

    let termination = 'run: {
        if u.iter().any(|&x| x >= -config.blowup_guard) {
            break 'run Termination::BlowupGuard;
        }
        loop {
            let residual: f64 = cur
                .curvature
                .iter()
                .zip(&target)
                .fold(0.0, |m, (k, t)| m.max(fp::abs(k - t)));
            if residual < config.tol {
                break 'run Termination::Converged;
            }
            if t >= config.t_max * (1.0 - 1e-15) {
                break 'run Termination::MaxTime;
            }
            if accepted >= config.max_steps {
                break 'run Termination::MaxSteps;
            }
            let h_try = h.min(config.t_max - t);
            match try_step(
                surface,
                &mut work,
                &target,
                &u,
                &cur.velocity,
                h_try,
                cur.energy,
                config.blowup_guard,
                config.step_tol,
            )? {
                StepAttempt::Accepted { u: u_new, eval, err_norm } => {
                    t += h_try;
                    u = u_new;
                    cur = eval;
                    accepted += 1;
                    samples.push(FlowSample {
                        t,
                        u: u.clone(),
                        curvature: cur.curvature.clone(),
                        energy: cur.energy,
                        h_used: h_try,
                        lambda1: lambda1(&cur.lap, config.record_lambda1),
                    });
                    h = (h_try * grow_factor(err_norm)).min(config.h_max);
                }
                StepAttempt::Rejected { reason, err_norm } => {
                    h = match err_norm {
                        Some(e) if e.is_finite() => h_try * grow_factor(e).min(1.0),
                        _ => 0.5 * h_try,
                    };
                    if h < H_MIN {
                        break 'run match reason {
                            RejectReason::Guard => Termination::BlowupGuard,
                            RejectReason::Error => Termination::StepFailure,
                        };
                    }
                }
            }
        }
    };

    let fitted_rate = fit_log_energy_slope(&samples, config.rate_window);
    let ceiling_hits = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| s.max_curvature() > config.curvature_ceiling)
        .map(|(i, _)| i)
        .collect();
    Ok(FlowTrajectory { samples, termination, fitted_rate, ceiling_hits })
}

/// One vertex/sample pair below the zero-weight radius floor.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorViolation {
    pub sample: usize,
    pub vertex: usize,
    pub radius: f64,
    pub bound: f64,
}

/// Outcome of [`radius_floor_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusFloorReport {
    /// `min_i tanh(r_i(0)/2)`.
    pub c1: f64,
    /// Decay constant `d^2 pi (2 + cosh 1)` from the degree bound.
    pub c2: f64,
    pub violations: Vec<FloorViolation>,
}

impl RadiusFloorReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies the a-priori radius floor of a zero-weight flow along a computed
/// trajectory: with `c1 = min_i tanh(r_i(0)/2)` and
/// `c2 = d^2 pi (2 + cosh 1)`,
///
/// ```text
/// tanh(r_i(t)/2) >= c1 e^{-c2 t}    i.e.    r_i(t) >= ln((1+c1 e^{-c2 t})/(1-c1 e^{-c2 t}))
/// ```
///
/// must hold at every sample. Meaningful for zero-weight runs; the constants
/// come from the zero-weight coefficient bounds.
pub fn radius_floor_check(
    trajectory: &FlowTrajectory,
    surface: &TriangulatedSurface,
) -> RadiusFloorReport {
    let d = surface.max_degree() as f64;
    let c2 = d * d * core::f64::consts::PI * (2.0 + fp::cosh(1.0));
    // u = ln tanh(r/2), so c1 = exp(min_i u_i(0))
    let ln_c1 = trajectory.initial().u.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    let c1 = fp::exp(ln_c1);

    let mut violations = Vec::new();
    for (si, sample) in trajectory.samples.iter().enumerate() {
        let ln_bound = ln_c1 - c2 * sample.t;
        for (vi, &ui) in sample.u.iter().enumerate() {
            // tanh(r_i/2) >= c1 e^{-c2 t} in log form, with rounding headroom
            let log_ok = ui >= ln_bound - 1e-12;
            // and the radius form r_i >= 2 artanh(c1 e^{-c2 t})
            let x = fp::exp(ln_bound);
            let bound_r = fp::ln_1p(x) - fp::ln_1p(-x);
            let r_i = hypgeom::r_from_u(ui);
            let radius_ok = r_i >= bound_r * (1.0 - 1e-12);
            if !(log_ok && radius_ok) {
                violations.push(FloorViolation {
                    sample: si,
                    vertex: vi,
                    radius: r_i,
                    bound: bound_r,
                });
            }
        }
    }
    RadiusFloorReport { c1, c2, violations }
}
