//! Curvature flows and solvers.
//!
//! The combinatorial Calabi flow is the negative gradient flow of the Calabi
//! energy `C = |K|^2` in the coordinates `u_i = ln tanh(r_i/2)`:
//!
//! ```text
//! du/dt = -L K        (zero-curvature target)
//! du/dt = L (K_target - K)   (prescribed-curvature variant)
//! ```
//!
//! [`integrate`] advances the flow with an adaptive embedded Runge-Kutta
//! pair, rejecting any step that increases the (modified) Calabi energy or
//! drives a coordinate against the blow-up guard. [`newton_solve`] finds the
//! packing with prescribed curvature directly, exploiting that the curvature
//! map has the positive definite Jacobian `L`. [`ricci_potential`] evaluates
//! the convex potential whose gradient is `K - K(u_0)`; it is a Lyapunov
//! function of the prescribed-curvature flow and certifies uniqueness.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::hypgeom::{GeometryError, GeometryState};
use crate::laplacian::{DualLaplacian, LinalgError};
use crate::linalg;

mod integrate;
mod newton;
mod potential;

pub use integrate::{integrate, radius_floor_check, FloorViolation, RadiusFloorReport};
pub use newton::{newton_solve, NewtonError, NewtonSolution};
pub use potential::{
    probe_ray, properness_probe, ricci_potential, ricci_potential_polyline, PropernessReport,
    RayProbe, RicciPotentialValue,
};

#[derive(Debug, Clone, PartialEq)]
pub enum FlowError {
    Geometry(GeometryError),
    Linalg(LinalgError),
    DimensionMismatch { expected: usize, got: usize },
    /// A config field outside its stated range.
    Config { what: &'static str, value: f64 },
    /// The adaptive quadrature exhausted its subdivision budget.
    QuadratureFailure { requested: f64, achieved: f64 },
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::Geometry(e) => write!(f, "geometry: {e}"),
            FlowError::Linalg(e) => write!(f, "linear algebra: {e}"),
            FlowError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            FlowError::Config { what, value } => write!(f, "config: {what} out of range ({value})"),
            FlowError::QuadratureFailure { requested, achieved } => {
                write!(f, "quadrature tolerance {requested:.1e} not reached (best {achieved:.1e})")
            }
        }
    }
}

impl core::error::Error for FlowError {}

impl From<GeometryError> for FlowError {
    fn from(e: GeometryError) -> Self {
        FlowError::Geometry(e)
    }
}

impl From<LinalgError> for FlowError {
    fn from(e: LinalgError) -> Self {
        FlowError::Linalg(e)
    }
}

/// Parameters of a flow run.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    /// Prescribed curvature target; `None` means zero curvature.
    pub target: Option<Vec<f64>>,
    /// Initial step size.
    pub h0: f64,
    /// Step size cap.
    pub h_max: f64,
    /// Local error tolerance of the embedded pair (absolute and relative).
    pub step_tol: f64,
    /// Stop once `max_i |K_i - target_i| < tol`.
    pub tol: f64,
    pub t_max: f64,
    pub max_steps: usize,
    /// Abort threshold: reject states with any `u_i > -blowup_guard`
    /// (`r_i -> inf`).
    pub blowup_guard: f64,
    /// Diagnostic curvature ceiling (must stay below `2*pi`); samples whose
    /// max curvature exceeds it are flagged, not rejected.
    pub curvature_ceiling: f64,
    /// Fraction of trailing samples used for the fitted energy decay rate.
    pub rate_window: f64,
    /// Record the smallest Laplacian eigenvalue at every accepted sample.
    pub record_lambda1: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            target: None,
            h0: 1e-2,
            h_max: 10.0,
            // local stepping errors accumulate into a curvature noise floor
            // of roughly step_tol * |L|, so this sits two decades under the
            // default stop tolerance
            step_tol: 1e-10,
            tol: 1e-8,
            t_max: 1e4,
            max_steps: 200_000,
            blowup_guard: 1e-12,
            curvature_ceiling: 6.0,
            rate_window: 0.25,
            record_lambda1: false,
        }
    }
}

impl FlowConfig {
    pub(crate) fn validate(&self, n: usize) -> Result<(), FlowError> {
        if let Some(t) = &self.target
            && t.len() != n
        {
            return Err(FlowError::DimensionMismatch { expected: n, got: t.len() });
        }
        for (what, value, ok) in [
            ("h0", self.h0, self.h0 > 0.0),
            ("h_max", self.h_max, self.h_max > 0.0),
            ("step_tol", self.step_tol, self.step_tol > 0.0),
            ("tol", self.tol, self.tol > 0.0),
            ("t_max", self.t_max, self.t_max > 0.0),
            ("blowup_guard", self.blowup_guard, self.blowup_guard > 0.0),
            (
                "curvature_ceiling",
                self.curvature_ceiling,
                self.curvature_ceiling < 2.0 * core::f64::consts::PI,
            ),
            ("rate_window", self.rate_window, (0.0..=1.0).contains(&self.rate_window)),
        ] {
            if !ok || !value.is_finite() {
                return Err(FlowError::Config { what, value });
            }
        }
        Ok(())
    }
}

/// Why a flow run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// `max |K - target| < tol`.
    Converged,
    MaxTime,
    MaxSteps,
    /// Step size underflow while pinned against the `u < 0` guard
    /// (radius blow-up).
    BlowupGuard,
    /// Step size underflow for any other reason.
    StepFailure,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::Converged => "converged",
            Termination::MaxTime => "max-time",
            Termination::MaxSteps => "max-steps",
            Termination::BlowupGuard => "blowup-guard",
            Termination::StepFailure => "step-failure",
        };
        f.write_str(s)
    }
}

/// One accepted state of a flow run.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSample {
    pub t: f64,
    pub u: Vec<f64>,
    pub curvature: Vec<f64>,
    /// Modified Calabi energy `|K - target|^2`.
    pub energy: f64,
    /// Step that produced this sample (0 for the initial sample).
    pub h_used: f64,
    /// Smallest Laplacian eigenvalue, when recorded.
    pub lambda1: Option<f64>,
}

impl FlowSample {
    pub fn max_abs_curvature(&self) -> f64 {
        linalg::norm_inf(&self.curvature)
    }

    pub fn max_curvature(&self) -> f64 {
        self.curvature.iter().fold(f64::NEG_INFINITY, |m, &k| m.max(k))
    }
}

/// Time-stamped record of a flow run.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory {
    pub samples: Vec<FlowSample>,
    pub termination: Termination,
    /// Least-squares slope of `ln energy` over the trailing window, when
    /// enough positive-energy samples exist.
    pub fitted_rate: Option<f64>,
    /// Indices of samples whose max curvature exceeded the configured
    /// ceiling.
    pub ceiling_hits: Vec<usize>,
}

impl FlowTrajectory {
    pub fn initial(&self) -> &FlowSample {
        &self.samples[0]
    }

    pub fn last(&self) -> &FlowSample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    /// Accepted steps (samples minus the initial one).
    pub fn steps(&self) -> usize {
        self.samples.len() - 1
    }
}

/// Least-squares slope of `ln energy` against `t` over the last `window`
/// fraction of samples.
pub(crate) fn fit_log_energy_slope(samples: &[FlowSample], window: f64) -> Option<f64> {
    let n = samples.len();
    if n < 2 {
        return None;
    }
    let take = (libm::ceil(n as f64 * window) as usize).clamp(2, n);
    let tail = &samples[n - take..];
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .filter(|s| s.energy > 0.0)
        .map(|s| (s.t, crate::fp::ln(s.energy)))
        .collect();
    if pts.len() < 2 || pts[0].0 == pts[pts.len() - 1].0 {
        return None;
    }
    let m = pts.len() as f64;
    let tbar = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ybar = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(t, y) in &pts {
        num += (t - tbar) * (y - ybar);
        den += (t - tbar) * (t - tbar);
    }
    if den == 0.0 { None } else { Some(num / den) }
}

/// The (modified) combinatorial Calabi energy `sum_i (K_i - target_i)^2`.
pub fn calabi_energy(geometry: &GeometryState, target: &[f64]) -> Result<f64, FlowError> {
    if geometry.curvature.len() != target.len() {
        return Err(FlowError::DimensionMismatch {
            expected: geometry.curvature.len(),
            got: target.len(),
        });
    }
    Ok(energy_of(&geometry.curvature, target))
}

pub(crate) fn energy_of(curvature: &[f64], target: &[f64]) -> f64 {
    curvature.iter().zip(target).map(|(k, t)| (k - t) * (k - t)).sum()
}

/// Flow velocity `L (target - K)`; with a zero target this is
/// `-L K = -grad C / 2`.
pub fn flow_velocity(
    lap: &DualLaplacian,
    curvature: &[f64],
    target: &[f64],
) -> Result<Vec<f64>, FlowError> {
    if curvature.len() != target.len() {
        return Err(FlowError::DimensionMismatch { expected: curvature.len(), got: target.len() });
    }
    let diff: Vec<f64> = target.iter().zip(curvature).map(|(t, k)| t - k).collect();
    Ok(lap.mul_vec(&diff)?)
}

/// Energy slack allowed for an accepted step (rounding headroom).
pub(crate) fn energy_slack(energy: f64) -> f64 {
    1e-12 * (1.0 + energy)
}

pub(crate) fn target_or_zeros(config: &FlowConfig, n: usize) -> Vec<f64> {
    config.target.clone().unwrap_or_else(|| alloc::vec![0.0; n])
}

/// Path description attached to a potential value.
pub(crate) fn segment_path() -> String {
    String::from("segment")
}
