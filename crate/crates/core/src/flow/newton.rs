//! Damped Newton iteration on the curvature map.
//!
//! Solves `K(u) = target` using the exact Jacobian `L = dK/du`: each
//! iteration solves `L delta = target - K`, clips the step to stay strictly
//! inside the negative orthant, and backtracks on the residual norm. Because
//! the underlying potential is strictly convex with Hessian `L`, a solution
//! is unique when it exists, so the result is independent of the starting
//! point.

use alloc::vec::Vec;
use core::fmt;

use crate::hypgeom::{self, GeometryError, WeightedPacking};
use crate::laplacian::{DualLaplacian, LinalgError};
use crate::linalg;
use crate::mesh::{TriangulatedSurface, WeightAssignment};

/// Hard wall keeping iterates strictly below zero (matches the integrator's
/// default blow-up guard).
const EPS_U: f64 = 1e-12;
const MAX_BACKTRACKS: usize = 50;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum NewtonError {
    Geometry(GeometryError),
    Linalg(LinalgError),
    /// Iteration budget or line search exhausted; reports the last residual
    /// `max_i |K_i - target_i|`. Expected when no packing with the requested
    /// curvature exists.
    NoConvergence { iterations: usize, residual: f64 },
    /// The iterate is pinned against the `u < 0` wall (radius blow-up).
    BlowupGuard { iterations: usize },
}

impl fmt::Display for NewtonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NewtonError::Geometry(e) => write!(f, "geometry: {e}"),
            NewtonError::Linalg(e) => write!(f, "linear algebra: {e}"),
            NewtonError::NoConvergence { iterations, residual } => {
                write!(f, "no convergence after {iterations} iterations (residual {residual:.3e})")
            }
            NewtonError::BlowupGuard { iterations } => {
                write!(f, "iterate pinned at the blow-up guard after {iterations} iterations")
            }
        }
    }
}

impl core::error::Error for NewtonError {}

impl From<GeometryError> for NewtonError {
    fn from(e: GeometryError) -> Self {
        NewtonError::Geometry(e)
    }
}

impl From<LinalgError> for NewtonError {
    fn from(e: LinalgError) -> Self {
        NewtonError::Linalg(e)
    }
}

/// A found packing with its iteration diagnostics.
#[derive(Debug, Clone)]
pub struct NewtonSolution {
    pub packing: WeightedPacking,
    pub iterations: usize,
    /// Final `max_i |K_i - target_i|`.
    pub residual: f64,
}

fn residuals(
    surface: &TriangulatedSurface,
    packing: &WeightedPacking,
    target: &[f64],
) -> Result<(Vec<f64>, f64, f64), GeometryError> {
    let geom = hypgeom::curvatures(surface, packing)?;
    let g: Vec<f64> = geom.curvature.iter().zip(target).map(|(k, t)| k - t).collect();
    let inf = linalg::norm_inf(&g);
    let two = linalg::norm2(&g);
    Ok((g, inf, two))
}

/// Newton iteration for the packing with curvature `target`, starting from
/// `u_init` (all entries strictly negative). Returns once
/// `max_i |K_i - target_i| < tol`.
pub fn newton_solve(
    surface: &TriangulatedSurface,
    weights: &WeightAssignment,
    target: &[f64],
    u_init: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<NewtonSolution, NewtonError> {
    let n = surface.vertex_count();
    if target.len() != n {
        return Err(NewtonError::Geometry(GeometryError::DimensionMismatch {
            expected: n,
            got: target.len(),
        }));
    }
    if tol <= 0.0 || tol.is_nan() {
        return Err(NewtonError::Geometry(GeometryError::Domain { what: "tol", value: tol }));
    }
    let mut packing = WeightedPacking::from_u(surface, u_init.to_vec(), weights.clone())?;
    let (mut g, mut res_inf, mut res_two) = residuals(surface, &packing, target)?;

    for iteration in 0..max_iterations {
        if res_inf < tol {
            return Ok(NewtonSolution { packing, iterations: iteration, residual: res_inf });
        }
        let lap = DualLaplacian::assemble(surface, &packing)?;
        // the Jacobian is positive definite on the interior but degenerates
        // numerically when the iterate escapes toward the orthant boundary
        // (the no-solution mode); report that as non-convergence
        let chol = match lap.cholesky() {
            Ok(c) => c,
            Err(LinalgError::NotPositiveDefinite) => {
                return Err(NewtonError::NoConvergence {
                    iterations: iteration,
                    residual: res_inf,
                });
            }
            Err(e) => return Err(NewtonError::Linalg(e)),
        };
        let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        let delta = chol.solve(&rhs);

        // largest multiple of delta keeping every u_i <= -EPS_U
        let u = packing.u();
        let mut alpha_max = f64::INFINITY;
        for (ui, di) in u.iter().zip(&delta) {
            if *di > 0.0 {
                alpha_max = alpha_max.min((-EPS_U - ui) / di);
            }
        }
        if alpha_max <= 1e-12 {
            return Err(NewtonError::BlowupGuard { iterations: iteration });
        }
        let mut alpha = if alpha_max > 1.0 { 1.0 } else { 0.95 * alpha_max };

        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(ui, di)| ui + alpha * di).collect();
            let mut candidate = packing.clone();
            if candidate.set_u(&trial).is_ok()
                && let Ok((g_new, inf_new, two_new)) = residuals(surface, &candidate, target)
                && two_new <= (1.0 - ARMIJO * alpha) * res_two
            {
                packing = candidate;
                g = g_new;
                res_inf = inf_new;
                res_two = two_new;
                accepted = true;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-14 {
                break;
            }
        }
        if !accepted {
            return Err(NewtonError::NoConvergence {
                iterations: iteration,
                residual: res_inf,
            });
        }
    }
    if res_inf < tol {
        return Ok(NewtonSolution { packing, iterations: max_iterations, residual: res_inf });
    }
    Err(NewtonError::NoConvergence { iterations: max_iterations, residual: res_inf })
}
