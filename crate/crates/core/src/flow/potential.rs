//! The curvature potential and its properness probe.
//!
//! For a base point `u0`, the potential
//!
//! ```text
//! f(u) = integral over [u0 -> u] of sum_i (K_i - K_i(u0)) du_i
//! ```
//!
//! is well defined because `sum_i K_i du_i` is a closed 1-form; its gradient
//! is `K - K(u0)` and its Hessian is the dual-Laplacian, so `f` is strictly
//! convex with minimum 0 at `u0`. Segments are integrated with adaptive
//! 15-point Gauss-Legendre panels.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hypgeom::{self, GeometryError, WeightedPacking};
use crate::linalg;
use crate::mesh::{TriangulatedSurface, WeightAssignment};

use super::{segment_path, FlowError};

/// Absolute/relative tolerance of the adaptive segment quadrature.
const QUAD_TOL: f64 = 1e-11;
const QUAD_MAX_DEPTH: usize = 24;
/// Sample points per probe ray (excluding the base point).
const RAY_SAMPLES: usize = 16;

/// 15-point Gauss-Legendre nodes and weights on [-1, 1].
const GL15: [(f64, f64); 15] = [
    (-0.9879925180204854, 0.030753241996118647),
    (-0.937273392400706, 0.07036604748810807),
    (-0.8482065834104272, 0.10715922046717177),
    (-0.7244177313601701, 0.1395706779261539),
    (-0.5709721726085388, 0.16626920581699378),
    (-0.3941513470775634, 0.18616100001556188),
    (-0.20119409399743451, 0.19843148532711125),
    (0.0, 0.2025782419255609),
    (0.20119409399743451, 0.19843148532711125),
    (0.3941513470775634, 0.18616100001556188),
    (0.5709721726085388, 0.16626920581699378),
    (0.7244177313601701, 0.1395706779261539),
    (0.8482065834104272, 0.10715922046717177),
    (0.937273392400706, 0.07036604748810807),
    (0.9879925180204854, 0.030753241996118647),
];

fn gl15<F>(f: &mut F, a: f64, b: f64) -> Result<f64, FlowError>
where
    F: FnMut(f64) -> Result<f64, FlowError>,
{
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for &(x, w) in &GL15 {
        acc += w * f(mid + half * x)?;
    }
    Ok(acc * half)
}

fn adaptive<F>(f: &mut F, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> Result<f64, FlowError>
where
    F: FnMut(f64) -> Result<f64, FlowError>,
{
    let mid = 0.5 * (a + b);
    let left = gl15(f, a, mid)?;
    let right = gl15(f, mid, b)?;
    let refined = left + right;
    let err = (whole - refined).abs();
    if err <= tol * refined.abs().max(1.0) {
        return Ok(refined);
    }
    if depth == 0 {
        return Err(FlowError::QuadratureFailure { requested: tol, achieved: err });
    }
    Ok(adaptive(f, a, mid, left, 0.5 * tol, depth - 1)?
        + adaptive(f, mid, b, right, 0.5 * tol, depth - 1)?)
}

fn integrate_01<F>(f: &mut F) -> Result<f64, FlowError>
where
    F: FnMut(f64) -> Result<f64, FlowError>,
{
    let whole = gl15(f, 0.0, 1.0)?;
    adaptive(f, 0.0, 1.0, whole, QUAD_TOL, QUAD_MAX_DEPTH)
}

/// A potential value together with its base point and integration path.
#[derive(Debug, Clone, PartialEq)]
pub struct RicciPotentialValue {
    pub value: f64,
    pub base_point: Vec<f64>,
    /// Human-readable description of the integration path.
    pub path: String,
}

fn check_point(n: usize, u: &[f64]) -> Result<(), FlowError> {
    if u.len() != n {
        return Err(FlowError::DimensionMismatch { expected: n, got: u.len() });
    }
    for &x in u {
        if !(x.is_finite() && x < 0.0) {
            return Err(FlowError::Geometry(GeometryError::Domain {
                what: "u-coordinate",
                value: x,
            }));
        }
    }
    Ok(())
}

/// Integrand machinery shared by the potential evaluations: curvatures along
/// the segment `p + s (q - p)` contracted with `q - p`.
struct SegmentIntegrand<'a> {
    surface: &'a TriangulatedSurface,
    work: WeightedPacking,
    k0: Vec<f64>,
}

impl<'a> SegmentIntegrand<'a> {
    fn new(
        surface: &'a TriangulatedSurface,
        weights: &WeightAssignment,
        u0: &[f64],
    ) -> Result<Self, FlowError> {
        let work = WeightedPacking::from_u(surface, u0.to_vec(), weights.clone())
            .map_err(FlowError::Geometry)?;
        let k0 = hypgeom::curvatures(surface, &work)?.curvature;
        Ok(Self { surface, work, k0 })
    }

    fn segment(&mut self, p: &[f64], q: &[f64]) -> Result<f64, FlowError> {
        let dir: Vec<f64> = q.iter().zip(p).map(|(b, a)| b - a).collect();
        if linalg::norm_inf(&dir) == 0.0 {
            return Ok(0.0);
        }
        let mut point = alloc::vec![0.0; p.len()];
        let surface = self.surface;
        let work = &mut self.work;
        let k0 = &self.k0;
        let mut f = |s: f64| -> Result<f64, FlowError> {
            for i in 0..point.len() {
                point[i] = p[i] + s * dir[i];
            }
            work.set_u(&point).map_err(FlowError::Geometry)?;
            let k = hypgeom::curvatures(surface, work)?.curvature;
            Ok(k.iter().zip(k0).zip(&dir).map(|((ki, k0i), di)| (ki - k0i) * di).sum())
        };
        integrate_01(&mut f)
    }
}

/// The potential `f(u)` with base point `u0`, integrated along the straight
/// segment from `u0` to `u`.
pub fn ricci_potential(
    surface: &TriangulatedSurface,
    weights: &WeightAssignment,
    u0: &[f64],
    u: &[f64],
) -> Result<RicciPotentialValue, FlowError> {
    let n = surface.vertex_count();
    check_point(n, u0)?;
    check_point(n, u)?;
    let mut integrand = SegmentIntegrand::new(surface, weights, u0)?;
    let value = integrand.segment(u0, u)?;
    Ok(RicciPotentialValue { value, base_point: u0.to_vec(), path: segment_path() })
}

/// The same potential integrated along the polyline
/// `u0 -> points[0] -> ... -> points[last]`; by path independence this
/// equals the segment value at the final point (up to quadrature error).
pub fn ricci_potential_polyline(
    surface: &TriangulatedSurface,
    weights: &WeightAssignment,
    u0: &[f64],
    points: &[&[f64]],
) -> Result<RicciPotentialValue, FlowError> {
    let n = surface.vertex_count();
    check_point(n, u0)?;
    for p in points {
        check_point(n, p)?;
    }
    let mut integrand = SegmentIntegrand::new(surface, weights, u0)?;
    let mut value = 0.0;
    let mut prev = u0;
    for &p in points {
        value += integrand.segment(prev, p)?;
        prev = p;
    }
    let mut path = String::from("polyline(");
    {
        use core::fmt::Write;
        let _ = write!(path, "{} legs)", points.len());
    }
    Ok(RicciPotentialValue { value, base_point: u0.to_vec(), path })
}

/// Potential samples along one ray from the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct RayProbe {
    /// Unit direction (all components negative: the ray stays in the
    /// negative orthant).
    pub direction: Vec<f64>,
    /// Distances from the base point, uniformly spaced from 0.
    pub radii: Vec<f64>,
    /// Potential values at those distances (`values[0] == 0`).
    pub values: Vec<f64>,
    /// Nondecreasing beyond the first local minimum.
    pub monotone_after_first_min: bool,
    /// Final value minus the minimum along the ray.
    pub growth: f64,
}

/// Outcome of [`properness_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct PropernessReport {
    pub rays: Vec<RayProbe>,
    pub all_monotone: bool,
    /// Smallest growth observed over all rays.
    pub min_growth: f64,
}

/// Samples the potential along `u0 + rho * direction` for
/// `rho = radius_max * k / RAY_SAMPLES` and classifies monotonicity.
pub fn probe_ray(
    surface: &TriangulatedSurface,
    weights: &WeightAssignment,
    u0: &[f64],
    direction: &[f64],
    radius_max: f64,
) -> Result<RayProbe, FlowError> {
    let n = surface.vertex_count();
    check_point(n, u0)?;
    if direction.len() != n {
        return Err(FlowError::DimensionMismatch { expected: n, got: direction.len() });
    }
    if direction.iter().any(|&d| !(d.is_finite() && d <= 0.0)) || linalg::norm2(direction) == 0.0 {
        return Err(FlowError::Geometry(GeometryError::Domain {
            what: "ray direction",
            value: linalg::norm_inf(direction),
        }));
    }
    if !(radius_max > 0.0 && radius_max.is_finite()) {
        return Err(FlowError::Config { what: "radius_max", value: radius_max });
    }

    let mut integrand = SegmentIntegrand::new(surface, weights, u0)?;
    let mut radii = Vec::with_capacity(RAY_SAMPLES + 1);
    let mut values = Vec::with_capacity(RAY_SAMPLES + 1);
    radii.push(0.0);
    values.push(0.0);
    let mut prev: Vec<f64> = u0.to_vec();
    for k in 1..=RAY_SAMPLES {
        let rho = radius_max * k as f64 / RAY_SAMPLES as f64;
        let point: Vec<f64> = u0.iter().zip(direction).map(|(u, d)| u + rho * d).collect();
        let delta = integrand.segment(&prev, &point)?;
        values.push(values[k - 1] + delta);
        radii.push(rho);
        prev = point;
    }

    // first local minimum: the first index where the values stop decreasing
    let mut first_min = values.len() - 1;
    for k in 0..values.len() - 1 {
        if values[k + 1] >= values[k] {
            first_min = k;
            break;
        }
    }
    let monotone_after_first_min =
        (first_min..values.len() - 1).all(|k| values[k + 1] >= values[k] - 1e-10);
    let min_value = values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let growth = values[values.len() - 1] - min_value;
    Ok(RayProbe { direction: direction.to_vec(), radii, values, monotone_after_first_min, growth })
}

/// Numerically probes that the potential grows to infinity in every
/// direction: samples `rays` random rays inside the negative orthant up to
/// `radius_max` and reports monotonicity and growth per ray. A check, not a
/// proof.
pub fn properness_probe(
    surface: &TriangulatedSurface,
    weights: &WeightAssignment,
    u0: &[f64],
    rays: usize,
    radius_max: f64,
    seed: u64,
) -> Result<PropernessReport, FlowError> {
    let n = surface.vertex_count();
    check_point(n, u0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = Vec::with_capacity(rays);
    for _ in 0..rays {
        let mut dir: Vec<f64> = (0..n).map(|_| -(0.1 + 0.9 * rng.r#gen::<f64>())).collect();
        let norm = linalg::norm2(&dir);
        dir.iter_mut().for_each(|d| *d /= norm);
        probes.push(probe_ray(surface, weights, u0, &dir, radius_max)?);
    }
    let all_monotone = probes.iter().all(|p| p.monotone_after_first_min);
    let min_growth = probes.iter().fold(f64::INFINITY, |m, p| m.min(p.growth));
    Ok(PropernessReport { rays: probes, all_monotone, min_growth })
}
