//! The discrete dual-Laplacian `L = dK/du` of a packing.
//!
//! `L` is symmetric positive definite with the structure `L = A + L_B`: a
//! positive diagonal `A` of area derivatives plus the graph Laplacian of
//! positive edge coefficients `B`. Entries:
//!
//! ```text
//! L_ii = A_i + sum_{j ~ i} B_ij        L_ij = -B_ij (j ~ i)        L_ij = 0 otherwise
//! ```
//!
//! `B_ij` collects `d theta_i / d u_j` over the two faces flanking edge
//! `{i,j}`; it is computed once per edge, so `L = L^T` holds bit-exactly.
//! `A_i` is assembled from the same per-face angle-derivative blocks through
//! the area identity `Area = pi - (angle sum)`.
//!
//! Storage is sparse (one diagonal plus one coefficient per edge); only the
//! Cholesky-based solves densify internally.

use alloc::vec::Vec;
use core::fmt;

use crate::fp;
use crate::hypgeom::{self, GeometryError, WeightedPacking};
use crate::linalg::{self, DenseCholesky};
use crate::mesh::TriangulatedSurface;

/// Failures in the dense factorization / eigenvalue routines.
#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    NotPositiveDefinite,
    ConvergenceFailure { iterations: usize, residual: f64 },
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::NotPositiveDefinite => write!(f, "matrix is not positive definite"),
            LinalgError::ConvergenceFailure { iterations, residual } => {
                write!(f, "eigensolver stalled after {iterations} iterations (residual {residual:.3e})")
            }
            LinalgError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
        }
    }
}

impl core::error::Error for LinalgError {}

/// Residual tolerance of [`DualLaplacian::min_eigenvalue`], applied to
/// `|L y - rho y|` relative to `max(1, rho)`.
const EIGEN_TOL: f64 = 1e-10;
const EIGEN_MAX_ITER: usize = 500;

/// Symmetric sparse `N x N` matrix `L = A + L_B` attached to the adjacency
/// of the surface it was assembled on.
#[derive(Debug, Clone, PartialEq)]
pub struct DualLaplacian {
    vertex_count: usize,
    edges: Vec<[usize; 2]>,
    vertex_edges: Vec<Vec<(usize, usize)>>,
    /// Diagonal part `A_i` (area derivatives), strictly positive.
    a: Vec<f64>,
    /// Edge coefficients `B_ij > 0`, indexed like `edges`.
    b: Vec<f64>,
    /// Cached full diagonal `A_i + sum B_ij`.
    diag: Vec<f64>,
}

impl DualLaplacian {
    /// Assembles `L` for `packing` on `surface` from per-face angle
    /// derivative blocks.
    pub fn assemble(
        surface: &TriangulatedSurface,
        packing: &WeightedPacking,
    ) -> Result<Self, GeometryError> {
        let n = surface.vertex_count();
        if packing.vertex_count() != n {
            return Err(GeometryError::DimensionMismatch { expected: n, got: packing.vertex_count() });
        }
        let r = packing.radii();
        let weights = packing.weights();
        let mut a = alloc::vec![0.0; n];
        let mut b = alloc::vec![0.0; surface.edge_count()];

        for (fi, &tri) in surface.faces().iter().enumerate() {
            let [i, j, k] = tri;
            let phi = |p: usize, q: usize| weights.phi(surface.edge_index(p, q).unwrap());
            let g = hypgeom::face_u_gradients(
                &[r[i], r[j], r[k]],
                &[phi(j, k), phi(i, k), phi(i, j)],
            )
            .map_err(|source| GeometryError::AtFace { face: fi, source: alloc::boxed::Box::new(source) })?;

            // edge contributions: d theta_min / d u_max, stored once per edge
            for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
                let ei = surface.edge_index(tri[p], tri[q]).unwrap();
                b[ei] += g[p][q];
            }
            // diagonal: A_i += -(d theta_i + d theta_j + d theta_k) / d u_i
            for e in 0..3 {
                a[tri[e]] -= g[0][e] + g[1][e] + g[2][e];
            }
        }

        let mut diag = a.clone();
        let mut vertex_edges = alloc::vec![Vec::new(); n];
        for (ei, &[p, q]) in surface.edges().iter().enumerate() {
            diag[p] += b[ei];
            diag[q] += b[ei];
            vertex_edges[p].push((ei, q));
            vertex_edges[q].push((ei, p));
        }
        Ok(Self {
            vertex_count: n,
            edges: surface.edges().to_vec(),
            vertex_edges,
            a,
            b,
            diag,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// The positive diagonal part `A`.
    pub fn area_diagonal(&self) -> &[f64] {
        &self.a
    }

    /// The positive edge coefficients `B`, indexed like [`Self::edges`].
    pub fn edge_coefficients(&self) -> &[f64] {
        &self.b
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Matrix entry `L_ij`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        for &(ei, other) in &self.vertex_edges[i] {
            if other == j {
                return -self.b[ei];
            }
        }
        0.0
    }

    /// `L f`.
    pub fn mul_vec(&self, f: &[f64]) -> Result<Vec<f64>, LinalgError> {
        self.check_dim(f)?;
        let mut out: Vec<f64> = self.diag.iter().zip(f).map(|(d, x)| d * x).collect();
        for (ei, &[p, q]) in self.edges.iter().enumerate() {
            out[p] -= self.b[ei] * f[q];
            out[q] -= self.b[ei] * f[p];
        }
        Ok(out)
    }

    /// The discrete Laplace operator `Delta f = -L f`, evaluated in the
    /// component form `Delta f_i = sum_{j~i} B_ij (f_j - f_i) - A_i f_i`.
    pub fn apply_laplacian(&self, f: &[f64]) -> Result<Vec<f64>, LinalgError> {
        self.check_dim(f)?;
        let mut out = alloc::vec![0.0; self.vertex_count];
        for i in 0..self.vertex_count {
            let mut acc = -self.a[i] * f[i];
            for &(ei, j) in &self.vertex_edges[i] {
                acc += self.b[ei] * (f[j] - f[i]);
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Quadratic form of the graph part alone:
    /// `x^T L_B x = sum_{ij in E} B_ij (x_i - x_j)^2`.
    pub fn graph_quadratic_form(&self, x: &[f64]) -> Result<f64, LinalgError> {
        self.check_dim(x)?;
        Ok(self
            .edges
            .iter()
            .zip(&self.b)
            .map(|(&[p, q], &b)| b * (x[p] - x[q]) * (x[p] - x[q]))
            .sum())
    }

    fn check_dim(&self, f: &[f64]) -> Result<(), LinalgError> {
        if f.len() != self.vertex_count {
            return Err(LinalgError::DimensionMismatch {
                expected: self.vertex_count,
                got: f.len(),
            });
        }
        Ok(())
    }

    /// Dense row-major copy (tests, dumps, factorization).
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.vertex_count;
        let mut dense = alloc::vec![0.0; n * n];
        for i in 0..n {
            dense[i * n + i] = self.diag[i];
        }
        for (ei, &[p, q]) in self.edges.iter().enumerate() {
            dense[p * self.vertex_count + q] = -self.b[ei];
            dense[q * self.vertex_count + p] = -self.b[ei];
        }
        dense
    }

    /// Cholesky factorization of `L`; fails iff `L` is not numerically
    /// positive definite.
    pub fn cholesky(&self) -> Result<CholeskyFactor, LinalgError> {
        let dense = self.to_dense();
        DenseCholesky::factor(self.vertex_count, &dense)
            .map(|inner| CholeskyFactor { inner })
            .ok_or(LinalgError::NotPositiveDefinite)
    }

    /// Solves `L x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        self.check_dim(rhs)?;
        Ok(self.cholesky()?.solve(rhs))
    }

    /// Smallest eigenvalue of `L` by inverse iteration with Cholesky solves,
    /// re-shifting toward the current Rayleigh quotient when progress
    /// stalls. Stops when the eigenpair residual drops below `1e-10`
    /// relative to `max(1, rho)`.
    pub fn min_eigenvalue(&self) -> Result<f64, LinalgError> {
        let n = self.vertex_count;
        let mut factor = self.cholesky()?.inner;
        let mut sigma = 0.0;

        // deterministic start with all spectral components present
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * fp::sin(1.0 + i as f64)).collect();
        let nx = linalg::norm2(&x);
        x.iter_mut().for_each(|v| *v /= nx);

        let mut last_residual = f64::INFINITY;
        for iter in 0..EIGEN_MAX_ITER {
            let mut y = factor.solve(&x);
            let ny = linalg::norm2(&y);
            if !ny.is_finite() || ny == 0.0 {
                return Err(LinalgError::ConvergenceFailure { iterations: iter, residual: last_residual });
            }
            y.iter_mut().for_each(|v| *v /= ny);
            let ly = self.mul_vec(&y)?;
            let rho = linalg::dot(&y, &ly);
            let residual = {
                let mut r2 = 0.0;
                for i in 0..n {
                    let d = ly[i] - rho * y[i];
                    r2 += d * d;
                }
                fp::sqrt(r2)
            };
            if residual <= EIGEN_TOL * rho.abs().max(1.0) {
                return Ok(rho);
            }
            // shift toward the current estimate when progress stalls; the
            // shifted matrix must stay positive definite for Cholesky
            if iter % 10 == 9 && residual > 0.5 * last_residual {
                let mut proposal = rho - 5.0 * residual;
                while proposal > sigma {
                    let mut dense = self.to_dense();
                    for i in 0..n {
                        dense[i * n + i] -= proposal;
                    }
                    if let Some(f) = DenseCholesky::factor(n, &dense) {
                        factor = f;
                        sigma = proposal;
                        break;
                    }
                    proposal = sigma + 0.5 * (proposal - sigma);
                    if proposal - sigma < 1e-300 {
                        break;
                    }
                }
            }
            last_residual = residual;
            x = y;
        }
        Err(LinalgError::ConvergenceFailure { iterations: EIGEN_MAX_ITER, residual: last_residual })
    }
}

/// Cholesky factor of an assembled Laplacian.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    inner: DenseCholesky,
}

impl CholeskyFactor {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.inner.solve(rhs)
    }

    pub fn n(&self) -> usize {
        self.inner.n()
    }
}
