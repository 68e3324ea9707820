//! Shared fixtures and independent numerical oracles for the integration
//! tests. Nothing here calls into the code paths it is used to check: the
//! eigensolver is a dense Jacobi sweep, derivatives come from central
//! differences.

#![allow(dead_code)]

use calabi_core::hypgeom::{curvatures, WeightedPacking};
use calabi_core::mesh::{TriangulatedSurface, WeightAssignment};
use rand::Rng;

pub const TETRA_MESH: &str = include_str!("../../../../fixtures/tetrahedron.mesh");
pub const OCTA_MESH: &str = include_str!("../../../../fixtures/octahedron.mesh");
pub const TORUS_MESH: &str = include_str!("../../../../fixtures/torus7.mesh");
pub const GENUS2_MESH: &str = include_str!("../../../../fixtures/genus2_10.mesh");

/// Parses the fixture format: `N F` then `F` index triples; `#` comments and
/// blank lines ignored.
pub fn parse_mesh(text: &str) -> (usize, Vec<[usize; 3]>) {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().expect("header");
    let mut it = header.split_whitespace();
    let n: usize = it.next().unwrap().parse().unwrap();
    let f: usize = it.next().unwrap().parse().unwrap();
    let faces: Vec<[usize; 3]> = lines
        .take(f)
        .map(|l| {
            let v: Vec<usize> = l.split_whitespace().map(|t| t.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert_eq!(faces.len(), f);
    (n, faces)
}

pub fn surface_from(text: &str) -> TriangulatedSurface {
    let (n, faces) = parse_mesh(text);
    TriangulatedSurface::build(n, &faces).unwrap()
}

pub fn tetrahedron() -> TriangulatedSurface {
    surface_from(TETRA_MESH)
}

pub fn octahedron() -> TriangulatedSurface {
    surface_from(OCTA_MESH)
}

pub fn torus7() -> TriangulatedSurface {
    surface_from(TORUS_MESH)
}

pub fn genus2() -> TriangulatedSurface {
    surface_from(GENUS2_MESH)
}

pub fn all_fixtures() -> Vec<(&'static str, TriangulatedSurface)> {
    vec![
        ("tetrahedron", tetrahedron()),
        ("octahedron", octahedron()),
        ("torus7", torus7()),
        ("genus2", genus2()),
    ]
}

pub fn log_uniform_radii<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| (rng.gen_range(lo.ln()..hi.ln())).exp()).collect()
}

pub fn random_weights<R: Rng>(rng: &mut R, surface: &TriangulatedSurface) -> WeightAssignment {
    let phi: Vec<f64> = (0..surface.edge_count())
        .map(|_| rng.gen_range(0.0..std::f64::consts::FRAC_PI_2))
        .collect();
    WeightAssignment::from_vec(surface, phi).unwrap()
}

/// Curvature vector at flow coordinates `u`.
pub fn curvature_at(
    surface: &TriangulatedSurface,
    weights: &WeightAssignment,
    u: &[f64],
) -> Vec<f64> {
    let p = WeightedPacking::from_u(surface, u.to_vec(), weights.clone()).unwrap();
    curvatures(surface, &p).unwrap().curvature
}

/// Central-difference column `d K / d u_j`.
pub fn fd_curvature_column(
    surface: &TriangulatedSurface,
    weights: &WeightAssignment,
    u: &[f64],
    j: usize,
    h: f64,
) -> Vec<f64> {
    let mut up = u.to_vec();
    let mut dn = u.to_vec();
    up[j] += h;
    dn[j] -= h;
    let kp = curvature_at(surface, weights, &up);
    let kn = curvature_at(surface, weights, &dn);
    kp.iter().zip(&kn).map(|(a, b)| (a - b) / (2.0 * h)).collect()
}

/// All eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations,
/// sorted ascending. Reference oracle only.
pub fn dense_symmetric_eigenvalues(n: usize, matrix: &[f64]) -> Vec<f64> {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    for _sweep in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() < 1e-13 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

pub fn vec_rel_err(got: &[f64], want: &[f64]) -> f64 {
    let num: f64 = got
        .iter()
        .zip(want)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let den: f64 = want.iter().map(|b| b * b).sum::<f64>().sqrt();
    num / den.max(1e-300)
}
