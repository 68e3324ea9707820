//! Dual-Laplacian properties checked against independent oracles: the
//! finite-difference Jacobian of the curvature map, a dense Jacobi
//! eigensolver, and the zero-weight coefficient bounds.

mod common;

use calabi_core::hypgeom::WeightedPacking;
use calabi_core::laplacian::DualLaplacian;
use calabi_core::mesh::WeightAssignment;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for (name, surface) in all_fixtures() {
        for trial in 0..3 {
            let weights = match trial {
                0 => WeightAssignment::zero(&surface),
                1 => WeightAssignment::uniform(&surface, std::f64::consts::FRAC_PI_2).unwrap(),
                _ => random_weights(&mut rng, &surface),
            };
            let radii = log_uniform_radii(&mut rng, surface.vertex_count(), 0.1, 10.0);
            let p = WeightedPacking::from_radii(&surface, radii, weights.clone()).unwrap();
            let lap = DualLaplacian::assemble(&surface, &p).unwrap();
            let n = surface.vertex_count();
            let h = 1e-5;
            for j in 0..n {
                // u_j - h must stay negative; radii <= 10 keep u_j < -1e-4
                let fd = fd_curvature_column(&surface, &weights, p.u(), j, h);
                let col: Vec<f64> = (0..n).map(|i| lap.entry(i, j)).collect();
                let err = vec_rel_err(&fd, &col);
                assert!(err < 1e-6, "{name} trial {trial} col {j}: rel err {err:.3e}");
            }
        }
    }
}

#[test]
fn jacobian_directional_derivative() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let surface = genus2();
    let weights = random_weights(&mut rng, &surface);
    let radii = log_uniform_radii(&mut rng, surface.vertex_count(), 0.2, 5.0);
    let p = WeightedPacking::from_radii(&surface, radii, weights.clone()).unwrap();
    let lap = DualLaplacian::assemble(&surface, &p).unwrap();
    let n = surface.vertex_count();
    for _ in 0..5 {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = 1e-5;
        let up: Vec<f64> = p.u().iter().zip(&v).map(|(u, d)| u + h * d).collect();
        let dn: Vec<f64> = p.u().iter().zip(&v).map(|(u, d)| u - h * d).collect();
        let kp = curvature_at(&surface, &weights, &up);
        let kn = curvature_at(&surface, &weights, &dn);
        let fd: Vec<f64> = kp.iter().zip(&kn).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let lv = lap.mul_vec(&v).unwrap();
        let err = vec_rel_err(&fd, &lv);
        assert!(err < 1e-6, "directional rel err {err:.3e}");
    }
}

#[test]
fn positive_definite_across_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for (name, surface) in all_fixtures() {
        for trial in 0..5 {
            let weights = if trial % 2 == 0 {
                WeightAssignment::zero(&surface)
            } else {
                random_weights(&mut rng, &surface)
            };
            let radii = log_uniform_radii(&mut rng, surface.vertex_count(), 0.1, 10.0);
            let p = WeightedPacking::from_radii(&surface, radii, weights).unwrap();
            let lap = DualLaplacian::assemble(&surface, &p).unwrap();
            assert!(lap.cholesky().is_ok(), "{name} trial {trial}");
            let lambda = lap.min_eigenvalue().unwrap();
            assert!(lambda > 0.0, "{name} trial {trial}: lambda1 = {lambda}");
            for _ in 0..20 {
                let x: Vec<f64> =
                    (0..surface.vertex_count()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                assert!(lap.graph_quadratic_form(&x).unwrap() >= 0.0);
            }
        }
    }
}

#[test]
fn min_eigenvalue_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    for (name, surface) in all_fixtures() {
        for trial in 0..4 {
            let weights = if trial % 2 == 0 {
                WeightAssignment::zero(&surface)
            } else {
                random_weights(&mut rng, &surface)
            };
            let radii = log_uniform_radii(&mut rng, surface.vertex_count(), 0.2, 5.0);
            let p = WeightedPacking::from_radii(&surface, radii, weights).unwrap();
            let lap = DualLaplacian::assemble(&surface, &p).unwrap();
            let lambda = lap.min_eigenvalue().unwrap();
            let spectrum =
                dense_symmetric_eigenvalues(surface.vertex_count(), &lap.to_dense());
            assert!(
                (lambda - spectrum[0]).abs() < 1e-8 * spectrum[0].max(1.0),
                "{name} trial {trial}: {lambda} vs dense {}",
                spectrum[0]
            );
        }
    }
}

#[test]
fn symmetric_octahedron_spectrum_structure() {
    // r identical on a vertex-transitive surface: L = a I + b L_graph, and
    // the octahedron graph Laplacian has spectrum {0, 4,4,4, 6,6}; the
    // smallest eigenvalue a is attained by the constant vector
    let surface = octahedron();
    let weights = WeightAssignment::zero(&surface);
    let p = WeightedPacking::from_radii(&surface, vec![1.3; 6], weights).unwrap();
    let lap = DualLaplacian::assemble(&surface, &p).unwrap();
    let a = lap.area_diagonal()[0];
    let b = lap.edge_coefficients()[0];
    let spectrum = dense_symmetric_eigenvalues(6, &lap.to_dense());
    let expected = [a, a + 4.0 * b, a + 4.0 * b, a + 4.0 * b, a + 6.0 * b, a + 6.0 * b];
    for (got, want) in spectrum.iter().zip(expected) {
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }
    let lambda = lap.min_eigenvalue().unwrap();
    assert!((lambda - a).abs() < 1e-10);
}

#[test]
fn zero_weight_coefficient_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    let cosh1 = 1.0f64.cosh();
    for (name, surface) in [("tetrahedron", tetrahedron()), ("octahedron", octahedron())] {
        let weights = WeightAssignment::zero(&surface);
        for trial in 0..500 {
            let radii = log_uniform_radii(&mut rng, surface.vertex_count(), 0.05, 15.0);
            let p = WeightedPacking::from_radii(&surface, radii, weights.clone()).unwrap();
            let lap = DualLaplacian::assemble(&surface, &p).unwrap();
            for &b in lap.edge_coefficients() {
                assert!(b > 0.0 && b < 1.0, "{name} trial {trial}: B = {b}");
            }
            for (v, &a) in lap.area_diagonal().iter().enumerate() {
                let bound = surface.degree(v) as f64 * cosh1;
                assert!(a > 0.0 && a < bound, "{name} trial {trial}: A_{v} = {a}");
            }
        }
    }
}

#[test]
fn assembled_structure_matches_parts() {
    let mut rng = ChaCha8Rng::seed_from_u64(127);
    let surface = genus2();
    let weights = random_weights(&mut rng, &surface);
    let radii = log_uniform_radii(&mut rng, surface.vertex_count(), 0.2, 5.0);
    let p = WeightedPacking::from_radii(&surface, radii, weights).unwrap();
    let lap = DualLaplacian::assemble(&surface, &p).unwrap();
    let n = surface.vertex_count();
    for i in 0..n {
        // diagonal = A_i + sum of incident B
        let mut sum = lap.area_diagonal()[i];
        for (ei, &[a, b]) in lap.edges().iter().enumerate() {
            if a == i || b == i {
                sum += lap.edge_coefficients()[ei];
            }
        }
        assert_eq!(lap.entry(i, i), sum);
        for j in 0..n {
            assert_eq!(lap.entry(i, j), lap.entry(j, i), "bit-exact symmetry");
            if i != j && surface.edge_index(i, j).is_none() {
                assert_eq!(lap.entry(i, j), 0.0, "sparsity pattern");
            }
        }
    }
}
