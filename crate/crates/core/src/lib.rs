//! Hyperbolic circle packing geometry on closed triangulated surfaces.
//!
//! A circle packing metric assigns a positive radius to every vertex of a
//! triangulated surface; together with an intersection-angle weight in
//! `[0, pi/2]` per edge, the hyperbolic cosine law turns every face into a
//! hyperbolic triangle. The combinatorial curvature at a vertex is `2*pi`
//! minus the incident angles. This crate computes that geometry and drives
//! the curvature to a target (zero by default) via the combinatorial Calabi
//! flow `du/dt = L(K_target - K)`, where `L = dK/du` is the discrete
//! dual-Laplacian, with a Newton solver on the convex curvature potential as
//! an independent alternative.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature for embedded use. All floating-point kernels go through
//! `libm`, so results do not depend on the feature selection.
//!
//! Modules:
//! - [`mesh`]: combinatorics of closed triangulated surfaces, edge weights,
//!   and the combinatorial obstruction checker for zero-curvature packings.
//! - [`hypgeom`]: per-triangle hyperbolic geometry (lengths, angles, areas,
//!   curvatures) and the angle derivatives.
//! - [`laplacian`]: assembly and spectral diagnostics of the dual-Laplacian.
//! - [`flow`]: the Calabi flow integrator, prescribed-curvature variant,
//!   Newton solver, and the curvature potential.
//!
//! ```
//! use calabi_core::hypgeom::{curvatures, WeightedPacking};
//! use calabi_core::mesh::{TriangulatedSurface, WeightAssignment};
//!
//! let faces = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
//! let surface = TriangulatedSurface::build(4, &faces)?;
//! assert_eq!(surface.euler_characteristic(), 2);
//!
//! let weights = WeightAssignment::zero(&surface);
//! let packing = WeightedPacking::from_radii(&surface, vec![1.0; 4], weights)?;
//! let geometry = curvatures(&surface, &packing)?;
//!
//! // Gauss-Bonnet: sum K_i = 2 pi chi + total area
//! let sum: f64 = geometry.curvature.iter().sum();
//! let expect = 4.0 * core::f64::consts::PI + geometry.total_area;
//! assert!((sum - expect).abs() < 1e-10);
//! # Ok::<(), Box<dyn core::error::Error>>(())
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod flow;
pub mod hypgeom;
pub mod laplacian;
pub mod mesh;

mod fp;
mod linalg;

pub use flow::{
    FloorViolation, FlowConfig, FlowError, FlowSample, FlowTrajectory, NewtonError,
    NewtonSolution, PropernessReport, RadiusFloorReport, RayProbe, RicciPotentialValue,
    Termination,
};
pub use hypgeom::{GeometryError, GeometryState, KernelBounds, WeightedPacking};
pub use laplacian::{CholeskyFactor, DualLaplacian, LinalgError};
pub use mesh::{
    CycleViolation, MeshError, ObstructionReport, TriangulatedSurface, WeightAssignment,
    WeightError,
};
