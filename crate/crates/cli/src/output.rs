//! Trajectory export (CSV + JSON), reports and the matrix dump.

use std::io::Write;

use calabi_core::flow::{FlowConfig, FlowTrajectory, Termination};
use calabi_core::hypgeom::r_from_u;
use calabi_core::laplacian::DualLaplacian;
use calabi_core::mesh::TriangulatedSurface;
use serde::Serialize;

/// Version of the trajectory JSON document layout.
pub const TRAJECTORY_SCHEMA_VERSION: u32 = 1;

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

/// CSV header written by [`write_trajectory_csv`].
pub const CSV_HEADER: &str = "t,energy,max_abs_k,min_r,max_r,h_used,lambda1";

/// One row per sample: `t, energy, max|K|, min r, max r, h_used, lambda1`
/// (the last column empty when not recorded). Deterministic byte-for-byte
/// for identical trajectories.
pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &FlowTrajectory) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for s in &traj.samples {
        let (mut min_r, mut max_r) = (f64::INFINITY, f64::NEG_INFINITY);
        for &u in &s.u {
            let r = r_from_u(u);
            min_r = min_r.min(r);
            max_r = max_r.max(r);
        }
        let lambda = s.lambda1.map(fmt).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt(s.t),
            fmt(s.energy),
            fmt(s.max_abs_curvature()),
            fmt(min_r),
            fmt(max_r),
            fmt(s.h_used),
            lambda
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct MeshDoc {
    vertices: usize,
    edges: usize,
    faces: usize,
    euler_characteristic: i64,
}

#[derive(Serialize)]
struct ConfigDoc {
    target: Option<Vec<f64>>,
    h0: f64,
    h_max: f64,
    step_tol: f64,
    tol: f64,
    t_max: f64,
    max_steps: usize,
    blowup_guard: f64,
    curvature_ceiling: f64,
}

#[derive(Serialize)]
struct SampleDoc<'a> {
    t: f64,
    u: &'a [f64],
    k: &'a [f64],
    energy: f64,
    h_used: f64,
    lambda1: Option<f64>,
}

#[derive(Serialize)]
struct TrajectoryDoc<'a> {
    schema_version: u32,
    mesh: MeshDoc,
    config: ConfigDoc,
    termination: String,
    fitted_rate: Option<f64>,
    ceiling_hits: &'a [usize],
    samples: Vec<SampleDoc<'a>>,
}

pub fn termination_name(t: Termination) -> String {
    t.to_string()
}

/// Full trajectory document with per-sample `u` and `K` vectors.
pub fn trajectory_json(
    surface: &TriangulatedSurface,
    config: &FlowConfig,
    traj: &FlowTrajectory,
) -> serde_json::Value {
    let doc = TrajectoryDoc {
        schema_version: TRAJECTORY_SCHEMA_VERSION,
        mesh: MeshDoc {
            vertices: surface.vertex_count(),
            edges: surface.edge_count(),
            faces: surface.face_count(),
            euler_characteristic: surface.euler_characteristic(),
        },
        config: ConfigDoc {
            target: config.target.clone(),
            h0: config.h0,
            h_max: config.h_max,
            step_tol: config.step_tol,
            tol: config.tol,
            t_max: config.t_max,
            max_steps: config.max_steps,
            blowup_guard: config.blowup_guard,
            curvature_ceiling: config.curvature_ceiling,
        },
        termination: termination_name(traj.termination),
        fitted_rate: traj.fitted_rate,
        ceiling_hits: &traj.ceiling_hits,
        samples: traj
            .samples
            .iter()
            .map(|s| SampleDoc {
                t: s.t,
                u: &s.u,
                k: &s.curvature,
                energy: s.energy,
                h_used: s.h_used,
                lambda1: s.lambda1,
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("trajectory serializes")
}

/// Coordinate dump of the assembled Laplacian: one `row col value` line per
/// stored nonzero (full symmetric pattern), 0-based, sorted by row then
/// column.
pub fn write_matrix_coordinate<W: Write>(mut w: W, lap: &DualLaplacian) -> std::io::Result<()> {
    let n = lap.vertex_count();
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        entries.push((i, i, lap.entry(i, i)));
    }
    for (ei, &[a, b]) in lap.edges().iter().enumerate() {
        let v = -lap.edge_coefficients()[ei];
        entries.push((a, b, v));
        entries.push((b, a, v));
    }
    entries.sort_by_key(|&(r, c, _)| (r, c));
    writeln!(w, "{} {} {}", n, n, entries.len())?;
    for (r, c, v) in entries {
        writeln!(w, "{r} {c} {}", fmt(v))?;
    }
    Ok(())
}
