//! Subcommand implementations.

use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

use calabi_core::flow::{
    integrate, newton_solve, properness_probe, ricci_potential, FlowConfig, FlowTrajectory,
    Termination,
};
use calabi_core::hypgeom::{curvatures, GeometryState, WeightedPacking};
use calabi_core::laplacian::DualLaplacian;
use calabi_core::mesh::{check_thurston_conditions, TriangulatedSurface, WeightAssignment};
use serde_json::json;

use crate::io::{load_mesh, load_vector, load_weights};
use crate::output::{termination_name, trajectory_json, write_matrix_coordinate, write_trajectory_csv};
use crate::{
    BenchArgs, CheckArgs, CliError, CommonArgs, CurvatureArgs, FlowArgs, PotentialArgs, SolveArgs,
};

struct Loaded {
    surface: TriangulatedSurface,
    weights: WeightAssignment,
}

fn load_common(common: &CommonArgs) -> Result<Loaded, CliError> {
    let surface = load_mesh(&common.mesh)?;
    let weights = match &common.weights {
        Some(path) => load_weights(path, &surface)?,
        None => WeightAssignment::zero(&surface),
    };
    Ok(Loaded { surface, weights })
}

fn load_target(
    path: &Option<std::path::PathBuf>,
    n: usize,
) -> Result<Option<Vec<f64>>, CliError> {
    path.as_ref().map(|p| load_vector(p, n)).transpose()
}

/// Advisory sanity check on a prescribed curvature target: necessary (not
/// sufficient) conditions are `K_i < 2 pi` and `sum K > 2 pi chi` (the total
/// area must come out positive). Admissibility itself has no effective
/// criterion; solvers report non-convergence instead.
fn warn_target_advisory(surface: &TriangulatedSurface, target: &[f64], quiet: bool) {
    if quiet {
        return;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    if target.iter().any(|&t| t >= two_pi) {
        eprintln!("warning: target curvature has entries >= 2 pi; no packing attains that");
    }
    let sum: f64 = target.iter().sum();
    let bound = two_pi * surface.euler_characteristic() as f64;
    if sum <= bound {
        eprintln!(
            "warning: target curvature sums to {sum:.6} <= 2 pi chi = {bound:.6}; \
             the induced area would be nonpositive"
        );
    }
}

fn mesh_stats_json(surface: &TriangulatedSurface) -> serde_json::Value {
    json!({
        "vertices": surface.vertex_count(),
        "edges": surface.edge_count(),
        "faces": surface.face_count(),
        "euler_characteristic": surface.euler_characteristic(),
        "max_degree": surface.max_degree(),
    })
}

fn print_mesh_stats(surface: &TriangulatedSurface) {
    println!(
        "mesh: N={} |E|={} |F|={} chi={} max_degree={}",
        surface.vertex_count(),
        surface.edge_count(),
        surface.face_count(),
        surface.euler_characteristic(),
        surface.max_degree()
    );
}

pub fn check(args: CheckArgs) -> Result<(), CliError> {
    let Loaded { surface, weights } = load_common(&args.common)?;
    let report = check_thurston_conditions(&surface, &weights);
    if args.common.json {
        let cycles = |list: &[calabi_core::mesh::CycleViolation]| {
            list.iter()
                .map(|v| json!({"vertices": v.vertices, "weight_sum": v.weight_sum}))
                .collect::<Vec<_>>()
        };
        let doc = json!({
            "mesh": mesh_stats_json(&surface),
            "pass": report.pass(),
            "triangle_violations": cycles(&report.triangle_violations),
            "quad_violations": cycles(&report.quad_violations),
            "note": report.note(),
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(());
    }
    if !args.common.quiet {
        print_mesh_stats(&surface);
    }
    println!("obstruction check: {}", if report.pass() { "PASS" } else { "FAIL" });
    if !args.common.quiet {
        for v in &report.triangle_violations {
            println!("  3-cycle {:?} weight sum {:.6} >= pi", v.vertices, v.weight_sum);
        }
        for v in &report.quad_violations {
            println!("  4-cycle {:?} weight sum {:.6} >= 2 pi", v.vertices, v.weight_sum);
        }
        if !report.pass() {
            println!("note: {}", report.note());
        }
    }
    Ok(())
}

fn gauss_bonnet_residual(surface: &TriangulatedSurface, geometry: &GeometryState) -> f64 {
    let sum: f64 = geometry.curvature.iter().sum();
    let chi = surface.euler_characteristic() as f64;
    (sum - geometry.total_area - 2.0 * std::f64::consts::PI * chi).abs()
}

pub fn curvature(args: CurvatureArgs) -> Result<(), CliError> {
    let Loaded { surface, weights } = load_common(&args.common)?;
    let radii = args.radii.realize(surface.vertex_count())?;
    let packing = WeightedPacking::from_radii(&surface, radii, weights)?;
    let geometry = curvatures(&surface, &packing)?;
    let residual = gauss_bonnet_residual(&surface, &geometry);

    if let Some(path) = &args.dump_laplacian {
        let lap = DualLaplacian::assemble(&surface, &packing)?;
        let file = File::create(path)
            .map_err(|e| CliError::File { path: path.display().to_string(), source: e })?;
        write_matrix_coordinate(BufWriter::new(file), &lap)?;
    }

    if args.common.json {
        let doc = json!({
            "mesh": mesh_stats_json(&surface),
            "radii": packing.radii(),
            "u": packing.u(),
            "lengths": geometry.lengths,
            "face_areas": geometry.face_areas,
            "curvature": geometry.curvature,
            "total_area": geometry.total_area,
            "average_curvature": geometry.average_curvature,
            "gauss_bonnet_residual": residual,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(());
    }
    if !args.common.quiet {
        print_mesh_stats(&surface);
        for (v, (&k, &r)) in geometry.curvature.iter().zip(packing.radii()).enumerate() {
            println!("  vertex {v}: r = {r:.6}, K = {k:+.9}");
        }
    }
    let sum: f64 = geometry.curvature.iter().sum();
    println!(
        "sum K = {sum:.9}, area = {:.9}, K_av = {:.9}",
        geometry.total_area, geometry.average_curvature
    );
    println!("gauss-bonnet residual |sum K - area - 2 pi chi| = {residual:.3e}");
    Ok(())
}

fn flow_config(args: &FlowArgs, target: Option<Vec<f64>>) -> FlowConfig {
    FlowConfig {
        target,
        h0: args.h0,
        h_max: args.hmax,
        step_tol: args.step_tol,
        tol: args.tol,
        t_max: args.tmax,
        max_steps: args.max_steps,
        record_lambda1: args.record_lambda1,
        ..FlowConfig::default()
    }
}

/// `max_i |K_i - target_i|` at the final sample.
fn final_residual(traj: &FlowTrajectory, target: Option<&[f64]>) -> f64 {
    let last = traj.last();
    match target {
        Some(t) => last
            .curvature
            .iter()
            .zip(t)
            .map(|(k, t)| (k - t).abs())
            .fold(0.0, f64::max),
        None => last.max_abs_curvature(),
    }
}

fn flow_summary(traj: &FlowTrajectory, target: Option<&[f64]>) -> serde_json::Value {
    let last = traj.last();
    json!({
        "termination": termination_name(traj.termination),
        "steps": traj.steps(),
        "t_final": last.t,
        "final_energy": last.energy,
        "final_max_abs_k": last.max_abs_curvature(),
        "final_residual": final_residual(traj, target),
        "fitted_rate": traj.fitted_rate,
        "ceiling_hits": traj.ceiling_hits.len(),
    })
}

pub fn flow(args: FlowArgs) -> Result<(), CliError> {
    let Loaded { surface, weights } = load_common(&args.common)?;
    let n = surface.vertex_count();
    let target = load_target(&args.target, n)?;
    if let Some(t) = &target {
        warn_target_advisory(&surface, t, args.common.quiet);
    }
    let radii = args.radii.realize(n)?;
    let packing = WeightedPacking::from_radii(&surface, radii, weights)?;
    let config = flow_config(&args, target);
    let started = Instant::now();
    let traj = integrate(&surface, &packing, &config)?;
    let wall = started.elapsed();

    std::fs::create_dir_all(&args.out)?;
    let csv_path = args.out.join("trajectory.csv");
    let json_path = args.out.join("trajectory.json");
    write_trajectory_csv(
        BufWriter::new(File::create(&csv_path)?),
        &traj,
    )?;
    let doc = trajectory_json(&surface, &config, &traj);
    serde_json::to_writer(BufWriter::new(File::create(&json_path)?), &doc)?;

    if args.common.json {
        let mut summary = flow_summary(&traj, config.target.as_deref());
        summary["trajectory_csv"] = json!(csv_path.display().to_string());
        summary["trajectory_json"] = json!(json_path.display().to_string());
        println!("{}", serde_json::to_string_pretty(&summary)?);
        return Ok(());
    }
    let last = traj.last();
    println!(
        "flow: {} after {} steps (t = {:.6}, wall {:.1?})",
        termination_name(traj.termination),
        traj.steps(),
        last.t,
        wall
    );
    println!(
        "final energy = {:.6e}, max |K - target| = {:.6e}",
        last.energy,
        final_residual(&traj, config.target.as_deref())
    );
    if !args.common.quiet {
        if let Some(rate) = traj.fitted_rate {
            println!("fitted ln-energy slope over trailing window: {rate:.6}");
        }
        if !traj.ceiling_hits.is_empty() {
            println!(
                "warning: {} samples exceeded the curvature ceiling {:.3}",
                traj.ceiling_hits.len(),
                config.curvature_ceiling
            );
        }
        println!("wrote {} and {}", csv_path.display(), json_path.display());
    }
    Ok(())
}

pub fn solve(args: SolveArgs) -> Result<(), CliError> {
    let Loaded { surface, weights } = load_common(&args.common)?;
    let n = surface.vertex_count();
    let target = load_target(&args.target, n)?.unwrap_or_else(|| vec![0.0; n]);
    // advisory only: a zero-curvature packing exists iff the obstruction
    // check passes on every null-homotopic short cycle
    if target.iter().all(|&t| t == 0.0) && !args.common.quiet {
        let report = check_thurston_conditions(&surface, &weights);
        if !report.pass() {
            eprintln!(
                "warning: obstruction check flagged {} cycles ({})",
                report.triangle_violations.len() + report.quad_violations.len(),
                report.note()
            );
        }
    } else {
        warn_target_advisory(&surface, &target, args.common.quiet);
    }
    let radii = args.radii.realize(n)?;
    let packing = WeightedPacking::from_radii(&surface, radii, weights.clone())?;
    let started = Instant::now();
    let solution = match newton_solve(
        &surface,
        &weights,
        &target,
        packing.u(),
        args.tol,
        args.max_iterations,
    ) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("solve failed: {e}");
            return Err(e.into());
        }
    };
    let wall = started.elapsed();
    let geometry = curvatures(&surface, &solution.packing)?;

    if let Some(path) = &args.out {
        let doc = json!({
            "iterations": solution.iterations,
            "residual": solution.residual,
            "u": solution.packing.u(),
            "radii": solution.packing.radii(),
            "curvature": geometry.curvature,
        });
        serde_json::to_writer_pretty(
            BufWriter::new(File::create(path).map_err(|e| CliError::File {
                path: path.display().to_string(),
                source: e,
            })?),
            &doc,
        )?;
    }
    if args.common.json {
        let doc = json!({
            "iterations": solution.iterations,
            "residual": solution.residual,
            "radii": solution.packing.radii(),
            "u": solution.packing.u(),
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(());
    }
    println!(
        "newton: converged in {} iterations (residual {:.3e}, wall {:.1?})",
        solution.iterations, solution.residual, wall
    );
    if !args.common.quiet {
        for (v, &r) in solution.packing.radii().iter().enumerate() {
            println!("  vertex {v}: r = {r:.12}");
        }
    }
    Ok(())
}

pub fn potential(args: PotentialArgs) -> Result<(), CliError> {
    let Loaded { surface, weights } = load_common(&args.common)?;
    let n = surface.vertex_count();
    let base_r = args.base.realize(n)?;
    let base = WeightedPacking::from_radii(&surface, base_r, weights.clone())?;

    if let Some(rays) = args.probe_rays {
        let report =
            properness_probe(&surface, &weights, base.u(), rays, args.probe_radius, args.seed)?;
        if args.common.json {
            let rays_doc: Vec<_> = report
                .rays
                .iter()
                .map(|r| {
                    json!({
                        "direction": r.direction,
                        "radii": r.radii,
                        "values": r.values,
                        "monotone_after_first_min": r.monotone_after_first_min,
                        "growth": r.growth,
                    })
                })
                .collect();
            let doc = json!({
                "rays": rays_doc,
                "all_monotone": report.all_monotone,
                "min_growth": report.min_growth,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
            return Ok(());
        }
        println!(
            "properness probe: {} rays to radius {}, all monotone after first min: {}",
            report.rays.len(),
            args.probe_radius,
            report.all_monotone
        );
        if !args.common.quiet {
            for (i, ray) in report.rays.iter().enumerate() {
                println!(
                    "  ray {i}: growth {:.6e}, final value {:.6e}",
                    ray.growth,
                    ray.values.last().unwrap()
                );
            }
        }
        println!("minimum growth over rays: {:.6e}", report.min_growth);
        return Ok(());
    }

    let spec = args.radii.ok_or_else(|| {
        CliError::Usage("potential needs --radii <spec> unless --probe-rays is given".into())
    })?;
    let point_r = spec.realize(n)?;
    let point = WeightedPacking::from_radii(&surface, point_r, weights.clone())?;
    let value = ricci_potential(&surface, &weights, base.u(), point.u())?;
    if args.common.json {
        let doc = json!({
            "value": value.value,
            "base_u": value.base_point,
            "point_u": point.u(),
            "path": value.path,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(());
    }
    println!("potential f(u) = {:.12e} (path: {})", value.value, value.path);
    Ok(())
}

struct BenchRow {
    run: usize,
    seed: u64,
    flow_steps: usize,
    flow_ms: f64,
    flow_term: Termination,
    flow_residual: f64,
    newton_iterations: usize,
    newton_ms: f64,
    newton_residual: f64,
    max_du: f64,
}

pub fn bench(args: BenchArgs) -> Result<(), CliError> {
    let Loaded { surface, weights } = load_common(&args.common)?;
    let n = surface.vertex_count();
    let zeros = vec![0.0; n];

    let mut rows: Vec<Result<BenchRow, CliError>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for run in 0..args.runs {
            let seed = args.seed + run as u64;
            let surface = &surface;
            let weights = &weights;
            let zeros = &zeros;
            handles.push(scope.spawn(move || -> Result<BenchRow, CliError> {
                let radii = crate::io::RadiiSpec::Rand { seed }.realize(n)?;
                let packing = WeightedPacking::from_radii(surface, radii, weights.clone())?;
                let config = FlowConfig {
                    tol: args.tol,
                    t_max: args.tmax,
                    ..FlowConfig::default()
                };
                let started = Instant::now();
                let traj = integrate(surface, &packing, &config)?;
                let flow_ms = started.elapsed().as_secs_f64() * 1e3;

                let started = Instant::now();
                let newton = newton_solve(surface, weights, zeros, packing.u(), args.tol, 200)?;
                let newton_ms = started.elapsed().as_secs_f64() * 1e3;

                let max_du = traj
                    .last()
                    .u
                    .iter()
                    .zip(newton.packing.u())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                Ok(BenchRow {
                    run,
                    seed,
                    flow_steps: traj.steps(),
                    flow_ms,
                    flow_term: traj.termination,
                    flow_residual: traj.last().max_abs_curvature(),
                    newton_iterations: newton.iterations,
                    newton_ms,
                    newton_residual: newton.residual,
                    max_du,
                })
            }));
        }
        for h in handles {
            rows.push(h.join().expect("bench worker panicked"));
        }
    });

    let rows: Vec<BenchRow> = rows.into_iter().collect::<Result<_, _>>()?;
    if args.common.json {
        let docs: Vec<_> = rows
            .iter()
            .map(|r| {
                json!({
                    "run": r.run,
                    "seed": r.seed,
                    "flow_steps": r.flow_steps,
                    "flow_ms": r.flow_ms,
                    "flow_termination": termination_name(r.flow_term),
                    "flow_residual": r.flow_residual,
                    "newton_iterations": r.newton_iterations,
                    "newton_ms": r.newton_ms,
                    "newton_residual": r.newton_residual,
                    "max_du": r.max_du,
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&json!({"runs": docs}))?);
        return Ok(());
    }

    println!(
        "{:>3} {:>6} {:>11} {:>9} {:>10} {:>12} {:>9} {:>12} {:>10}",
        "run", "seed", "flow_steps", "flow_ms", "flow_kinf", "newton_iters", "newton_ms", "newton_resid", "max_du"
    );
    for r in &rows {
        println!(
            "{:>3} {:>6} {:>11} {:>9.2} {:>10.2e} {:>12} {:>9.2} {:>12.2e} {:>10.2e}",
            r.run,
            r.seed,
            r.flow_steps,
            r.flow_ms,
            r.flow_residual,
            r.newton_iterations,
            r.newton_ms,
            r.newton_residual,
            r.max_du
        );
    }
    if !args.common.quiet {
        let mean = |f: &dyn Fn(&BenchRow) -> f64| {
            rows.iter().map(f).sum::<f64>() / rows.len().max(1) as f64
        };
        println!(
            "mean: flow {:.2} ms over {:.0} steps, newton {:.2} ms over {:.1} iterations, max |du| {:.2e}",
            mean(&|r| r.flow_ms),
            mean(&|r| r.flow_steps as f64),
            mean(&|r| r.newton_ms),
            mean(&|r| r.newton_iterations as f64),
            rows.iter().map(|r| r.max_du).fold(0.0f64, f64::max)
        );
    }
    Ok(())
}
