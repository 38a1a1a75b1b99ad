//! `domeheat` command line: mesh generation, forward runs, single
//! optimizations and parameter sweeps.
//!
//! Exit codes: 0 on success (any optimizer stop reason), 1 when a solve or an
//! output write fails, 2 for bad flags, unreadable inputs or invalid
//! configurations.

use std::fs::{self, File};
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use domeheat::config::{MeshSource, RunConfig};
use domeheat::linalg::CgOptions;
use domeheat::mesh::export_triangle_mesh;
use domeheat::optimizer::projected_gradient;
use domeheat::output::{control_csv, iteration_log_csv, TrajectoryCsvWriter};
use domeheat::sweep::{run_sweep, summary_csv, SweepSpec};
use domeheat::vtk::write_unstructured_grid;
use domeheat::{BoundaryTag, FemMatrices, GradientScheme, HeatProblem, TriMesh};
use log::{info, warn};

#[derive(Parser)]
#[command(name = "domeheat", version, about = "Optimal boundary heating of the air under a glass dome")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a half-disc mesh; writes Triangle files and a VTK preview.
    Mesh(MeshArgs),
    /// Forward solve for the constant heater temperature `control`.
    SolveForward(ForwardArgs),
    /// Projected-gradient optimization of the heater temperatures.
    Optimize(OptimizeArgs),
    /// Run a grid of (level, n_steps) × λ cases and write a summary table.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Angle of each heater band above the floor, in radians.
    #[arg(long, default_value_t = std::f64::consts::PI / 12.0, allow_negative_numbers = true)]
    heater_angle: f64,
    /// Number of uniform refinements of the coarse mesh.
    #[arg(long, default_value_t = 1)]
    level: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// File name stem of the written files.
    #[arg(long, default_value = "dome")]
    name: String,
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` configuration file; unset keys keep the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Triangle mesh prefix (`<prefix>.node/.ele/.bnd`) instead of the generated half-disc.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    heater_angle: Option<f64>,
    /// Refinement level; for `--mesh` the number of extra uniform refinements.
    #[arg(long)]
    level: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct OptimFlags {
    /// Backtracking line search instead of the constant step.
    #[arg(long)]
    armijo: bool,
    /// `discrete` (exact gradient of the discrete cost) or `continuous`.
    #[arg(long, value_parser = parse_scheme)]
    gradient: Option<GradientScheme>,
}

#[derive(Args)]
struct ForwardArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Also write the state every k time levels as VTK.
    #[arg(long, value_name = "K")]
    snapshot_every: Option<usize>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    optim: OptimFlags,
    /// Also write the optimal state every k time levels as VTK.
    #[arg(long, value_name = "K")]
    snapshot_every: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep file with `grid <level> <n_steps>` and `lambda <value>` lines.
    spec: PathBuf,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    optim: OptimFlags,
}

fn parse_scheme(s: &str) -> Result<GradientScheme, String> {
    GradientScheme::parse(s).ok_or_else(|| format!("expected `discrete` or `continuous`, got `{s}`"))
}

enum Failure {
    /// Bad input: exit code 2.
    Usage(String),
    /// Solve or write failure: exit code 1.
    Solver(String),
}

type CliResult<T = ()> = Result<T, Failure>;

fn usage(context: &str) -> impl FnOnce(domeheat::Error) -> Failure + '_ {
    move |e| Failure::Usage(format!("{context}: {e}"))
}

fn solver<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Solver(format!("{context}: {e}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Mesh(args) => cmd_mesh(&args),
        Command::SolveForward(args) => cmd_solve_forward(&args),
        Command::Optimize(args) => cmd_optimize(&args),
        Command::Sweep(args) => cmd_sweep(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

/// Config file plus command-line overrides, validated as a whole.
fn load_config(run: &RunArgs, optim: Option<&OptimFlags>) -> CliResult<RunConfig> {
    let mut config = match &run.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(usage(&path.display().to_string()))?
        }
        None => RunConfig::default(),
    };
    if let Some(prefix) = &run.mesh {
        config.mesh = MeshSource::Files(prefix.clone());
    }
    match &mut config.mesh {
        MeshSource::Generated {
            radius,
            heater_angle,
            level,
        } => {
            *radius = run.radius.unwrap_or(*radius);
            *heater_angle = run.heater_angle.unwrap_or(*heater_angle);
            *level = run.level.unwrap_or(*level);
        }
        MeshSource::Files(_) => {
            if run.radius.is_some() || run.heater_angle.is_some() {
                warn!("--radius and --heater-angle are ignored for file meshes");
            }
        }
    }
    if let Some(optim) = optim {
        config.armijo |= optim.armijo;
        config.gradient = optim.gradient.unwrap_or(config.gradient);
    }
    // re-validate with the overrides applied
    RunConfig::parse(&config.to_text()).map_err(usage("configuration"))
}

fn build_mesh(run: &RunArgs, config: &RunConfig) -> CliResult<(TriMesh, FemMatrices)> {
    let extra = match config.mesh {
        MeshSource::Files(_) => run.level,
        MeshSource::Generated { .. } => None,
    };
    let mesh = config.mesh.build(extra).map_err(usage("mesh"))?;
    let matrices = FemMatrices::assemble(&mesh).map_err(usage("mesh"))?;
    info!("mesh: {} nodes, {} triangles", mesh.n_vertices(), mesh.n_triangles());
    Ok((mesh, matrices))
}

fn problem<'a>(mesh: &'a TriMesh, matrices: &'a FemMatrices, config: &RunConfig) -> CliResult<HeatProblem<'a>> {
    let heat = HeatProblem::new(mesh, matrices, config.problem).map_err(usage("problem"))?;
    Ok(heat.with_cg_options(CgOptions {
        rel_tol: config.cg_tol,
        max_iter: None,
    }))
}

fn create_out_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(solver(&format!("cannot create {}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(solver(&format!("cannot write {}", path.display())))
}

fn write_vtk(path: &Path, mesh: &TriMesh, title: &str, name: &str, values: &[f64]) -> CliResult {
    let text = write_unstructured_grid(mesh, title, &[(name, values)]).map_err(solver("vtk"))?;
    write_file(path, &text)
}

fn cmd_mesh(args: &MeshArgs) -> CliResult {
    let mesh = domeheat::mesh::generate_half_disc(args.radius, args.heater_angle, args.level).map_err(usage("mesh"))?;
    if mesh.robin_nodes().is_empty() {
        return Err(Failure::Usage("mesh: no heater boundary".into()));
    }
    create_out_dir(&args.out_dir)?;
    let stem = args.out_dir.join(&args.name);
    let files = export_triangle_mesh(&mesh);
    write_file(&stem.with_extension("node"), &files.node)?;
    write_file(&stem.with_extension("ele"), &files.ele)?;
    write_file(&stem.with_extension("bnd"), &files.boundary)?;
    // boundary code per node, 0 inside; pool wins at corners as in the solver
    let pool = f64::from(BoundaryTag::Pool.code());
    let mut tags = vec![0.0; mesh.n_vertices()];
    for edge in mesh.boundary_edges() {
        for v in edge.vertices {
            if tags[v] != pool {
                tags[v] = f64::from(edge.tag.code());
            }
        }
    }
    write_vtk(&stem.with_extension("vtk"), &mesh, "dome mesh", "boundary_tag", &tags)?;
    println!(
        "nodes {} triangles {} boundary_edges {}",
        mesh.n_vertices(),
        mesh.n_triangles(),
        mesh.boundary_edges().len()
    );
    Ok(())
}

fn cmd_solve_forward(args: &ForwardArgs) -> CliResult {
    let config = load_config(&args.run, None)?;
    let (mesh, matrices) = build_mesh(&args.run, &config)?;
    let heat = problem(&mesh, &matrices, &config)?;
    let out = &args.run.out_dir;
    create_out_dir(out)?;
    let every = snapshot_cadence(args.snapshot_every)?;

    let path = out.join("trajectory.csv");
    let file = File::create(&path).map_err(solver(&format!("cannot write {}", path.display())))?;
    let mut writer = TrajectoryCsvWriter::new(BufWriter::new(file)).map_err(solver("trajectory"))?;
    let mut write_error: Option<Failure> = None;
    let control = heat.constant_control(config.control);
    let y_final = heat
        .forward_with(&control, &heat.initial_state(), None, |m, y| {
            if write_error.is_some() {
                return;
            }
            let result = writer
                .write_level(m, y)
                .map_err(solver("trajectory"))
                .and_then(|()| snapshot(out, &mesh, every, m, y));
            write_error = result.err();
        })
        .map_err(solver("forward solve"))?;
    if let Some(failure) = write_error {
        return Err(failure);
    }
    writer.finish().map_err(solver("trajectory"))?;
    write_vtk(&out.join("final_state.vtk"), &mesh, "state at T", "temperature", &y_final)?;
    let cost = heat.cost(&y_final, &control).map_err(solver("cost"))?;
    println!("cost {cost:e}");
    Ok(())
}

fn snapshot_cadence(every: Option<usize>) -> CliResult<Option<usize>> {
    match every {
        Some(0) => Err(Failure::Usage("--snapshot-every must be positive".into())),
        other => Ok(other),
    }
}

fn snapshot(out: &Path, mesh: &TriMesh, every: Option<usize>, m: usize, y: &[f64]) -> CliResult {
    match every {
        Some(k) if m.is_multiple_of(k) => write_vtk(
            &out.join(format!("state_{m:06}.vtk")),
            mesh,
            &format!("state at level {m}"),
            "temperature",
            y,
        ),
        _ => Ok(()),
    }
}

fn cmd_optimize(args: &OptimizeArgs) -> CliResult {
    let config = load_config(&args.run, Some(&args.optim))?;
    let every = snapshot_cadence(args.snapshot_every)?;
    let (mesh, matrices) = build_mesh(&args.run, &config)?;
    let heat = problem(&mesh, &matrices, &config)?;
    let out = &args.run.out_dir;
    create_out_dir(out)?;

    let initial = heat.constant_control(config.initial_control_value());
    let report = projected_gradient(&heat, &initial, config.optim_options()).map_err(solver("optimization"))?;
    info!(
        "{} iterations, J {:e} -> {:e}",
        report.iterations,
        report.initial_cost(),
        report.final_cost()
    );

    write_file(&out.join("run_config.txt"), &config.to_text())?;
    write_file(&out.join("iteration_log.csv"), &iteration_log_csv(&report))?;
    write_file(
        &out.join("final_control.csv"),
        &control_csv(&report.final_control, heat.robin_nodes(), &heat.grid()),
    )?;
    write_vtk(&out.join("final_state.vtk"), &mesh, "state at T", "temperature", &report.final_state)?;

    let mut adjoint_at_zero = Vec::new();
    let keep = |m: usize, p: &[f64]| {
        if m == 0 {
            adjoint_at_zero = p.to_vec();
        }
    };
    match config.gradient {
        GradientScheme::Discrete => heat.discrete_adjoint_with(&report.final_state, keep),
        GradientScheme::Continuous => heat.adjoint_with(&report.final_state, keep),
    }
    .map_err(solver("adjoint solve"))?;
    write_vtk(&out.join("adjoint_t0.vtk"), &mesh, "adjoint at t = 0", "adjoint", &adjoint_at_zero)?;

    if every.is_some() {
        let mut failure = None;
        heat.forward_with(&report.final_control, &heat.initial_state(), None, |m, y| {
            if failure.is_none() {
                failure = snapshot(out, &mesh, every, m, y).err();
            }
        })
        .map_err(solver("forward solve"))?;
        if let Some(failure) = failure {
            return Err(failure);
        }
    }

    println!("stop_reason {}", report.stop_reason.as_str());
    println!("iterations {}", report.iterations);
    println!("cost {:e} -> {:e}", report.initial_cost(), report.final_cost());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> CliResult {
    let base = load_config(&args.run, Some(&args.optim))?;
    let text = fs::read_to_string(&args.spec)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", args.spec.display())))?;
    let spec = SweepSpec::parse(&text).map_err(usage(&args.spec.display().to_string()))?;
    create_out_dir(&args.run.out_dir)?;

    let rows = run_sweep(&spec, &base);
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        warn!("{failed} of {} cases failed; see the error column", rows.len());
    }
    let path = args.run.out_dir.join("summary.csv");
    let mut file = File::create(&path).map_err(solver(&format!("cannot write {}", path.display())))?;
    file.write_all(summary_csv(&rows).as_bytes())
        .map_err(solver(&format!("cannot write {}", path.display())))?;
    println!("cases {} failed {} summary {}", rows.len(), failed, path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(level: Option<usize>, heater_angle: Option<f64>) -> RunArgs {
        RunArgs {
            config: None,
            mesh: None,
            radius: None,
            heater_angle,
            level,
            out_dir: PathBuf::from("."),
        }
    }

    #[test]
    fn flags_override_defaults() {
        let optim = OptimFlags {
            armijo: true,
            gradient: Some(GradientScheme::Continuous),
        };
        let config = load_config(&run_args(Some(3), None), Some(&optim)).ok().unwrap();
        assert_eq!(config.mesh.level(), 3);
        assert!(config.armijo);
        assert_eq!(config.gradient, GradientScheme::Continuous);
        assert_eq!(config.problem, RunConfig::default().problem);
    }

    #[test]
    fn overrides_are_validated() {
        let outcome = load_config(&run_args(None, Some(2.0)), None);
        assert!(matches!(outcome, Err(Failure::Usage(m)) if m.contains("heater_angle")));
    }

    #[test]
    fn scheme_names() {
        assert_eq!(parse_scheme("discrete"), Ok(GradientScheme::Discrete));
        assert!(parse_scheme("exact").is_err());
    }
}
