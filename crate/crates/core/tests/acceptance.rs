//! Acceptance criteria, one PASS/FAIL line each. Tolerances are pinned below
//! and are never loosened to make a line pass.

use std::f64::consts::PI;
use std::process::ExitCode;

use domeheat::assembly::{assemble_mass, assemble_stiffness, edge_mass, element_mass, element_stiffness};
use domeheat::config::RunConfig;
use domeheat::linalg::CgOptions;
use domeheat::mesh::{generate_half_disc, generate_unit_square, BoundaryEdge};
use domeheat::optimizer::{adjoint_on_robin, bang_bang_control, reduced_gradient};
use domeheat::output::{control_csv, iteration_log_csv, strip_wall_time};
use domeheat::sweep;
use domeheat::vtk::{parse_unstructured_grid, write_unstructured_grid};
use domeheat::{
    par, BoundaryTag, ControlTrajectory, FemMatrices, GradientScheme, HeatProblem, OptimReport, Point2, ProblemConfig,
    TriMesh,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ELEMENT_TOL: f64 = 1e-14;
const CONSERVATION_TOL: f64 = 1e-12;
const FIXED_POINT_TOL: f64 = 1e-10;
const MMS_RATIO: (f64, f64) = (3.0, 5.0);
const GRADIENT_TOL: f64 = 1e-2;
const GRADIENT_EPS: f64 = 1e-4;
const GRID_CELLS: [(usize, usize); 3] = [(0, 125), (1, 250), (2, 1000)];
const LAMBDAS: [f64; 5] = [1e-4, 1e-2, 1.0, 1e2, 1e4];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn dome(level: usize) -> (TriMesh, FemMatrices) {
    let mesh = generate_half_disc(1.0, PI / 12.0, level).unwrap();
    let matrices = FemMatrices::assemble(&mesh).unwrap();
    (mesh, matrices)
}

fn max_abs_diff<const N: usize>(a: &[[f64; N]; N], b: &[[f64; N]; N]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn element_oracles() -> Outcome {
    let tri = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
    let mass = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]].map(|r| r.map(|v| v / 24.0));
    let stiffness = [[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]].map(|r| r.map(|v| v / 2.0));
    let mut worst = max_abs_diff(&element_mass(tri), &mass).max(max_abs_diff(&element_stiffness(tri), &stiffness));

    // the same blocks through global assembly of a one-triangle mesh
    let edges = [(0, 1), (1, 2), (2, 0)].map(|(a, b)| BoundaryEdge {
        vertices: [a, b],
        tag: BoundaryTag::Glass,
    });
    let mesh = TriMesh::new(tri.to_vec(), vec![[0, 1, 2]], edges.to_vec()).unwrap();
    let (m, k) = (assemble_mass(&mesh).unwrap(), assemble_stiffness(&mesh).unwrap());
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((m.get(i, j) - mass[i][j]).abs());
            worst = worst.max((k.get(i, j) - stiffness[i][j]).abs());
        }
    }

    let (a, b) = (Point2::new(0.3, -0.2), Point2::new(1.1, 0.4));
    let l = a.distance(b);
    let edge = [[2.0, 1.0], [1.0, 2.0]].map(|r| r.map(|v| v * l / 6.0));
    worst = worst.max(max_abs_diff(&edge_mass(a, b), &edge));
    outcome(worst <= ELEMENT_TOL, format!("max entry error {worst:.2e} (tol {ELEMENT_TOL:e})"))
}

fn conservation() -> Outcome {
    let mut worst: f64 = 0.0;
    for level in 0..4 {
        let (mesh, matrices) = dome(level);
        let ones = vec![1.0; mesh.n_vertices()];
        let area = mesh.shoelace_area();
        let heater_length = mesh.boundary_length(&BoundaryTag::HEATERS);
        let total_mass = matrices.mass.inner(&ones, &ones).unwrap();
        let total_robin = matrices.robin_mass.inner(&ones, &ones).unwrap();
        let k_ones = matrices.stiffness.spmv(&ones).unwrap();
        let k_scale = matrices.stiffness.diagonal().iter().cloned().fold(0.0, f64::max);
        let kernel = k_ones.iter().map(|v| v.abs()).fold(0.0, f64::max) / k_scale;
        worst = worst
            .max((total_mass - area).abs() / area)
            .max((total_robin - heater_length).abs() / heater_length)
            .max(kernel);
    }
    outcome(
        worst <= CONSERVATION_TOL,
        format!("levels 0-3, worst relative defect {worst:.2e} (tol {CONSERVATION_TOL:e})"),
    )
}

fn fixed_point() -> Outcome {
    let (mesh, matrices) = dome(0);
    let config = ProblemConfig {
        g: 20.0,
        alpha: 100.0,
        beta: 100.0,
        y_0: 20.0,
        n_steps: 125,
        ..Default::default()
    };
    let problem = HeatProblem::new(&mesh, &matrices, config).unwrap();
    let mut worst: f64 = 0.0;
    problem
        .forward_with(&problem.constant_control(20.0), &problem.initial_state(), None, |_, y| {
            worst = y.iter().map(|v| (v - 20.0).abs()).fold(worst, f64::max);
        })
        .unwrap();
    outcome(
        worst <= FIXED_POINT_TOL,
        format!(
            "{} nodes x 125 steps, max |y - 20| = {worst:.2e} (tol {FIXED_POINT_TOL:e})",
            mesh.n_vertices()
        ),
    )
}

fn manufactured_solution() -> Outcome {
    let exact = |t: f64, p: Point2| (-t).exp() * (PI * p.x).sin() * (PI * p.y).sin();
    let source = move |t: f64, p: Point2| (2.0 * PI * PI - 1.0) * exact(t, p);
    let levels = [(4, 4), (8, 16), (16, 64), (32, 256)];
    let errors = par::map(&levels, |&(n, n_steps)| {
        let mesh = generate_unit_square(n, BoundaryTag::Pool).unwrap();
        let matrices = FemMatrices::assemble(&mesh).unwrap();
        let config = ProblemConfig {
            g: 0.0,
            n_steps,
            ..Default::default()
        };
        let problem = HeatProblem::new(&mesh, &matrices, config).unwrap().with_cg_options(CgOptions {
            rel_tol: 1e-12,
            max_iter: None,
        });
        let initial: Vec<f64> = mesh.vertices().iter().map(|&p| exact(0.0, p)).collect();
        let y = problem
            .forward_with(&problem.constant_control(0.0), &initial, Some(&source), |_, _| {})
            .unwrap();
        let e: Vec<f64> = y.iter().zip(mesh.vertices()).map(|(v, &p)| v - exact(1.0, p)).collect();
        problem.mass_inner(&e, &e).unwrap().sqrt()
    });
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = ratios.iter().all(|r| (MMS_RATIO.0..=MMS_RATIO.1).contains(r));
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    outcome(pass, format!("error ratios [{}] (required in [3, 5])", shown.join(", ")))
}

fn gradient_check_errors(scheme: GradientScheme) -> Vec<f64> {
    let (mesh, matrices) = dome(2);
    let config = ProblemConfig {
        n_steps: 1000,
        ..Default::default()
    };
    let problem = HeatProblem::new(&mesh, &matrices, config).unwrap().with_cg_options(CgOptions {
        rel_tol: 1e-12,
        max_iter: None,
    });
    let u = problem.constant_control(40.0);
    let y = problem.solve_forward_final(&u).unwrap();
    let p = adjoint_on_robin(&problem, &y, scheme).unwrap();
    let gradient = reduced_gradient(&p, &u, &config);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let directions: Vec<ControlTrajectory> = (0..5)
        .map(|_| ControlTrajectory::from_fn(u.n_levels(), u.n_nodes(), |_, _| rng.gen_range(-1.0..1.0)))
        .collect();
    par::map(&directions, |d| {
        let plus = problem.reduced_cost(&u.zip_map(d, |a, b| a + GRADIENT_EPS * b)).unwrap();
        let minus = problem.reduced_cost(&u.zip_map(d, |a, b| a - GRADIENT_EPS * b)).unwrap();
        let fd = (plus - minus) / (2.0 * GRADIENT_EPS);
        let adjoint = problem.control_inner(&gradient, d).unwrap();
        ((fd - adjoint) / fd).abs()
    })
}

fn gradient_check() -> Outcome {
    let errors = gradient_check_errors(GradientScheme::default());
    let worst = errors.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst <= GRADIENT_TOL,
        format!(
            "{} adjoint, 5 random directions, worst relative error {worst:.2e} (tol {GRADIENT_TOL:e})",
            GradientScheme::default().as_str()
        ),
    )
}

struct Cell {
    level: usize,
    n_steps: usize,
    lambda: f64,
    report: OptimReport,
    energy: f64,
}

fn run_cells() -> Vec<Cell> {
    let base = RunConfig::default();
    let prepared: Vec<(TriMesh, FemMatrices)> = par::map(&GRID_CELLS, |&(level, _)| dome(level));
    let cases: Vec<(usize, f64)> = (0..GRID_CELLS.len())
        .flat_map(|g| LAMBDAS.iter().map(move |&l| (g, l)))
        .collect();
    par::map(&cases, |&(g, lambda)| {
        let (level, n_steps) = GRID_CELLS[g];
        let (mesh, matrices) = &prepared[g];
        let problem = ProblemConfig {
            n_steps,
            lambda,
            ..base.problem
        };
        let (report, energy) = sweep::optimize(mesh, matrices, problem, &base).unwrap();
        Cell {
            level,
            n_steps,
            lambda,
            report,
            energy,
        }
    })
}

fn paper_reproduction(cells: &[Cell]) -> Outcome {
    let config = ProblemConfig::default();
    let mut failures = Vec::new();
    for c in cells {
        let r = &c.report;
        let in_box = r
            .log
            .iter()
            .all(|rec| rec.control_range.0 >= config.u_a && rec.control_range.1 <= config.u_b);
        let ok = r.iterations <= config.k_max && in_box && r.final_cost() < r.initial_cost();
        if !ok {
            failures.push(format!(
                "(L{}, N{}, λ={:e}): k={} in_box={in_box} J {:.4e} -> {:.4e}",
                c.level,
                c.n_steps,
                c.lambda,
                r.iterations,
                r.initial_cost(),
                r.final_cost()
            ));
        }
    }
    let iterations: Vec<String> = cells.iter().map(|c| c.report.iterations.to_string()).collect();
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("15 runs, iterations [{}]", iterations.join(" "))
        } else {
            failures.join("; ")
        },
    )
}

fn lambda_monotonicity(cells: &[Cell]) -> Outcome {
    let mut on_grid: Vec<&Cell> = cells.iter().filter(|c| (c.level, c.n_steps) == (1, 250)).collect();
    on_grid.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let energies: Vec<f64> = on_grid.iter().map(|c| c.energy).collect();
    let pass = energies.windows(2).all(|w| w[1] <= w[0]);
    let shown: Vec<String> = energies.iter().map(|e| format!("{e:.2}")).collect();
    outcome(pass, format!("(1,250) energies [{}]", shown.join(", ")))
}

fn bang_bang() -> Outcome {
    let config = ProblemConfig {
        lambda: 0.0,
        ..Default::default()
    };
    // sign pattern: positive on even nodes, negative on odd, zero at level 0
    let adjoint = ControlTrajectory::from_fn(4, 6, |m, k| {
        if m == 0 {
            0.0
        } else if k % 2 == 0 {
            0.5 + m as f64
        } else {
            -1e-3 * m as f64
        }
    });
    let u = bang_bang_control(&adjoint, &config);
    let mid = 0.5 * (config.u_a + config.u_b);
    let pass = (0..4).all(|m| {
        u.level(m).iter().enumerate().all(|(k, &v)| match (m, k % 2) {
            (0, _) => v == mid,
            (_, 0) => v == config.u_a,
            _ => v == config.u_b,
        })
    });
    outcome(pass, "u_a where βp > 0, u_b where βp < 0, midpoint where βp = 0 (exact)")
}

fn determinism_and_format() -> Outcome {
    let base = RunConfig::default();
    let (mesh, matrices) = dome(0);
    let config = ProblemConfig {
        n_steps: 125,
        ..base.problem
    };
    let run = || {
        let (report, _) = sweep::optimize(&mesh, &matrices, config, &base).unwrap();
        let problem = HeatProblem::new(&mesh, &matrices, config).unwrap();
        let log = strip_wall_time(&iteration_log_csv(&report));
        let control = control_csv(&report.final_control, problem.robin_nodes(), &problem.grid());
        let adjoint = problem.solve_adjoint(&report.final_state).unwrap();
        let state_vtk = write_unstructured_grid(&mesh, "final state", &[("temperature", &report.final_state)]).unwrap();
        let adjoint_vtk = write_unstructured_grid(&mesh, "adjoint t=0", &[("adjoint", adjoint.level(0))]).unwrap();
        (log, control, state_vtk, adjoint_vtk, report.final_state.clone())
    };
    let first = run();
    let second = run();
    let identical = first == second;
    let parsed = parse_unstructured_grid(&first.2).is_ok_and(|g| g.point_scalars[0].1 == first.4)
        && parse_unstructured_grid(&first.3).is_ok_and(|g| g.points.len() == mesh.n_vertices());
    outcome(
        identical && parsed,
        format!("logs/CSV/VTK identical across runs: {identical}; VTK self-parse round trip: {parsed}"),
    )
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |id: &str, name: &str, o: Outcome| {
        all &= o.pass;
        println!("[{}] {id} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };
    report("C1", "element oracles", element_oracles());
    report("C2", "conservation / partition of unity", conservation());
    report("C3", "fixed point", fixed_point());
    report("C4", "manufactured solution convergence", manufactured_solution());
    report("C5", "gradient check", gradient_check());
    let cells = run_cells();
    report("C6", "paper reproduction at desk scale", paper_reproduction(&cells));
    report("C7", "lambda monotonicity", lambda_monotonicity(&cells));
    report("C8", "bang-bang formula", bang_bang());
    report("C9", "determinism and format", determinism_and_format());

    // the paper-literal gradient, for the record; not a criterion
    let literal = gradient_check_errors(GradientScheme::Continuous);
    let shown: Vec<String> = literal.iter().map(|e| format!("{e:.2e}")).collect();
    println!("[INFO] continuous-adjoint gradient, same check: relative errors [{}]", shown.join(", "));

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
