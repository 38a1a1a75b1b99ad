//! Parameter sweeps over mesh/time-step pairs and control cost weights.
//!
//! A sweep file has one directive per line:
//!
//! ```text
//! # level n_steps
//! grid 1 250
//! lambda 1e-4
//! ```
//!
//! Grids and weights are combined as a cross product; a missing kind falls
//! back to the base configuration. A file with no directives is an empty
//! sweep.

use std::fmt::Write as _;

use crate::assembly::FemMatrices;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::heat::{HeatProblem, ProblemConfig};
use crate::linalg::CgOptions;
use crate::mesh::TriMesh;
use crate::optimizer::{projected_gradient, OptimReport};
use crate::par;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepSpec {
    pub grids: Vec<(usize, usize)>,
    pub lambdas: Vec<f64>,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = SweepSpec::default();
        for (index, raw) in text.lines().enumerate() {
            let line_no = index + 1;
            let tokens: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
            match tokens.as_slice() {
                [] => {}
                ["grid", level, steps] => {
                    let level = level
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("bad level `{level}`")))?;
                    let steps: usize = steps
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("bad step count `{steps}`")))?;
                    if steps == 0 {
                        return Err(Error::parse(line_no, "step count must be positive"));
                    }
                    spec.grids.push((level, steps));
                }
                ["lambda", value] => {
                    let value: f64 = value
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("bad lambda `{value}`")))?;
                    if !(value >= 0.0) || !value.is_finite() {
                        return Err(Error::parse(line_no, "lambda must be a finite number >= 0"));
                    }
                    spec.lambdas.push(value);
                }
                _ => {
                    return Err(Error::parse(
                        line_no,
                        "expected `grid <level> <n_steps>` or `lambda <value>`",
                    ))
                }
            }
        }
        Ok(spec)
    }

    pub fn is_empty(&self) -> bool {
        self.grids.is_empty() && self.lambdas.is_empty()
    }

    /// Cross product of grids and weights in file order (grid-major).
    pub fn cases(&self, base: &RunConfig) -> Vec<SweepCase> {
        if self.is_empty() {
            return Vec::new();
        }
        let grids = if self.grids.is_empty() {
            vec![(base.mesh.level(), base.problem.n_steps)]
        } else {
            self.grids.clone()
        };
        let lambdas = if self.lambdas.is_empty() {
            vec![base.problem.lambda]
        } else {
            self.lambdas.clone()
        };
        grids
            .iter()
            .flat_map(|&(level, n_steps)| {
                lambdas.iter().map(move |&lambda| SweepCase {
                    level,
                    n_steps,
                    lambda,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCase {
    pub level: usize,
    pub n_steps: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub case: SweepCase,
    pub n_vertices: usize,
    pub outcome: std::result::Result<CaseSummary, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseSummary {
    pub iterations: usize,
    pub stop_reason: &'static str,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub control_energy: f64,
}

/// Optimize one configuration on a prepared mesh.
pub fn optimize(
    mesh: &TriMesh,
    matrices: &FemMatrices,
    problem: ProblemConfig,
    run: &RunConfig,
) -> Result<(OptimReport, f64)> {
    let heat = HeatProblem::new(mesh, matrices, problem)?.with_cg_options(CgOptions {
        rel_tol: run.cg_tol,
        max_iter: None,
    });
    let initial = heat.constant_control(run.initial_control_value());
    let report = projected_gradient(&heat, &initial, run.optim_options())?;
    let energy = heat.control_inner(&report.final_control, &report.final_control)?;
    Ok((report, energy))
}

type Prepared = std::result::Result<(TriMesh, FemMatrices), String>;

/// Run every case; meshes are built once per level and cases run
/// concurrently. Failures are recorded per row.
pub fn run_sweep(spec: &SweepSpec, base: &RunConfig) -> Vec<SweepRow> {
    let cases = spec.cases(base);
    let mut levels: Vec<usize> = cases.iter().map(|c| c.level).collect();
    levels.sort_unstable();
    levels.dedup();
    let prepared: Vec<(usize, Prepared)> = par::map(&levels, |&level| {
        let built = base
            .mesh
            .build(Some(level))
            .and_then(|mesh| FemMatrices::assemble(&mesh).map(|m| (mesh, m)))
            .map_err(|e| e.to_string());
        (level, built)
    });

    par::map(&cases, |case| {
        let (_, built) = prepared.iter().find(|(l, _)| *l == case.level).expect("level prepared");
        let (mesh, matrices) = match built {
            Ok(pair) => pair,
            Err(message) => {
                return SweepRow {
                    case: *case,
                    n_vertices: 0,
                    outcome: Err(message.clone()),
                }
            }
        };
        let problem = ProblemConfig {
            n_steps: case.n_steps,
            lambda: case.lambda,
            ..base.problem
        };
        let outcome = optimize(mesh, matrices, problem, base)
            .map(|(report, energy)| CaseSummary {
                iterations: report.iterations,
                stop_reason: report.stop_reason.as_str(),
                initial_cost: report.initial_cost(),
                final_cost: report.final_cost(),
                control_energy: energy,
            })
            .map_err(|e| e.to_string());
        SweepRow {
            case: *case,
            n_vertices: mesh.n_vertices(),
            outcome,
        }
    })
}

pub const SUMMARY_HEADER: &str =
    "mesh_size,time_steps,lambda,iteration_steps,stop_reason,initial_cost,final_cost,control_energy,error";

pub fn summary_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for row in rows {
        let c = row.case;
        match &row.outcome {
            Ok(s) => {
                let _ = writeln!(
                    out,
                    "{},{},{:e},{},{},{:e},{:e},{:e},",
                    row.n_vertices,
                    c.n_steps,
                    c.lambda,
                    s.iterations,
                    s.stop_reason,
                    s.initial_cost,
                    s.final_cost,
                    s.control_energy
                );
            }
            Err(message) => {
                let message = message.replace(['\n', ','], " ");
                let _ = writeln!(out, "{},{},{:e},,,,,,{}", row.n_vertices, c.n_steps, c.lambda, message);
            }
        }
    }
    out
}
