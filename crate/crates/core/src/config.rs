//! Flat `key = value` run configuration with `#` comments. Unset keys keep
//! their defaults, which reproduce the reference experiment.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::heat::ProblemConfig;
use crate::mesh::{generate_half_disc, import_triangle_mesh, refine_uniform, TriMesh};
use crate::optimizer::{ArmijoOptions, GradientScheme, OptimOptions};

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    /// Refined half-disc.
    Generated {
        radius: f64,
        heater_angle: f64,
        level: usize,
    },
    /// `<prefix>.node`, `<prefix>.ele`, `<prefix>.bnd`
    Files(PathBuf),
}

impl Default for MeshSource {
    fn default() -> Self {
        MeshSource::Generated {
            radius: 1.0,
            heater_angle: std::f64::consts::PI / 12.0,
            level: 1,
        }
    }
}

impl MeshSource {
    /// Build the mesh. `level` overrides the configured refinement level of a
    /// generated mesh; for file meshes it is the number of extra uniform
    /// refinements.
    pub fn build(&self, level: Option<usize>) -> Result<TriMesh> {
        match self {
            MeshSource::Generated {
                radius,
                heater_angle,
                level: configured,
            } => generate_half_disc(*radius, *heater_angle, level.unwrap_or(*configured)),
            MeshSource::Files(prefix) => {
                let read = |ext: &str| std::fs::read_to_string(prefix.with_extension(ext));
                let mut mesh = import_triangle_mesh(&read("node")?, &read("ele")?, &read("bnd")?)?;
                for _ in 0..level.unwrap_or(0) {
                    mesh = refine_uniform(&mesh);
                }
                Ok(mesh)
            }
        }
    }

    pub fn level(&self) -> usize {
        match self {
            MeshSource::Generated { level, .. } => *level,
            MeshSource::Files(_) => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub mesh: MeshSource,
    /// Constant initial guess for the optimizer; `None` means the box midpoint.
    pub initial_control: Option<f64>,
    /// Constant heater temperature for plain forward runs.
    pub control: f64,
    pub armijo: bool,
    pub gradient: GradientScheme,
    pub cg_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemConfig::default(),
            mesh: MeshSource::default(),
            initial_control: None,
            control: 40.0,
            armijo: false,
            gradient: GradientScheme::default(),
            cg_tol: 1e-10,
        }
    }
}

impl RunConfig {
    pub fn initial_control_value(&self) -> f64 {
        self.initial_control
            .unwrap_or(0.5 * (self.problem.u_a + self.problem.u_b))
    }

    pub fn optim_options(&self) -> OptimOptions {
        OptimOptions {
            armijo: self.armijo.then(ArmijoOptions::default),
            gradient: self.gradient,
        }
    }

    /// Parse and validate; every bad line or field is reported.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        let mut problems = Vec::new();
        let (mut radius, mut heater_angle, mut level) = (1.0, std::f64::consts::PI / 12.0, 1usize);
        let mut mesh_path: Option<PathBuf> = None;

        for (index, raw) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                problems.push(format!("line {line_no}: expected `key = value`"));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            let p = &mut config.problem;
            let outcome = match key {
                "g" => set_f64(&mut p.g, value),
                "alpha" => set_f64(&mut p.alpha, value),
                "beta" => set_f64(&mut p.beta, value),
                "lambda" => set_f64(&mut p.lambda, value),
                "T" | "final_time" => set_f64(&mut p.final_time, value),
                "n_steps" => set_usize(&mut p.n_steps, value),
                "u_a" => set_f64(&mut p.u_a, value),
                "u_b" => set_f64(&mut p.u_b, value),
                "y_d" => set_f64(&mut p.y_d, value),
                "y_0" => set_f64(&mut p.y_0, value),
                "gamma" => set_f64(&mut p.gamma, value),
                "eps1" => set_f64(&mut p.eps1, value),
                "eps2" => set_f64(&mut p.eps2, value),
                "k_max" => set_usize(&mut p.k_max, value),
                "radius" => set_f64(&mut radius, value),
                "heater_angle" => set_f64(&mut heater_angle, value),
                "level" => set_usize(&mut level, value),
                "mesh" => {
                    mesh_path = Some(PathBuf::from(value));
                    Ok(())
                }
                "initial_control" => {
                    let mut v = 0.0;
                    set_f64(&mut v, value).map(|_| config.initial_control = Some(v))
                }
                "control" => set_f64(&mut config.control, value),
                "armijo" => match value {
                    "true" | "1" | "yes" => {
                        config.armijo = true;
                        Ok(())
                    }
                    "false" | "0" | "no" => {
                        config.armijo = false;
                        Ok(())
                    }
                    _ => Err(format!("expected a boolean, got `{value}`")),
                },
                "gradient" => match GradientScheme::parse(value) {
                    Some(scheme) => {
                        config.gradient = scheme;
                        Ok(())
                    }
                    None => Err(format!("expected `discrete` or `continuous`, got `{value}`")),
                },
                "cg_tol" => set_f64(&mut config.cg_tol, value),
                _ => Err("unknown key".to_string()),
            };
            if let Err(reason) = outcome {
                problems.push(format!("{key} (line {line_no}): {reason}"));
            }
        }

        config.mesh = match mesh_path {
            Some(path) => MeshSource::Files(path),
            None => MeshSource::Generated {
                radius,
                heater_angle,
                level,
            },
        };
        if let Err(Error::Config(list)) = config.problem.validate() {
            problems.extend(list);
        }
        if let Some(u0) = config.initial_control {
            if !(config.problem.u_a..=config.problem.u_b).contains(&u0) {
                problems.push(format!("initial_control: {u0} outside [u_a, u_b]"));
            }
        }
        if !(config.cg_tol > 0.0) {
            problems.push(format!("cg_tol: must be > 0, got {}", config.cg_tol));
        }
        if let MeshSource::Generated { radius, heater_angle, .. } = config.mesh {
            if !(radius > 0.0) {
                problems.push(format!("radius: must be > 0, got {radius}"));
            }
            if !(heater_angle > 0.0 && heater_angle < std::f64::consts::FRAC_PI_2) {
                problems.push(format!("heater_angle: must lie in (0, pi/2), got {heater_angle}"));
            }
        }
        if problems.is_empty() {
            Ok(config)
        } else {
            Err(Error::Config(problems))
        }
    }

    /// Render as parseable text.
    pub fn to_text(&self) -> String {
        let p = &self.problem;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("g", p.g.to_string());
        kv("alpha", p.alpha.to_string());
        kv("beta", p.beta.to_string());
        kv("lambda", p.lambda.to_string());
        kv("final_time", p.final_time.to_string());
        kv("n_steps", p.n_steps.to_string());
        kv("u_a", p.u_a.to_string());
        kv("u_b", p.u_b.to_string());
        kv("y_d", p.y_d.to_string());
        kv("y_0", p.y_0.to_string());
        kv("gamma", p.gamma.to_string());
        kv("eps1", p.eps1.to_string());
        kv("eps2", p.eps2.to_string());
        kv("k_max", p.k_max.to_string());
        match &self.mesh {
            MeshSource::Generated {
                radius,
                heater_angle,
                level,
            } => {
                kv("radius", radius.to_string());
                kv("heater_angle", heater_angle.to_string());
                kv("level", level.to_string());
            }
            MeshSource::Files(path) => kv("mesh", path.display().to_string()),
        }
        if let Some(u0) = self.initial_control {
            kv("initial_control", u0.to_string());
        }
        kv("control", self.control.to_string());
        kv("armijo", self.armijo.to_string());
        kv("gradient", self.gradient.as_str().to_string());
        kv("cg_tol", self.cg_tol.to_string());
        out
    }
}

fn set_f64(slot: &mut f64, value: &str) -> std::result::Result<(), String> {
    *slot = value
        .parse()
        .map_err(|_| format!("expected a number, got `{value}`"))?;
    Ok(())
}

fn set_usize(slot: &mut usize, value: &str) -> std::result::Result<(), String> {
    *slot = value
        .parse()
        .map_err(|_| format!("expected a non-negative integer, got `{value}`"))?;
    Ok(())
}
