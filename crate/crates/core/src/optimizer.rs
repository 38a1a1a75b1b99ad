//! Projected gradient iteration for the box-constrained boundary control
//! problem, driven by forward and adjoint solves.

use std::time::Instant;

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::heat::{ControlTrajectory, HeatProblem, ProblemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Relative control change dropped below `eps1`.
    RelChange,
    /// Relative change stopped changing by more than `eps2`.
    ChangeStagnation,
    /// `k_max` iterations used up.
    MaxIter,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::RelChange => "rel_change",
            StopReason::ChangeStagnation => "change_stagnation",
            StopReason::MaxIter => "max_iter",
        }
    }
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of the iteration log.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub cost: f64,
    /// `None` for the initial guess.
    pub rel_change: Option<f64>,
    /// Control entries sitting exactly on a bound.
    pub active_set: usize,
    /// Smallest and largest control entry of this iterate.
    pub control_range: (f64, f64),
    pub step: Option<f64>,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone)]
pub struct OptimReport {
    pub iterations: usize,
    /// `J(u^0), …, J(u^k)`
    pub cost_history: Vec<f64>,
    /// `e_1, …, e_k`
    pub error_history: Vec<f64>,
    pub stop_reason: StopReason,
    pub final_control: ControlTrajectory,
    /// State at the final time for the final control.
    pub final_state: Vec<f64>,
    pub log: Vec<IterationRecord>,
    /// Iterations where the line search found no sufficient decrease.
    pub armijo_failures: usize,
}

impl OptimReport {
    pub fn initial_cost(&self) -> f64 {
        self.cost_history[0]
    }

    pub fn final_cost(&self) -> f64 {
        *self.cost_history.last().unwrap()
    }
}

/// Entrywise `max(u_a, min(u_b, u))`.
pub fn project_box(u: &ControlTrajectory, u_a: f64, u_b: f64) -> ControlTrajectory {
    u.map(|v| project_value(v, u_a, u_b))
}

fn project_value(v: f64, u_a: f64, u_b: f64) -> f64 {
    u_a.max(u_b.min(v))
}

/// Nodal gradient `β·p + λ·u` of the reduced cost at every level, from the
/// adjoint restricted to the heater nodes.
pub fn reduced_gradient(
    adjoint_on_robin: &ControlTrajectory,
    control: &ControlTrajectory,
    config: &ProblemConfig,
) -> ControlTrajectory {
    adjoint_on_robin.zip_map(control, |p, u| config.beta * p + config.lambda * u)
}

/// Optimal control for `λ = 0`: lower bound where `βp > 0`, upper bound
/// where `βp < 0`, box midpoint where `βp = 0`.
pub fn bang_bang_control(adjoint_on_robin: &ControlTrajectory, config: &ProblemConfig) -> ControlTrajectory {
    let mid = 0.5 * (config.u_a + config.u_b);
    adjoint_on_robin.map(|p| {
        let s = config.beta * p;
        if s > 0.0 {
            config.u_a
        } else if s < 0.0 {
            config.u_b
        } else {
            mid
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoOptions {
    pub sigma: f64,
    pub max_halvings: usize,
}

impl Default for ArmijoOptions {
    fn default() -> Self {
        Self {
            sigma: 1e-4,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ArmijoStep {
    pub step: f64,
    pub control: ControlTrajectory,
    pub cost: f64,
    /// False when no trial met the decrease condition; `step` is then the
    /// smallest one tried.
    pub sufficient_decrease: bool,
}

/// Backtracking line search on the projected path: halve `initial_step`
/// until `J(P(u + γd)) ≤ J(u) − σ·γ·‖d‖²`.
#[allow(clippy::too_many_arguments)]
pub fn armijo_step<F>(
    control: &ControlTrajectory,
    direction: &ControlTrajectory,
    current_cost: f64,
    direction_norm_sq: f64,
    bounds: (f64, f64),
    initial_step: f64,
    options: ArmijoOptions,
    mut evaluate_cost: F,
) -> Result<ArmijoStep>
where
    F: FnMut(&ControlTrajectory) -> Result<f64>,
{
    let mut step = initial_step;
    let mut last = None;
    for _ in 0..=options.max_halvings {
        let candidate = control.zip_map(direction, |u, d| project_value(u + step * d, bounds.0, bounds.1));
        let cost = evaluate_cost(&candidate)?;
        if cost <= current_cost - options.sigma * step * direction_norm_sq {
            return Ok(ArmijoStep {
                step,
                control: candidate,
                cost,
                sufficient_decrease: true,
            });
        }
        last = Some((step, candidate, cost));
        step *= 0.5;
    }
    let (step, control, cost) = last.expect("at least one trial");
    warn!("Armijo search found no sufficient decrease; smallest step {step:e}");
    Ok(ArmijoStep {
        step,
        control,
        cost,
        sufficient_decrease: false,
    })
}

/// Which adjoint feeds the gradient `β·p + λ·u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientScheme {
    /// Exact gradient of the discrete reduced cost: `p` from the discrete
    /// adjoint, level `m` paired with `p^{m−1}`.
    #[default]
    Discrete,
    /// Discretised continuous adjoint, `p(T) = y(T) − y_d` on free nodes and
    /// level `m` paired with `p^m`. Consistent only up to discretisation error.
    Continuous,
}

impl GradientScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            GradientScheme::Discrete => "discrete",
            GradientScheme::Continuous => "continuous",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "discrete" => Some(GradientScheme::Discrete),
            "continuous" => Some(GradientScheme::Continuous),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OptimOptions {
    /// Backtracking from `config.gamma` instead of the constant step.
    pub armijo: Option<ArmijoOptions>,
    pub gradient: GradientScheme,
}

/// Adjoint values on the heater nodes, aligned with the control levels.
pub fn adjoint_on_robin(problem: &HeatProblem<'_>, y_final: &[f64], scheme: GradientScheme) -> Result<ControlTrajectory> {
    match scheme {
        GradientScheme::Discrete => problem.solve_discrete_adjoint_on_robin(y_final),
        GradientScheme::Continuous => problem.solve_adjoint_on_robin(y_final),
    }
}

fn control_range(u: &ControlTrajectory) -> (f64, f64) {
    u.as_slice()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn active_set(u: &ControlTrajectory, u_a: f64, u_b: f64) -> usize {
    u.as_slice().iter().filter(|&&v| v == u_a || v == u_b).count()
}

/// Projected gradient method: one forward and one adjoint solve per
/// iteration, `u ← P(u − γ(βp + λu))`. With `λ = 0` the update is replaced by
/// the bang-bang formula.
pub fn projected_gradient(
    problem: &HeatProblem<'_>,
    initial: &ControlTrajectory,
    options: OptimOptions,
) -> Result<OptimReport> {
    let config = *problem.config();
    let (u_a, u_b) = (config.u_a, config.u_b);
    let n_levels = problem.grid().n_levels();
    let n_robin = problem.robin_nodes().len();
    if initial.n_nodes() != n_robin || initial.n_levels() != n_levels {
        return Err(Error::DimensionMismatch {
            expected: n_levels * n_robin,
            found: initial.as_slice().len(),
        });
    }
    if let Some(bad) = initial.as_slice().iter().position(|&v| !(u_a..=u_b).contains(&v)) {
        return Err(Error::param(
            "initial control",
            format!("entry {bad} = {} outside [{u_a}, {u_b}]", initial.as_slice()[bad]),
        ));
    }

    let start = Instant::now();
    let mut u = initial.clone();
    let mut y_final = problem.solve_forward_final(&u)?;
    let mut cost = problem.cost(&y_final, &u)?;
    let mut cost_history = vec![cost];
    let mut error_history: Vec<f64> = Vec::new();
    let mut armijo_failures = 0;
    let mut log = vec![IterationRecord {
        k: 0,
        cost,
        rel_change: None,
        active_set: active_set(&u, u_a, u_b),
        control_range: control_range(&u),
        step: None,
        elapsed_secs: start.elapsed().as_secs_f64(),
    }];

    let stop_reason = loop {
        let k = error_history.len();
        if k >= config.k_max {
            break StopReason::MaxIter;
        }
        let adjoint = adjoint_on_robin(problem, &y_final, options.gradient)?;

        let (next, next_y, next_cost, step) = if config.lambda == 0.0 {
            let next = bang_bang_control(&adjoint, &config);
            let next_y = problem.solve_forward_final(&next)?;
            let next_cost = problem.cost(&next_y, &next)?;
            (next, next_y, next_cost, None)
        } else {
            let direction = reduced_gradient(&adjoint, &u, &config).map(|g| -g);
            match options.armijo {
                None => {
                    let next = u.zip_map(&direction, |v, d| project_value(v + config.gamma * d, u_a, u_b));
                    let next_y = problem.solve_forward_final(&next)?;
                    let next_cost = problem.cost(&next_y, &next)?;
                    (next, next_y, next_cost, Some(config.gamma))
                }
                Some(armijo) => {
                    let norm_sq = problem.control_inner(&direction, &direction)?;
                    let mut best_y = None;
                    let found = armijo_step(&u, &direction, cost, norm_sq, (u_a, u_b), config.gamma, armijo, |c| {
                        let y = problem.solve_forward_final(c)?;
                        let j = problem.cost(&y, c)?;
                        best_y = Some(y);
                        Ok(j)
                    })?;
                    let next_y = best_y.expect("line search evaluates at least once");
                    if found.sufficient_decrease {
                        (found.control, next_y, found.cost, Some(found.step))
                    } else {
                        armijo_failures += 1;
                        if found.cost <= cost {
                            (found.control, next_y, found.cost, Some(found.step))
                        } else {
                            // stay put; the zero change ends the iteration
                            (u.clone(), y_final.clone(), cost, Some(0.0))
                        }
                    }
                }
            }
        };

        let diff = next.zip_map(&u, |a, b| a - b).norm();
        let base = u.norm();
        let error = if base > 0.0 { diff / base } else { diff };
        debug!("iteration {}: J = {next_cost:e}, e = {error:e}", k + 1);

        u = next;
        y_final = next_y;
        cost = next_cost;
        cost_history.push(cost);
        error_history.push(error);
        log.push(IterationRecord {
            k: k + 1,
            cost,
            rel_change: Some(error),
            active_set: active_set(&u, u_a, u_b),
            control_range: control_range(&u),
            step,
            elapsed_secs: start.elapsed().as_secs_f64(),
        });

        if error < config.eps1 {
            break StopReason::RelChange;
        }
        if let [.., previous, latest] = error_history[..] {
            if (latest - previous).abs() < config.eps2 {
                break StopReason::ChangeStagnation;
            }
        }
    };

    Ok(OptimReport {
        iterations: error_history.len(),
        cost_history,
        error_history,
        stop_reason,
        final_control: u,
        final_state: y_final,
        log,
        armijo_failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ProblemConfig {
        ProblemConfig::default()
    }

    #[test]
    fn projection_clips() {
        let u = ControlTrajectory::from_values(1, 3, vec![70.0, 40.0, 5.0]).unwrap();
        let p = project_box(&u, 20.0, 60.0);
        assert_eq!(p.as_slice(), &[60.0, 40.0, 20.0]);
    }

    #[test]
    fn gradient_formula() {
        let zero = ControlTrajectory::constant(2, 3, 0.0);
        let u = ControlTrajectory::from_values(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let mut c = cfg();
        c.lambda = 0.0;
        assert!(reduced_gradient(&zero, &u, &c).as_slice().iter().all(|&g| g == 0.0));
        c.lambda = 0.5;
        let g = reduced_gradient(&zero, &u, &c);
        assert_eq!(g.as_slice(), u.map(|v| 0.5 * v).as_slice());
        let p = ControlTrajectory::constant(2, 3, 2.0);
        let g = reduced_gradient(&p, &u, &c);
        assert_eq!(g.level(0)[0], 100.0 * 2.0 + 0.5);
    }

    #[test]
    fn bang_bang_signs() {
        let mut c = cfg();
        c.lambda = 0.0;
        let p = ControlTrajectory::from_values(1, 3, vec![1.0, -1.0, 0.0]).unwrap();
        assert_eq!(bang_bang_control(&p, &c).as_slice(), &[20.0, 60.0, 40.0]);
    }

    #[test]
    fn armijo_accepts_full_step_on_quadratic() {
        let u = ControlTrajectory::from_values(1, 3, vec![1.0, -2.0, 0.5]).unwrap();
        let d = u.map(|v| -v);
        let half_sq = |c: &ControlTrajectory| Ok(0.5 * c.norm().powi(2));
        let j0 = half_sq(&u).unwrap();
        let norm_sq = d.norm().powi(2);
        let step = armijo_step(&u, &d, j0, norm_sq, (-10.0, 10.0), 1.0, ArmijoOptions::default(), half_sq).unwrap();
        assert!(step.sufficient_decrease);
        assert_eq!(step.step, 1.0);
        assert_eq!(step.cost, 0.0);
    }

    #[test]
    fn armijo_constant_cost_returns_smallest_step() {
        let u = ControlTrajectory::from_values(1, 2, vec![1.0, 1.0]).unwrap();
        let d = u.map(|v| -v);
        let mut calls = 0;
        let step = armijo_step(&u, &d, 3.0, 2.0, (-10.0, 10.0), 1.0, ArmijoOptions::default(), |_| {
            calls += 1;
            Ok(3.0)
        })
        .unwrap();
        assert!(!step.sufficient_decrease);
        assert_eq!(calls, 31);
        assert_eq!(step.step, 0.5f64.powi(30));
    }

    proptest::proptest! {
        #[test]
        fn projection_idempotent_and_nonexpansive(
            a in proptest::collection::vec(-100.0f64..150.0, 12),
            b in proptest::collection::vec(-100.0f64..150.0, 12),
        ) {
            let ua = ControlTrajectory::from_values(3, 4, a).unwrap();
            let ub = ControlTrajectory::from_values(3, 4, b).unwrap();
            let pa = project_box(&ua, 20.0, 60.0);
            let pb = project_box(&ub, 20.0, 60.0);
            proptest::prop_assert_eq!(project_box(&pa, 20.0, 60.0), pa.clone());
            let lhs = pa.zip_map(&pb, |x, y| x - y).norm();
            let rhs = ua.zip_map(&ub, |x, y| x - y).norm();
            proptest::prop_assert!(lhs <= rhs + 1e-12);
            proptest::prop_assert!(pa.as_slice().iter().all(|v| (20.0..=60.0).contains(v)));
        }
    }
}
