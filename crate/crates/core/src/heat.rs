//! Implicit Euler time stepping for the state (forward) and adjoint
//! (backward) heat equations on the dome mesh.
//!
//! Pool vertices are eliminated: the state is pinned to the water temperature
//! `g` there and the adjoint to zero, and only the remaining degrees of
//! freedom enter the linear solves. The system matrix
//! `M + τ(K + α·M_R)` is constant in time and shared by both directions.

use crate::assembly::{dirichlet_partition, DofPartition, FemMatrices};
use crate::error::{Error, Result};
use crate::linalg::{cg_solve, dot, CgOptions, SparseMatrix};
use crate::mesh::{Point2, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    final_time: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(final_time: f64, n_steps: usize) -> Result<Self> {
        if !(final_time > 0.0) || !final_time.is_finite() {
            return Err(Error::param("final_time", format!("must be positive, got {final_time}")));
        }
        if n_steps == 0 {
            return Err(Error::param("n_steps", "need at least one time step"));
        }
        Ok(Self { final_time, n_steps })
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_levels(&self) -> usize {
        self.n_steps + 1
    }

    pub fn tau(&self) -> f64 {
        self.final_time / self.n_steps as f64
    }

    pub fn time(&self, level: usize) -> f64 {
        if level == self.n_steps {
            self.final_time
        } else {
            level as f64 * self.tau()
        }
    }
}

/// Scalars of the heating model and of the projected gradient iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemConfig {
    /// Water temperature on the pool boundary.
    pub g: f64,
    /// Heat transfer coefficient multiplying the air temperature on Γ_R.
    pub alpha: f64,
    /// Heat transfer coefficient multiplying the control on Γ_R.
    pub beta: f64,
    /// Control cost weight.
    pub lambda: f64,
    pub final_time: f64,
    pub n_steps: usize,
    pub u_a: f64,
    pub u_b: f64,
    /// Desired temperature at the final time.
    pub y_d: f64,
    /// Initial air temperature.
    pub y_0: f64,
    /// Constant step length.
    pub gamma: f64,
    /// Bound on the relative control change.
    pub eps1: f64,
    /// Bound on the change of the relative control change.
    pub eps2: f64,
    pub k_max: usize,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            g: 20.0,
            alpha: 100.0,
            beta: 100.0,
            lambda: 1e-2,
            final_time: 1.0,
            n_steps: 250,
            u_a: 20.0,
            u_b: 60.0,
            y_d: 30.0,
            y_0: 0.0,
            gamma: 1.618,
            eps1: 1e-1,
            eps2: 1e-2,
            k_max: 20,
        }
    }
}

impl ProblemConfig {
    /// Check every invariant, collecting one message per offending field.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let finite = [
            ("g", self.g),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("lambda", self.lambda),
            ("final_time", self.final_time),
            ("u_a", self.u_a),
            ("u_b", self.u_b),
            ("y_d", self.y_d),
            ("y_0", self.y_0),
            ("gamma", self.gamma),
            ("eps1", self.eps1),
            ("eps2", self.eps2),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                problems.push(format!("{name}: must be finite, got {value}"));
            }
        }
        if self.u_a > self.u_b {
            problems.push(format!("u_a: lower bound {} exceeds upper bound u_b = {}", self.u_a, self.u_b));
        }
        if self.lambda < 0.0 {
            problems.push(format!("lambda: must be >= 0, got {}", self.lambda));
        }
        if self.alpha < 0.0 {
            problems.push(format!("alpha: must be >= 0, got {}", self.alpha));
        }
        if !(self.gamma > 0.0) {
            problems.push(format!("gamma: must be > 0, got {}", self.gamma));
        }
        if !(self.final_time > 0.0) {
            problems.push(format!("final_time: must be > 0, got {}", self.final_time));
        }
        if self.n_steps == 0 {
            problems.push("n_steps: must be >= 1".to_string());
        }
        if self.k_max == 0 {
            problems.push("k_max: must be >= 1".to_string());
        }
        if self.eps1 < 0.0 {
            problems.push(format!("eps1: must be >= 0, got {}", self.eps1));
        }
        if self.eps2 < 0.0 {
            problems.push(format!("eps2: must be >= 0, got {}", self.eps2));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.final_time, self.n_steps)
    }
}

/// Nodal values at every time level, stored level-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    n_nodes: usize,
    values: Vec<f64>,
}

impl StateTrajectory {
    pub fn new(n_nodes: usize, values: Vec<f64>) -> Result<Self> {
        if n_nodes == 0 || !values.len().is_multiple_of(n_nodes) {
            return Err(Error::DimensionMismatch {
                expected: n_nodes,
                found: values.len(),
            });
        }
        Ok(Self { n_nodes, values })
    }

    fn with_capacity(n_nodes: usize, n_levels: usize) -> Self {
        Self {
            n_nodes,
            values: Vec::with_capacity(n_nodes * n_levels),
        }
    }

    fn push_level(&mut self, level: &[f64]) {
        debug_assert_eq!(level.len(), self.n_nodes);
        self.values.extend_from_slice(level);
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_levels(&self) -> usize {
        self.values.len() / self.n_nodes
    }

    pub fn level(&self, m: usize) -> &[f64] {
        &self.values[m * self.n_nodes..(m + 1) * self.n_nodes]
    }

    pub fn last(&self) -> &[f64] {
        self.level(self.n_levels() - 1)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Values at `nodes` for every level, as a control-shaped array.
    pub fn restrict(&self, nodes: &[usize]) -> ControlTrajectory {
        let values = (0..self.n_levels())
            .flat_map(|m| {
                let level = self.level(m);
                nodes.iter().map(move |&v| level[v])
            })
            .collect();
        ControlTrajectory {
            n_levels: self.n_levels(),
            n_nodes: nodes.len(),
            values,
        }
    }
}

/// Values on the ordered heater node list at every time level, level-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTrajectory {
    n_levels: usize,
    n_nodes: usize,
    values: Vec<f64>,
}

impl ControlTrajectory {
    pub fn constant(n_levels: usize, n_nodes: usize, value: f64) -> Self {
        Self {
            n_levels,
            n_nodes,
            values: vec![value; n_levels * n_nodes],
        }
    }

    pub fn from_values(n_levels: usize, n_nodes: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_levels * n_nodes {
            return Err(Error::DimensionMismatch {
                expected: n_levels * n_nodes,
                found: values.len(),
            });
        }
        Ok(Self {
            n_levels,
            n_nodes,
            values,
        })
    }

    /// Build by evaluating `f(level, node_position)`.
    pub fn from_fn(n_levels: usize, n_nodes: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let values = (0..n_levels)
            .flat_map(|m| (0..n_nodes).map(move |k| (m, k)))
            .map(|(m, k)| f(m, k))
            .collect();
        Self {
            n_levels,
            n_nodes,
            values,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn level(&self, m: usize) -> &[f64] {
        &self.values[m * self.n_nodes..(m + 1) * self.n_nodes]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn same_shape(&self, other: &ControlTrajectory) -> bool {
        self.n_nodes == other.n_nodes && self.n_levels == other.n_levels
    }

    /// Entrywise `f(a, b)` of two equally shaped arrays.
    pub fn zip_map(&self, other: &ControlTrajectory, f: impl Fn(f64, f64) -> f64) -> ControlTrajectory {
        assert!(self.same_shape(other), "control shapes differ");
        ControlTrajectory {
            n_levels: self.n_levels,
            n_nodes: self.n_nodes,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ControlTrajectory {
        ControlTrajectory {
            n_levels: self.n_levels,
            n_nodes: self.n_nodes,
            values: self.values.iter().map(|&a| f(a)).collect(),
        }
    }

    /// Euclidean norm over all (level, node) entries.
    pub fn norm(&self) -> f64 {
        dot(&self.values, &self.values).sqrt()
    }
}

/// Volumetric heat source `f(t, x)`, only used by manufactured-solution tests.
pub type Source<'s> = &'s (dyn Fn(f64, Point2) -> f64 + Sync);

/// Everything needed to run forward and adjoint solves on one mesh and
/// time grid: the reduced system matrix and the coupling blocks.
pub struct HeatProblem<'a> {
    mesh: &'a TriMesh,
    matrices: &'a FemMatrices,
    config: ProblemConfig,
    grid: TimeGrid,
    partition: DofPartition,
    robin_nodes: Vec<usize>,
    /// `(M + τ(K + αM_R))[D, D]`
    system: SparseMatrix,
    /// `(M + τ(K + αM_R))[D, P]`
    system_dirichlet: SparseMatrix,
    /// `M[D, :]`
    mass_rows: SparseMatrix,
    /// `M[D, D]`
    mass_dofs: SparseMatrix,
    /// `τβ·M_R[D, R]`
    control_input: SparseMatrix,
    /// `M_R[R, R]`
    robin_mass: SparseMatrix,
    cg: CgOptions,
}

impl<'a> HeatProblem<'a> {
    pub fn new(mesh: &'a TriMesh, matrices: &'a FemMatrices, config: ProblemConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.time_grid()?;
        let n = mesh.n_vertices();
        for (name, m) in [
            ("mass", &matrices.mass),
            ("stiffness", &matrices.stiffness),
            ("robin_mass", &matrices.robin_mass),
        ] {
            if m.n_rows() != n || m.n_cols() != n {
                return Err(Error::param(
                    "matrices",
                    format!("{name} is {}x{}, mesh has {n} vertices", m.n_rows(), m.n_cols()),
                ));
            }
        }
        let tau = grid.tau();
        let partition = dirichlet_partition(mesh);
        let robin_nodes = mesh.robin_nodes();

        let operator = SparseMatrix::linear_combination(1.0, &matrices.stiffness, config.alpha, &matrices.robin_mass)?;
        let full = SparseMatrix::linear_combination(1.0, &matrices.mass, tau, &operator)?;
        let all: Vec<usize> = (0..n).collect();
        let control_input = matrices
            .robin_mass
            .submatrix(&partition.dofs, &robin_nodes)
            .scaled(tau * config.beta);

        Ok(Self {
            mesh,
            matrices,
            config,
            grid,
            system: full.submatrix(&partition.dofs, &partition.dofs),
            system_dirichlet: full.submatrix(&partition.dofs, &partition.dirichlet),
            mass_rows: matrices.mass.submatrix(&partition.dofs, &all),
            mass_dofs: matrices.mass.submatrix(&partition.dofs, &partition.dofs),
            control_input,
            robin_mass: matrices.robin_mass.submatrix(&robin_nodes, &robin_nodes),
            partition,
            robin_nodes,
            cg: CgOptions::default(),
        })
    }

    pub fn with_cg_options(mut self, cg: CgOptions) -> Self {
        self.cg = cg;
        self
    }

    pub fn mesh(&self) -> &TriMesh {
        self.mesh
    }

    pub fn matrices(&self) -> &FemMatrices {
        self.matrices
    }

    pub fn config(&self) -> &ProblemConfig {
        &self.config
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn partition(&self) -> &DofPartition {
        &self.partition
    }

    /// Ordered heater node list; control arrays are indexed by position in it.
    pub fn robin_nodes(&self) -> &[usize] {
        &self.robin_nodes
    }

    /// Reduced system matrix on the free degrees of freedom.
    pub fn system_matrix(&self) -> &SparseMatrix {
        &self.system
    }

    pub fn constant_control(&self, value: f64) -> ControlTrajectory {
        ControlTrajectory::constant(self.grid.n_levels(), self.robin_nodes.len(), value)
    }

    fn check_control(&self, control: &ControlTrajectory) -> Result<()> {
        if control.n_nodes() != self.robin_nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.robin_nodes.len(),
                found: control.n_nodes(),
            });
        }
        if control.n_levels() != self.grid.n_levels() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.n_levels(),
                found: control.n_levels(),
            });
        }
        Ok(())
    }

    /// Level-0 state: `y_0` on free vertices, `g` on pool vertices.
    pub fn initial_state(&self) -> Vec<f64> {
        let mut y = vec![self.config.y_0; self.mesh.n_vertices()];
        for &v in &self.partition.dirichlet {
            y[v] = self.config.g;
        }
        y
    }

    /// Forward solve returning the whole trajectory.
    pub fn solve_forward(&self, control: &ControlTrajectory) -> Result<StateTrajectory> {
        let mut traj = StateTrajectory::with_capacity(self.mesh.n_vertices(), self.grid.n_levels());
        self.forward_with(control, &self.initial_state(), None, |_, y| traj.push_level(y))?;
        Ok(traj)
    }

    /// Forward solve keeping only `y(T)`.
    pub fn solve_forward_final(&self, control: &ControlTrajectory) -> Result<Vec<f64>> {
        self.forward_with(control, &self.initial_state(), None, |_, _| {})
    }

    /// Forward solve from an explicit initial vector, with an optional source
    /// term. Pool entries of `initial` are overwritten with `g`. `observe` is
    /// called with every level, including level 0. Returns the final level.
    pub fn forward_with(
        &self,
        control: &ControlTrajectory,
        initial: &[f64],
        source: Option<Source<'_>>,
        mut observe: impl FnMut(usize, &[f64]),
    ) -> Result<Vec<f64>> {
        self.check_control(control)?;
        let n = self.mesh.n_vertices();
        if initial.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: initial.len(),
            });
        }
        let tau = self.grid.tau();
        let dofs = &self.partition.dofs;

        let mut y = initial.to_vec();
        for &v in &self.partition.dirichlet {
            y[v] = self.config.g;
        }
        observe(0, &y);

        // constant Dirichlet lift: A[D, P]·g
        let lift = self
            .system_dirichlet
            .spmv(&vec![self.config.g; self.partition.dirichlet.len()])?;
        let mut rhs = vec![0.0; dofs.len()];
        let mut input = vec![0.0; dofs.len()];
        let mut source_nodal = vec![0.0; if source.is_some() { n } else { 0 }];
        let mut source_rows = vec![0.0; if source.is_some() { dofs.len() } else { 0 }];
        let mut guess: Vec<f64> = dofs.iter().map(|&v| y[v]).collect();

        for m in 0..self.grid.n_steps() {
            self.mass_rows.spmv_into(&y, &mut rhs)?;
            self.control_input.spmv_into(control.level(m + 1), &mut input)?;
            for ((r, i), l) in rhs.iter_mut().zip(&input).zip(&lift) {
                *r += i - l;
            }
            if let Some(f) = source {
                let t = self.grid.time(m + 1);
                for (s, p) in source_nodal.iter_mut().zip(self.mesh.vertices()) {
                    *s = f(t, *p);
                }
                self.mass_rows.spmv_into(&source_nodal, &mut source_rows)?;
                for (r, s) in rhs.iter_mut().zip(&source_rows) {
                    *r += tau * s;
                }
            }
            let sol = cg_solve(&self.system, &rhs, &guess, self.cg).map_err(|e| e.at_level(m + 1))?;
            for (&v, &value) in dofs.iter().zip(&sol.x) {
                y[v] = value;
            }
            guess = sol.x;
            observe(m + 1, &y);
        }
        Ok(y)
    }

    /// Adjoint solve backward from `p(T) = y(T) − y_d`, returning the whole
    /// trajectory indexed by physical time level.
    pub fn solve_adjoint(&self, y_final: &[f64]) -> Result<StateTrajectory> {
        let n = self.mesh.n_vertices();
        let mut levels = vec![Vec::new(); self.grid.n_levels()];
        self.adjoint_with(y_final, |m, p| levels[m] = p.to_vec())?;
        StateTrajectory::new(n, levels.concat())
    }

    /// Adjoint solve keeping only the heater-node values.
    pub fn solve_adjoint_on_robin(&self, y_final: &[f64]) -> Result<ControlTrajectory> {
        let n_r = self.robin_nodes.len();
        let mut values = vec![0.0; self.grid.n_levels() * n_r];
        self.adjoint_with(y_final, |m, p| {
            for (slot, &v) in values[m * n_r..(m + 1) * n_r].iter_mut().zip(&self.robin_nodes) {
                *slot = p[v];
            }
        })?;
        ControlTrajectory::from_values(self.grid.n_levels(), n_r, values)
    }

    /// Backward sweep; `observe(m, p^m)` runs for m = N, N−1, …, 0.
    pub fn adjoint_with(&self, y_final: &[f64], observe: impl FnMut(usize, &[f64])) -> Result<()> {
        self.check_state(y_final)?;
        let terminal = self.partition.dofs.iter().map(|&v| y_final[v] - self.config.y_d).collect();
        self.backward_sweep(terminal, observe)
    }

    /// Adjoint of the discrete scheme itself. The terminal data is the
    /// `M`-projection of `y(T) − y_d` onto the free nodes, so the pool part of
    /// the mismatch is kept; the sensitivity of the cost to `u^m` is then
    /// `τβ·M_R p^{m−1}`.
    pub fn discrete_adjoint_with(&self, y_final: &[f64], observe: impl FnMut(usize, &[f64])) -> Result<()> {
        self.check_state(y_final)?;
        let mismatch: Vec<f64> = y_final.iter().map(|y| y - self.config.y_d).collect();
        let mut rhs = vec![0.0; self.partition.dofs.len()];
        self.mass_rows.spmv_into(&mismatch, &mut rhs)?;
        let guess: Vec<f64> = self.partition.dofs.iter().map(|&v| mismatch[v]).collect();
        let terminal = cg_solve(&self.mass_dofs, &rhs, &guess, self.cg)
            .map_err(|e| e.at_level(self.grid.n_steps()))?
            .x;
        self.backward_sweep(terminal, observe)
    }

    /// Discrete adjoint on the heater nodes, shifted so that level `m` holds
    /// `p^{m−1}` (level 0 repeats `p^0`; it carries no weight in the cost).
    pub fn solve_discrete_adjoint_on_robin(&self, y_final: &[f64]) -> Result<ControlTrajectory> {
        let n_r = self.robin_nodes.len();
        let n_levels = self.grid.n_levels();
        let mut values = vec![0.0; n_levels * n_r];
        let robin = &self.robin_nodes;
        let mut store = |level: usize, p: &[f64]| {
            for (slot, &v) in values[level * n_r..(level + 1) * n_r].iter_mut().zip(robin) {
                *slot = p[v];
            }
        };
        self.discrete_adjoint_with(y_final, |m, p| {
            if m + 1 < n_levels {
                store(m + 1, p);
            }
            if m == 0 {
                store(0, p);
            }
        })?;
        ControlTrajectory::from_values(n_levels, n_r, values)
    }

    fn check_state(&self, y: &[f64]) -> Result<()> {
        let n = self.mesh.n_vertices();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        Ok(())
    }

    fn backward_sweep(&self, mut p_dofs: Vec<f64>, mut observe: impl FnMut(usize, &[f64])) -> Result<()> {
        let dofs = &self.partition.dofs;
        let mut p = vec![0.0; self.mesh.n_vertices()];
        for (&v, &value) in dofs.iter().zip(&p_dofs) {
            p[v] = value;
        }
        let n_steps = self.grid.n_steps();
        observe(n_steps, &p);

        let mut rhs = vec![0.0; dofs.len()];
        for m in (0..n_steps).rev() {
            self.mass_dofs.spmv_into(&p_dofs, &mut rhs)?;
            let sol = cg_solve(&self.system, &rhs, &p_dofs, self.cg).map_err(|e| e.at_level(m))?;
            p_dofs = sol.x;
            for (&v, &value) in dofs.iter().zip(&p_dofs) {
                p[v] = value;
            }
            observe(m, &p);
        }
        Ok(())
    }

    /// Stationary state for a time-constant control value:
    /// `(K + αM_R) y = βM_R u` with `y = g` on the pool.
    pub fn steady_state(&self, control_value: f64) -> Result<Vec<f64>> {
        let n = self.mesh.n_vertices();
        let operator = SparseMatrix::linear_combination(
            1.0,
            &self.matrices.stiffness,
            self.config.alpha,
            &self.matrices.robin_mass,
        )?;
        let dofs = &self.partition.dofs;
        let reduced = operator.submatrix(dofs, dofs);
        let coupling = operator.submatrix(dofs, &self.partition.dirichlet);

        let mut u = vec![0.0; n];
        for &v in &self.robin_nodes {
            u[v] = control_value;
        }
        let forcing = self.matrices.robin_mass.spmv(&u)?;
        let lift = coupling.spmv(&vec![self.config.g; self.partition.dirichlet.len()])?;
        let rhs: Vec<f64> = dofs
            .iter()
            .zip(&lift)
            .map(|(&v, l)| self.config.beta * forcing[v] - l)
            .collect();
        let guess = vec![self.config.g; dofs.len()];
        let sol = cg_solve(&reduced, &rhs, &guess, self.cg)?;

        let mut y = vec![self.config.g; n];
        for (&v, &value) in dofs.iter().zip(&sol.x) {
            y[v] = value;
        }
        Ok(y)
    }

    /// `∫_Ω v w` for nodal vectors.
    pub fn mass_inner(&self, v: &[f64], w: &[f64]) -> Result<f64> {
        self.matrices.mass.inner(v, w)
    }

    /// Discrete `L²(Σ_R)` inner product of two control arrays: rectangle rule
    /// over levels 1..=N with the heater boundary mass.
    pub fn control_inner(&self, a: &ControlTrajectory, b: &ControlTrajectory) -> Result<f64> {
        self.check_control(a)?;
        self.check_control(b)?;
        let tau = self.grid.tau();
        let mut total = 0.0;
        let mut tmp = vec![0.0; self.robin_nodes.len()];
        for m in 1..self.grid.n_levels() {
            self.robin_mass.spmv_into(b.level(m), &mut tmp)?;
            total += tau * dot(a.level(m), &tmp);
        }
        Ok(total)
    }

    /// Reduced cost `½‖y(T) − y_d‖²_M + (λ/2)‖u‖²_{L²(Σ_R)}`.
    pub fn cost(&self, y_final: &[f64], control: &ControlTrajectory) -> Result<f64> {
        let mismatch: Vec<f64> = y_final.iter().map(|y| y - self.config.y_d).collect();
        let tracking = 0.5 * self.mass_inner(&mismatch, &mismatch)?;
        let energy = if self.config.lambda == 0.0 {
            0.0
        } else {
            self.control_inner(control, control)?
        };
        Ok(tracking + 0.5 * self.config.lambda * energy)
    }

    /// Cost of a control, running one forward solve.
    pub fn reduced_cost(&self, control: &ControlTrajectory) -> Result<f64> {
        let y_final = self.solve_forward_final(control)?;
        self.cost(&y_final, control)
    }
}
