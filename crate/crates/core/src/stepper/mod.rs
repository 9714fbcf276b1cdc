//! Backward-Euler time marching.
//!
//! Each step solves a linear system with coefficients frozen per element,
//! either once at the previous state (semi-implicit) or repeatedly at the
//! latest iterate until the iterates stop moving (Picard). Systems are
//! solved for the increment over an initial guess so that solver error
//! scales with the change, not with the state.

pub mod mms;

use thiserror::Error;

use crate::assembly::{
    centroid_states, component_totals, discrete_energy, Assembler, AssemblyError,
    BoundaryForcing, Field, SparseSystem, VolumeSource,
};
use crate::domain::Mesh;
use crate::linsolve::{solve_from, SolveError, SolveOptions};
use crate::materials::{CoefficientSet, LinearParams, MaterialError, MaterialModel, StateSample};

pub use mms::{
    l2_error, mms_verify, ConstantField, ConvergenceRow, ConvergenceTable, ExactSolution,
    LinearXField, MmsCase, TimeProfile, TwoLayerField,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("material evaluation failed on triangle {element}: {source}")]
    Material {
        element: usize,
        source: MaterialError,
    },
    #[error("state became non-finite")]
    NonfiniteState,
    #[error("fixed-point iteration is not contracting (ratios {ratios:?}); reduce the time step")]
    NonContraction { ratios: Vec<f64> },
    #[error("fixed-point iteration did not converge in {iterations} iterations (last change {last_delta:e})")]
    MaxPicardExceeded { iterations: usize, last_delta: f64 },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    SemiImplicit,
    Picard,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::SemiImplicit => "semi_implicit",
            Strategy::Picard => "picard",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "semi_implicit" => Some(Strategy::SemiImplicit),
            "picard" => Some(Strategy::Picard),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOptions {
    pub solve: SolveOptions,
    /// Picard stops when the nodal max-norm change is at most this.
    pub eps_fp: f64,
    pub k_max: usize,
    /// Consecutive non-contracting iterations tolerated before giving up.
    pub non_contraction_window: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            solve: SolveOptions::default(),
            eps_fp: 1e-8,
            k_max: 50,
            non_contraction_window: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub n: usize,
    pub field: Field,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    /// Index `k` of the first iterate whose successor moved by at most the
    /// tolerance; 0 for a semi-implicit step.
    pub picard_iters: usize,
    /// Successive max-norm changes δ_1, δ_2, … of the iterates.
    pub deltas: Vec<f64>,
    /// δ_{k+1}/δ_k.
    pub contraction_ratios: Vec<f64>,
    pub linear_residual: f64,
    pub linear_iterations: usize,
    /// Energy functional of the new state (linear model only).
    pub energy: Option<f64>,
    /// Storage-weighted totals of the new state.
    pub mass: [f64; 2],
    /// Element states projected back into the material bounds.
    pub clamped: usize,
}

/// Everything that defines the spatial problem.
pub struct Problem<'a> {
    pub mesh: &'a Mesh,
    /// Material of each layer.
    pub materials: Vec<&'a dyn MaterialModel>,
    pub drive: &'a dyn BoundaryForcing,
    pub source: &'a dyn VolumeSource,
}

pub struct Stepper<'a> {
    pub problem: Problem<'a>,
    assembler: Assembler<'a>,
    pub options: StepOptions,
    linear: Option<Vec<LinearParams>>,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: Problem<'a>, options: StepOptions) -> Self {
        let assembler = Assembler::new(problem.mesh, options.solve.exec);
        Self {
            problem,
            assembler,
            options,
            linear: None,
        }
    }

    /// Enables the energy diagnostic with per-layer linear parameters.
    pub fn with_linear_params(mut self, params: Vec<LinearParams>) -> Self {
        self.linear = Some(params);
        self
    }

    pub fn mesh(&self) -> &Mesh {
        self.problem.mesh
    }

    pub fn assembler(&self) -> &Assembler<'a> {
        &self.assembler
    }

    /// Coefficients of every element at its centroid state, with the
    /// number of states that had to be clamped into material bounds.
    pub fn coefficients(&self, field: &Field) -> Result<(Vec<CoefficientSet>, usize), StepError> {
        let mesh = self.problem.mesh;
        let states = centroid_states(mesh, field);
        let evaluated = self.options.solve.exec.map_range(states.len(), |t| {
            let model = self.problem.materials[mesh.triangles[t].layer];
            let (s, moved) = model.bounds().clamp(StateSample::from_array(states[t]));
            model
                .evaluate(s)
                .map(|c| (c, moved))
                .map_err(|source| StepError::Material { element: t, source })
        });
        let mut coeffs = Vec::with_capacity(evaluated.len());
        let mut clamped = 0;
        for r in evaluated {
            let (c, moved) = r?;
            clamped += usize::from(moved);
            coeffs.push(c);
        }
        Ok((coeffs, clamped))
    }

    /// Solves `system` for `guess + d`.
    fn solve_increment(
        &self,
        mut system: SparseSystem,
        guess: &Field,
    ) -> Result<(Field, f64, usize), StepError> {
        system.equilibrate_components();
        let au = system.matrix.mul(self.options.solve.exec, &guess.values);
        for (r, a) in system.rhs.iter_mut().zip(&au) {
            *r -= a;
        }
        let sol = solve_from(&system, None, self.options.solve)?;
        let values: Vec<f64> = guess.values.iter().zip(&sol.x).map(|(u, d)| u + d).collect();
        if !values.iter().all(|v| v.is_finite()) {
            return Err(StepError::NonfiniteState);
        }
        Ok((Field { values }, sol.residual, sol.iterations))
    }

    fn finish(&self, field: &Field, coeffs: &[CoefficientSet], report: &mut StepReport) {
        report.mass = component_totals(self.problem.mesh, field, coeffs);
        report.energy = self
            .linear
            .as_ref()
            .map(|p| discrete_energy(self.problem.mesh, field, p));
    }

    /// One step with coefficients frozen at the previous state.
    pub fn semi_implicit_step(
        &self,
        state: &SimState,
        h_t: f64,
    ) -> Result<(SimState, StepReport), StepError> {
        let t_new = state.t + h_t;
        let (coeffs, clamped) = self.coefficients(&state.field)?;
        let sys = self.assembler.assemble(
            &coeffs,
            &state.field,
            h_t,
            self.problem.drive,
            self.problem.source,
            t_new,
        )?;
        let (field, residual, iterations) = self.solve_increment(sys, &state.field)?;
        let mut report = StepReport {
            deltas: vec![field.max_abs_diff(&state.field)],
            linear_residual: residual,
            linear_iterations: iterations,
            clamped,
            ..Default::default()
        };
        self.finish(&field, &coeffs, &mut report);
        Ok((
            SimState {
                t: t_new,
                n: state.n + 1,
                field,
            },
            report,
        ))
    }

    /// One step with Picard iteration on the frozen coefficients.
    pub fn picard_step(
        &self,
        state: &SimState,
        h_t: f64,
    ) -> Result<(SimState, StepReport), StepError> {
        let t_new = state.t + h_t;
        let opts = &self.options;
        let mut report = StepReport::default();
        let mut iterate = state.field.clone();
        let mut bad_run = 0;
        for k in 0..opts.k_max {
            let (coeffs, clamped) = self.coefficients(&iterate)?;
            report.clamped += clamped;
            let sys = self.assembler.assemble(
                &coeffs,
                &state.field,
                h_t,
                self.problem.drive,
                self.problem.source,
                t_new,
            )?;
            let (next, residual, iterations) = self.solve_increment(sys, &iterate)?;
            report.linear_residual = residual;
            report.linear_iterations += iterations;
            let delta = next.max_abs_diff(&iterate);
            if let Some(&prev) = report.deltas.last() {
                let ratio = if prev > 0.0 { delta / prev } else { 0.0 };
                report.contraction_ratios.push(ratio);
                if ratio >= 1.0 {
                    bad_run += 1;
                    if bad_run >= opts.non_contraction_window {
                        return Err(StepError::NonContraction {
                            ratios: report.contraction_ratios,
                        });
                    }
                } else {
                    bad_run = 0;
                }
            }
            report.deltas.push(delta);
            iterate = next;
            if delta <= opts.eps_fp {
                report.picard_iters = k;
                self.finish(&iterate, &coeffs, &mut report);
                return Ok((
                    SimState {
                        t: t_new,
                        n: state.n + 1,
                        field: iterate,
                    },
                    report,
                ));
            }
        }
        Err(StepError::MaxPicardExceeded {
            iterations: opts.k_max,
            last_delta: report.deltas.last().copied().unwrap_or(f64::NAN),
        })
    }

    pub fn step(
        &self,
        strategy: Strategy,
        state: &SimState,
        h_t: f64,
    ) -> Result<(SimState, StepReport), StepError> {
        match strategy {
            Strategy::SemiImplicit => self.semi_implicit_step(state, h_t),
            Strategy::Picard => self.picard_step(state, h_t),
        }
    }

    /// Stationary solution with boundary data at time `t`, coefficients
    /// frozen at `guess`.
    pub fn steady(&self, guess: &Field, t: f64) -> Result<Field, StepError> {
        let (coeffs, _) = self.coefficients(guess)?;
        let sys = self.assembler.assemble(
            &coeffs,
            guess,
            f64::INFINITY,
            self.problem.drive,
            self.problem.source,
            t,
        )?;
        Ok(self.solve_increment(sys, guess)?.0)
    }
}

/// Free-function form of [`Stepper::semi_implicit_step`].
pub fn semi_implicit_step(
    stepper: &Stepper<'_>,
    state: &SimState,
    h_t: f64,
) -> Result<(SimState, StepReport), StepError> {
    stepper.semi_implicit_step(state, h_t)
}

/// Free-function form of [`Stepper::picard_step`] with explicit tolerances.
pub fn picard_step(
    stepper: &Stepper<'_>,
    state: &SimState,
    h_t: f64,
    eps_fp: f64,
    k_max: usize,
) -> Result<(SimState, StepReport), StepError> {
    let mut s = Stepper {
        problem: Problem {
            mesh: stepper.problem.mesh,
            materials: stepper.problem.materials.clone(),
            drive: stepper.problem.drive,
            source: stepper.problem.source,
        },
        assembler: stepper.assembler.clone(),
        options: stepper.options,
        linear: stepper.linear.clone(),
    };
    s.options.eps_fp = eps_fp;
    s.options.k_max = k_max;
    s.picard_step(state, h_t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub h_t: f64,
    pub t_end: f64,
    pub strategy: Strategy,
    /// Times at which the state is kept; the initial state is always kept.
    pub snapshot_times: Vec<f64>,
    /// Node indices recorded after every step.
    pub probes: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<SimState>,
    pub probe_times: Vec<f64>,
    /// `probe_values[p][k]`: probe `p` at `probe_times[k]`.
    pub probe_values: Vec<Vec<[f64; 2]>>,
    pub reports: Vec<StepReport>,
}

/// Number of uniform steps covering `[0, t_end]`.
pub fn step_count(h_t: f64, t_end: f64) -> Result<usize, StepError> {
    if !(h_t > 0.0 && h_t.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(StepError::InvalidSchedule(format!(
            "need h_t > 0 and t_end >= 0, got {h_t} and {t_end}"
        )));
    }
    let n = (t_end / h_t).round();
    if (n * h_t - t_end).abs() > 1e-9 * t_end.max(h_t) {
        return Err(StepError::InvalidSchedule(format!(
            "t_end {t_end} is not a multiple of h_t {h_t}"
        )));
    }
    Ok(n as usize)
}

/// Uniform stepping from `initial` at t = 0 to `t_end`.
pub fn run(
    stepper: &Stepper<'_>,
    initial: Field,
    opts: &RunOptions,
) -> Result<Trajectory, StepError> {
    let steps = step_count(opts.h_t, opts.t_end)?;
    let mut keep = vec![false; steps + 1];
    keep[0] = true;
    for &ts in &opts.snapshot_times {
        let k = (ts / opts.h_t).round();
        if !(0.0..=steps as f64).contains(&k) || (k * opts.h_t - ts).abs() > 1e-9 * opts.h_t.max(ts) {
            return Err(StepError::InvalidSchedule(format!(
                "snapshot time {ts} is not a step time in [0, {}]",
                opts.t_end
            )));
        }
        keep[k as usize] = true;
    }
    let mut state = SimState {
        t: 0.0,
        n: 0,
        field: initial,
    };
    let mut traj = Trajectory {
        probe_values: vec![Vec::with_capacity(steps + 1); opts.probes.len()],
        ..Default::default()
    };
    let record = |traj: &mut Trajectory, s: &SimState| {
        traj.probe_times.push(s.t);
        for (p, &node) in opts.probes.iter().enumerate() {
            traj.probe_values[p].push(s.field.get(node));
        }
    };
    record(&mut traj, &state);
    traj.snapshots.push(state.clone());
    for n in 1..=steps {
        let (mut next, report) = stepper.step(opts.strategy, &state, opts.h_t)?;
        // keep times exact multiples of the step
        next.t = n as f64 * opts.h_t;
        log::debug!(
            "step {n} t={} picard={} residual={:.3e}",
            next.t,
            report.picard_iters,
            report.linear_residual
        );
        if report.clamped > 0 {
            log::warn!("step {n}: {} element states clamped into material bounds", report.clamped);
        }
        record(&mut traj, &next);
        if keep[n] {
            traj.snapshots.push(next.clone());
        }
        traj.reports.push(report);
        state = next;
    }
    Ok(traj)
}

/// Largest mismatch between the initial field and the boundary data at
/// t = 0 over exterior-edge nodes, per component. Components with a zero
/// Newton coefficient carry no boundary data and are skipped.
pub fn initial_mismatch(mesh: &Mesh, field: &Field, drive: &dyn BoundaryForcing) -> [f64; 2] {
    let mut d = [0.0f64; 2];
    for e in &mesh.exterior_edges {
        let alpha = drive.alpha(e.segment);
        for &p in &e.nodes {
            let s = drive.sigma(e.segment, mesh.nodes[p], 0.0);
            let u = field.get(p);
            for c in 0..2 {
                if alpha[c] > 0.0 {
                    d[c] = d[c].max((u[c] - s[c]).abs());
                }
            }
        }
    }
    d
}
