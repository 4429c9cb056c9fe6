//! Incremental–iterative equilibrium driver.
//!
//! Each increment prescribes the macroscopic deformation `F̄`. The first linear
//! solve distributes `ΔF̄ = F̄ − ⟨F⟩` over the cell using the current tangent; the
//! following Newton iterations remove the equilibrium residual `G ⋆ P`. Because
//! every correction comes out of the projection it has zero mean, so `⟨F⟩ = F̄`
//! holds from the first update on.

mod cg;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cg::{cg_solve, ConjugateGradient, LinearSolution, LinearSolver, Operator};

use crate::constitutive::{macroscopic_equivalent_strain, ConstitutiveError, HistoryState, MaterialModel};
use crate::projection::{linearized_stress, ProjectionError, ProjectionOperator};
use crate::tensor_field::{field_mean, field_norm, ScalarField, Tensor2, Tensor2Field};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub eta_newton: f64,
    pub eta_cg: f64,
    pub max_newton: usize,
    /// `None` means `n · d²`, the size of the unknown.
    pub max_cg: Option<usize>,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { eta_newton: 1e-5, eta_cg: 1e-8, max_newton: 30, max_cg: None }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), String> {
        let mut errs = Vec::new();
        if !(self.eta_newton > 0.0 && self.eta_newton < 1.0) {
            errs.push(format!("eta_newton must lie in (0, 1), got {}", self.eta_newton));
        }
        if !(self.eta_cg > 0.0 && self.eta_cg < 1.0) {
            errs.push(format!("eta_cg must lie in (0, 1), got {}", self.eta_cg));
        }
        if self.max_newton < 1 {
            errs.push("max_newton must be at least 1".into());
        }
        if self.max_cg == Some(0) {
            errs.push("max_cg must be at least 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs.join("; "))
        }
    }
}

/// One load step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Increment {
    pub fbar: Tensor2,
    /// Pseudo-time label, e.g. the fraction of the loading program.
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub increment: usize,
    pub time: f64,
    /// Number of linear solves, the boundary-condition solve included.
    pub newton_iterations: usize,
    pub cg_iterations: Vec<usize>,
    /// `‖δF‖ / ‖F_(t)‖` per solve.
    pub residuals: Vec<f64>,
    pub wall_ms: f64,
    pub eps_bar: f64,
    /// `‖G ⋆ P‖ / ‖P‖` at the converged state (0 for a stress-free cell).
    pub equilibrium: f64,
}

impl SolveReport {
    pub fn cg_total(&self) -> usize {
        self.cg_iterations.iter().sum()
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("Newton iteration did not converge in {} solves (last residual {:e})", .report.newton_iterations, .report.final_residual())]
    NewtonDiverged { report: Box<SolveReport> },
    #[error("conjugate gradients stalled after {iterations} iterations (relative residual {relative_residual:e})")]
    CgStalled { iterations: usize, relative_residual: f64 },
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error("invalid increment: {0}")]
    InvalidIncrement(String),
}

/// Converged state of the cell.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub f: Tensor2Field,
    pub history: HistoryState,
    pub stress: Tensor2Field,
    pub equivalent_stress: ScalarField,
}

impl SolverState {
    /// Undeformed cell, `F = I`, with the model's initial history.
    pub fn initial(model: &dyn MaterialModel) -> Self {
        let shape = model.shape();
        Self {
            f: Tensor2Field::broadcast(shape, &Tensor2::identity(shape.dim())),
            history: model.initial_history(),
            stress: Tensor2Field::zeros(shape),
            equivalent_stress: ScalarField::zeros(shape),
        }
    }
}

pub fn solve_increment(
    state: &SolverState,
    inc: &Increment,
    model: &dyn MaterialModel,
    g: &ProjectionOperator,
    params: &SolverParams,
) -> Result<(SolverState, SolveReport), SolverError> {
    solve_increment_with(state, inc, model, g, params, &ConjugateGradient, 0)
}

/// As [`solve_increment`] with an explicit inner solver; `index` labels the report.
pub fn solve_increment_with(
    state: &SolverState,
    inc: &Increment,
    model: &dyn MaterialModel,
    g: &ProjectionOperator,
    params: &SolverParams,
    linear: &dyn LinearSolver,
    index: usize,
) -> Result<(SolverState, SolveReport), SolverError> {
    let start = Instant::now();
    let shape = state.f.shape();
    let d = shape.dim();
    if inc.fbar.dim() != d {
        return Err(SolverError::InvalidIncrement(format!("F̄ is {0}×{0} on a {d}-D grid", inc.fbar.dim())));
    }
    if !(inc.fbar.det() > 0.0) {
        return Err(SolverError::InvalidIncrement(format!("det F̄ = {} is not positive", inc.fbar.det())));
    }
    let max_cg = params.max_cg.unwrap_or(shape.nodes() * d * d);
    let mut report = SolveReport {
        increment: index,
        time: inc.time,
        newton_iterations: 0,
        cg_iterations: Vec::new(),
        residuals: Vec::new(),
        wall_ms: 0.0,
        eps_bar: macroscopic_equivalent_strain(&inc.fbar),
        equilibrium: 0.0,
    };

    let f_t_norm = field_norm(&state.f);
    let mut f = state.f.clone();
    let mut ev = model.evaluate(&f, &state.history)?;

    let delta_fbar = Tensor2Field::broadcast(shape, &(inc.fbar - field_mean(&f)));
    let mut source = linearized_stress(&ev.tangent, &delta_fbar);
    let mut rhs = g.apply(&source)?.scaled(-1.0);
    loop {
        let tangent = &ev.tangent;
        let mut op = |x: &Tensor2Field| g.apply_projected_tangent(tangent, x);
        let sol = match attainable_tolerance(params.eta_cg, &rhs, &source) {
            Some(tol) => linear.solve(&mut op, &rhs, tol, max_cg)?,
            None => LinearSolution { solution: Tensor2Field::zeros(shape), iterations: 0, relative_residual: 0.0 },
        };
        if report.newton_iterations == 0 {
            f.axpy(1.0, &delta_fbar);
        }
        f.axpy(1.0, &sol.solution);
        ev = model.evaluate(&f, &state.history)?;

        let residual = field_norm(&sol.solution) / f_t_norm;
        report.newton_iterations += 1;
        report.cg_iterations.push(sol.iterations);
        report.residuals.push(residual);
        log::debug!(
            "increment {index} iteration {}: residual {residual:.3e}, {} CG iterations",
            report.newton_iterations - 1,
            sol.iterations
        );

        if report.newton_iterations > 1 && residual < params.eta_newton {
            break;
        }
        if report.newton_iterations >= params.max_newton || !residual.is_finite() {
            report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
            return Err(SolverError::NewtonDiverged { report: Box::new(report) });
        }
        rhs = g.apply(&ev.stress)?.scaled(-1.0);
        source = ev.stress.clone();
    }

    let p_norm = field_norm(&ev.stress);
    if p_norm > 0.0 {
        report.equilibrium = field_norm(&g.apply(&ev.stress)?) / p_norm;
    }
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let next = SolverState {
        f,
        history: HistoryState::commit(ev.trial),
        stress: ev.stress,
        equivalent_stress: ev.equivalent_stress,
    };
    Ok((next, report))
}

/// Relative round-off level of a projected field: `G ⋆ A` cannot be resolved
/// below about this fraction of `‖A‖`.
pub const ROUNDOFF_FLOOR: f64 = 1e-14;

/// CG tolerance for `rhs = −G ⋆ source`, raised so that the target never lies
/// below the round-off of `source`. `None` when `rhs` is round-off altogether
/// and the correction is zero.
fn attainable_tolerance(eta_cg: f64, rhs: &Tensor2Field, source: &Tensor2Field) -> Option<f64> {
    let b = field_norm(rhs);
    let floor = ROUNDOFF_FLOOR * field_norm(source);
    if b <= floor {
        None
    } else {
        Some(eta_cg.max(floor / b))
    }
}

/// Receives converged increments as they are produced.
pub trait ProgramSink {
    fn increment_done(&mut self, inc: &Increment, state: &SolverState, report: &SolveReport) -> std::io::Result<()>;
}

/// Sink that only keeps the reports.
#[derive(Debug, Default)]
pub struct ReportLog {
    pub reports: Vec<SolveReport>,
}

impl ProgramSink for ReportLog {
    fn increment_done(&mut self, _inc: &Increment, _state: &SolverState, report: &SolveReport) -> std::io::Result<()> {
        self.reports.push(report.clone());
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ProgramError {
    #[error("increment {increment} failed: {source}")]
    Solver {
        increment: usize,
        #[source]
        source: SolverError,
        /// Last converged state.
        state: Box<SolverState>,
    },
    #[error("output sink failed: {0}")]
    Sink(#[from] std::io::Error),
}

/// Solves the increments in order, committing history after each converged one.
pub fn run_program(
    initial: SolverState,
    increments: &[Increment],
    model: &dyn MaterialModel,
    g: &ProjectionOperator,
    params: &SolverParams,
    sink: &mut dyn ProgramSink,
) -> Result<SolverState, ProgramError> {
    let mut state = initial;
    for (index, inc) in increments.iter().enumerate() {
        match solve_increment_with(&state, inc, model, g, params, &ConjugateGradient, index) {
            Ok((next, report)) => {
                log::info!(
                    "increment {index}: {} Newton, {} CG iterations, residual {:.2e}",
                    report.newton_iterations,
                    report.cg_total(),
                    report.final_residual()
                );
                sink.increment_done(inc, &next, &report)?;
                state = next;
            }
            Err(source) => {
                return Err(ProgramError::Solver { increment: index, source, state: Box::new(state) });
            }
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{ElasticParams, Hyperelastic, MaterialFields, PlasticParams};
    use crate::projection::NyquistMode;
    use crate::tensor_field::GridShape;

    fn two_phase(shape: &GridShape) -> Hyperelastic {
        let soft = ElasticParams::new(1.0, 0.3).unwrap();
        let hard = ElasticParams::new(5.0, 0.3).unwrap();
        let mut fields = MaterialFields::uniform(shape, &PlasticParams::elastic_only(soft));
        for node in 0..shape.nodes() {
            let idx = shape.multi_index(node);
            if idx[0] < 2 && idx[1] < 2 {
                fields.lambda.data_mut()[node] = hard.lame_lambda();
                fields.mu.data_mut()[node] = hard.lame_mu();
            }
        }
        Hyperelastic::new(fields)
    }

    fn shear(g: f64) -> Tensor2 {
        Tensor2::from_row_major(2, &[1.0, g, 0.0, 1.0])
    }

    #[test]
    fn empty_program_returns_initial_state() {
        let shape = GridShape::unit(&[5, 5]).unwrap();
        let model = two_phase(&shape);
        let g = ProjectionOperator::new(&shape, NyquistMode::ZeroCompatible);
        let mut log = ReportLog::default();
        let init = SolverState::initial(&model);
        let out = run_program(init.clone(), &[], &model, &g, &SolverParams::default(), &mut log).unwrap();
        assert_eq!(out.f, init.f);
        assert!(log.reports.is_empty());
    }

    #[test]
    fn mean_is_prescribed_and_cell_equilibrated() {
        let shape = GridShape::unit(&[5, 5]).unwrap();
        let model = two_phase(&shape);
        let g = ProjectionOperator::new(&shape, NyquistMode::ZeroCompatible);
        let inc = Increment { fbar: shear(0.2), time: 1.0 };
        let (state, report) =
            solve_increment(&SolverState::initial(&model), &inc, &model, &g, &SolverParams::default()).unwrap();
        assert!((field_mean(&state.f) - inc.fbar).norm() < 1e-12);
        assert!(report.equilibrium < 1e-4);
        assert!(report.newton_iterations >= 2);
    }

    #[test]
    fn elastic_load_and_unload_is_reversible() {
        let shape = GridShape::unit(&[5, 5]).unwrap();
        let model = two_phase(&shape);
        let g = ProjectionOperator::new(&shape, NyquistMode::ZeroCompatible);
        let params = SolverParams { eta_newton: 1e-10, eta_cg: 1e-12, ..Default::default() };
        let incs = [
            Increment { fbar: shear(0.15), time: 0.5 },
            Increment { fbar: Tensor2::identity(2), time: 1.0 },
        ];
        let mut log = ReportLog::default();
        let out = run_program(SolverState::initial(&model), &incs, &model, &g, &params, &mut log).unwrap();
        let id = Tensor2Field::broadcast(&shape, &Tensor2::identity(2));
        assert!(out.f.sub(&id).data().iter().all(|v| v.abs() < 1e-8));
        assert_eq!(log.reports.len(), 2);
    }

    #[test]
    fn bad_increments_are_rejected() {
        let shape = GridShape::unit(&[3, 3]).unwrap();
        let model = two_phase(&shape);
        let g = ProjectionOperator::new(&shape, NyquistMode::ZeroCompatible);
        let st = SolverState::initial(&model);
        let p = SolverParams::default();
        let inv = Increment { fbar: Tensor2::diag(&[-1.0, 1.0]), time: 0.0 };
        assert!(matches!(solve_increment(&st, &inv, &model, &g, &p), Err(SolverError::InvalidIncrement(_))));
        let wrong = Increment { fbar: Tensor2::identity(3), time: 0.0 };
        assert!(matches!(solve_increment(&st, &wrong, &model, &g, &p), Err(SolverError::InvalidIncrement(_))));
    }

    #[test]
    fn newton_cap_reports_divergence() {
        let shape = GridShape::unit(&[5, 5]).unwrap();
        let model = two_phase(&shape);
        let g = ProjectionOperator::new(&shape, NyquistMode::ZeroCompatible);
        let params = SolverParams { max_newton: 1, ..Default::default() };
        let inc = Increment { fbar: shear(0.3), time: 1.0 };
        match solve_increment(&SolverState::initial(&model), &inc, &model, &g, &params) {
            Err(SolverError::NewtonDiverged { report }) => assert_eq!(report.newton_iterations, 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn params_validation() {
        assert!(SolverParams::default().validate().is_ok());
        let bad = SolverParams { eta_newton: 0.0, eta_cg: 2.0, max_newton: 0, max_cg: Some(0) };
        assert_eq!(bad.validate().unwrap_err().matches(';').count(), 3);
    }
}
