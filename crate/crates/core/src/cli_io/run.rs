//! Assembles a run from its configuration and streams results to disk.

use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use super::config::{ConfigError, MicrostructureSpec, ModelKind, OutputField, OutputSpec, RunConfig};
use super::report::ReportWriter;
use super::snapshot::{list_snapshots, read_snapshot, write_snapshot, FieldData};
use super::vtk::write_vtk;
use crate::constitutive::{Hyperelastic, MaterialModel, SimoPlastic};
use crate::microstructure::{
    bind_parameters, load_image_threshold, make_cubic_inclusion, make_laminate, MicrostructureError, PhaseGrid,
};
use crate::projection::ProjectionOperator;
use crate::solver::{run_program, Increment, ProgramError, ProgramSink, SolveReport, SolverError, SolverState};
use crate::tensor_field::{field_mean, GridShape, Tensor2};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot set up the cell: {0}")]
    Setup(String),
    #[error("increment {increment} failed: {source}")]
    Solver { increment: usize, source: SolverError },
    #[error("I/O failure: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Setup(_) => EXIT_CONFIG,
            RunError::Solver { .. } => EXIT_DIVERGED,
            RunError::Io(_) => EXIT_IO,
        }
    }
}

impl From<MicrostructureError> for RunError {
    fn from(e: MicrostructureError) -> Self {
        RunError::Setup(e.to_string())
    }
}

/// Phase layout described by the configuration.
pub fn build_phase_grid(config: &RunConfig) -> Result<PhaseGrid, RunError> {
    let shape_from = |points: &[usize]| -> Result<GridShape, RunError> {
        let lengths = config.lengths.clone().unwrap_or_else(|| vec![1.0; points.len()]);
        GridShape::new(points, &lengths).map_err(|e| RunError::Setup(e.to_string()))
    };
    let pg = match &config.microstructure {
        MicrostructureSpec::Image { path, threshold, invert } => {
            let pg = load_image_threshold(path, *threshold, *invert)?;
            if let Some(points) = &config.points {
                if points.as_slice() != pg.shape().points() {
                    return Err(RunError::Setup(format!(
                        "grid.points {:?} does not match the image size {:?}",
                        points,
                        pg.shape().points()
                    )));
                }
            }
            match &config.lengths {
                Some(_) => PhaseGrid::new(&shape_from(pg.shape().points())?, pg.labels().to_vec(), pg.phases()),
                None => pg,
            }
        }
        other => {
            let shape = shape_from(config.points.as_deref().expect("validated"))?;
            match other {
                MicrostructureSpec::Homogeneous => PhaseGrid::homogeneous(&shape),
                MicrostructureSpec::Cube { volume_fraction } => make_cubic_inclusion(&shape, *volume_fraction)?,
                MicrostructureSpec::Laminate { fractions } => make_laminate(&shape, fractions)?,
                MicrostructureSpec::Image { .. } => unreachable!(),
            }
        }
    };
    Ok(pg)
}

pub fn build_model(config: &RunConfig, pg: &PhaseGrid) -> Result<Box<dyn MaterialModel>, RunError> {
    let fields = bind_parameters(pg, &config.phases)?;
    Ok(match config.model {
        ModelKind::Hyperelastic => Box::new(Hyperelastic::new(fields)),
        ModelKind::Simo => Box::new(SimoPlastic::new(fields)),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub model: String,
    pub points: Vec<usize>,
    pub phase_fractions: Vec<f64>,
    pub increments: usize,
    pub newton_iterations: usize,
    pub cg_iterations: usize,
    pub mean_newton_per_increment: f64,
    pub wall_ms: f64,
    pub eps_bar: f64,
    pub mean_f: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub max_eps_p: f64,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub reports: Vec<SolveReport>,
    pub state: SolverState,
    pub summary: RunSummary,
}

struct FileSink<'a> {
    dir: PathBuf,
    output: &'a OutputSpec,
    count: usize,
    report: ReportWriter,
    reports: Vec<SolveReport>,
}

impl ProgramSink for FileSink<'_> {
    fn increment_done(&mut self, inc: &Increment, state: &SolverState, report: &SolveReport) -> io::Result<()> {
        self.report.append(report)?;
        self.reports.push(report.clone());
        let k = report.increment;
        if (k + 1).is_multiple_of(self.output.stride) || k + 1 == self.count {
            write_state(&self.dir, k, inc, state, self.output)?;
        }
        Ok(())
    }
}

fn write_state(dir: &Path, k: usize, inc: &Increment, state: &SolverState, output: &OutputSpec) -> io::Result<()> {
    let fields: Vec<(&str, FieldData<'_>)> = output
        .fields
        .iter()
        .map(|f| {
            let data = match f {
                OutputField::F => FieldData::Tensor(&state.f),
                OutputField::P => FieldData::Tensor(&state.stress),
                OutputField::EqStress => FieldData::Scalar(state.equivalent_stress.data()),
                OutputField::EpsP => FieldData::Scalar(state.history.eps_p.data()),
            };
            (f.name(), data)
        })
        .collect();
    let shape = state.f.shape();
    write_snapshot(dir, k, inc.time, shape, &inc.fbar, &fields)?;
    if output.vtk {
        write_vtk(&dir.join(format!("snapshot_{k:04}.vtk")), &format!("increment {k}"), shape, &fields)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FailureRecord<'a> {
    increment: usize,
    error: String,
    report: Option<&'a SolveReport>,
}

/// Runs a validated configuration, writing into [`RunConfig::run_dir`].
pub fn run(config: &RunConfig) -> Result<RunOutcome, RunError> {
    let pg = build_phase_grid(config)?;
    let model = build_model(config, &pg)?;
    let shape = pg.shape().clone();
    let g = ProjectionOperator::new(&shape, config.nyquist);

    let dir = config.run_dir();
    std::fs::create_dir_all(&dir)?;
    let mut sink = FileSink {
        dir: dir.clone(),
        output: &config.output,
        count: config.increments.len(),
        report: ReportWriter::create(&dir.join("report.csv"))?,
        reports: Vec::new(),
    };
    log::info!(
        "{}: {:?} grid, {} model, phase fractions {:?}, {} increments",
        config.name,
        shape.points(),
        model.name(),
        (0..pg.phases()).map(|p| pg.fraction(p)).collect::<Vec<_>>(),
        config.increments.len()
    );

    let initial = SolverState::initial(model.as_ref());
    let state = match run_program(initial, &config.increments, model.as_ref(), &g, &config.solver, &mut sink) {
        Ok(state) => state,
        Err(ProgramError::Sink(e)) => return Err(RunError::Io(e)),
        Err(ProgramError::Solver { increment, source, .. }) => {
            let report = match &source {
                SolverError::NewtonDiverged { report } => Some(report.as_ref()),
                _ => None,
            };
            let record = FailureRecord { increment, error: source.to_string(), report };
            let json = serde_json::to_vec_pretty(&record).map_err(io::Error::other)?;
            std::fs::write(dir.join("failure.json"), json)?;
            return Err(RunError::Solver { increment, source });
        }
    };

    let reports = sink.reports;
    let newton: usize = reports.iter().map(|r| r.newton_iterations).sum();
    let summary = RunSummary {
        name: config.name.clone(),
        model: model.name().into(),
        points: shape.points().to_vec(),
        phase_fractions: (0..pg.phases()).map(|p| pg.fraction(p)).collect(),
        increments: reports.len(),
        newton_iterations: newton,
        cg_iterations: reports.iter().map(SolveReport::cg_total).sum(),
        mean_newton_per_increment: if reports.is_empty() { 0.0 } else { newton as f64 / reports.len() as f64 },
        wall_ms: reports.iter().map(|r| r.wall_ms).sum(),
        eps_bar: reports.last().map_or(0.0, |r| r.eps_bar),
        mean_f: field_mean(&state.f).as_slice().to_vec(),
        mean_p: field_mean(&state.stress).as_slice().to_vec(),
        max_eps_p: state.history.eps_p.max(),
    };
    let json = serde_json::to_vec_pretty(&summary).map_err(io::Error::other)?;
    std::fs::write(dir.join("summary.json"), json)?;
    Ok(RunOutcome { run_dir: dir, reports, state, summary })
}

/// Result of checking one snapshot directory.
#[derive(Debug, Clone)]
pub struct SnapshotCheck {
    pub increment: usize,
    pub points: Vec<usize>,
    pub fields: Vec<String>,
    /// `max |⟨F⟩ − F̄|`, absent when `F` was not written.
    pub mean_error: Option<f64>,
}

/// Tolerance on `⟨F⟩ = F̄` for [`inspect`].
pub const MEAN_TOLERANCE: f64 = 1e-12;

pub fn inspect(dir: &Path) -> io::Result<Vec<SnapshotCheck>> {
    let mut out = Vec::new();
    for k in list_snapshots(dir)? {
        let snap = read_snapshot(dir, k)?;
        let mean_error = snap.tensor("F").map(|f| {
            let diff: Tensor2 = field_mean(&f) - snap.meta.fbar_tensor();
            diff.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()))
        });
        out.push(SnapshotCheck {
            increment: k,
            points: snap.meta.points.clone(),
            fields: snap.meta.fields.iter().map(|f| f.name.clone()).collect(),
            mean_error,
        });
    }
    Ok(out)
}
