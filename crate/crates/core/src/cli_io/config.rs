//! Run configuration: TOML schema, defaults, validation and load expansion.
//!
//! Parsing collects every violation with the dotted path of the offending key
//! instead of stopping at the first one.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::constitutive::{ElasticParams, PlasticParams};
use crate::projection::NyquistMode;
use crate::solver::{Increment, SolverParams};
use crate::tensor_field::Tensor2;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Syntax(String),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

impl ConfigError {
    pub fn violations(&self) -> Vec<String> {
        match self {
            ConfigError::Syntax(s) => vec![s.clone()],
            ConfigError::Invalid(v) => v.clone(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    grid: Option<RawGrid>,
    microstructure: Option<RawMicrostructure>,
    model: Option<RawModel>,
    loading: Option<RawLoading>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    points: Option<Vec<usize>>,
    lengths: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMicrostructure {
    kind: Option<String>,
    volume_fraction: Option<f64>,
    fractions: Option<Vec<f64>>,
    path: Option<PathBuf>,
    threshold: Option<f64>,
    invert: Option<bool>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhase {
    youngs: Option<f64>,
    poisson: Option<f64>,
    tau_y0: Option<f64>,
    hardening: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: Option<String>,
    youngs: Option<f64>,
    poisson: Option<f64>,
    tau_y0: Option<f64>,
    hardening: Option<f64>,
    contrast: Option<f64>,
    phases: Option<Vec<RawPhase>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoading {
    mode: Option<String>,
    gamma: Option<f64>,
    stretch: Option<f64>,
    fbar: Option<Vec<Vec<f64>>>,
    increments: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    eta_newton: Option<f64>,
    eta_cg: Option<f64>,
    max_newton: Option<usize>,
    max_cg: Option<usize>,
    nyquist: Option<NyquistMode>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    stride: Option<usize>,
    fields: Option<Vec<String>>,
    vtk: Option<bool>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub eta_newton: Option<f64>,
    pub eta_cg: Option<f64>,
    pub max_newton: Option<usize>,
    pub increments: Option<usize>,
    pub nyquist: Option<NyquistMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MicrostructureSpec {
    Homogeneous,
    Cube { volume_fraction: f64 },
    Laminate { fractions: Vec<f64> },
    Image { path: PathBuf, threshold: f64, invert: bool },
}

impl MicrostructureSpec {
    pub fn phase_count(&self) -> usize {
        match self {
            MicrostructureSpec::Homogeneous => 1,
            MicrostructureSpec::Laminate { fractions } => fractions.len(),
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Hyperelastic,
    Simo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputField {
    F,
    P,
    EqStress,
    EpsP,
}

impl OutputField {
    pub const ALL: [OutputField; 4] = [OutputField::F, OutputField::P, OutputField::EqStress, OutputField::EpsP];

    pub fn name(self) -> &'static str {
        match self {
            OutputField::F => "F",
            OutputField::P => "P",
            OutputField::EqStress => "eq_stress",
            OutputField::EpsP => "eps_p",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn is_tensor(self) -> bool {
        matches!(self, OutputField::F | OutputField::P)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub directory: PathBuf,
    pub stride: usize,
    pub fields: Vec<OutputField>,
    pub vtk: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    /// Absent for images, whose size sets the grid.
    pub points: Option<Vec<usize>>,
    pub lengths: Option<Vec<f64>>,
    pub dim: usize,
    pub microstructure: MicrostructureSpec,
    pub model: ModelKind,
    /// One entry per phase; phase 0 is the matrix / soft phase.
    pub phases: Vec<PlasticParams>,
    pub increments: Vec<Increment>,
    pub solver: SolverParams,
    pub nyquist: NyquistMode,
    pub output: OutputSpec,
}

impl RunConfig {
    /// Directory receiving this run's files.
    pub fn run_dir(&self) -> PathBuf {
        self.output.directory.join(&self.name)
    }
}

pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, base_dir, &Overrides::default())
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Syntax(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_with(&text, &base, overrides)
}

pub fn parse_config_with(text: &str, base_dir: &Path, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut v = Violations::default();

    let name = match raw.name {
        Some(n) if valid_name(&n) => n,
        Some(n) => {
            v.push("name", format!("{n:?} must be a non-empty plain file name"));
            String::new()
        }
        None => {
            v.push("name", "missing");
            String::new()
        }
    };

    let micro = raw.microstructure.unwrap_or_default();
    let microstructure = microstructure_spec(&micro, base_dir, &mut v);

    let grid = raw.grid.unwrap_or_default();
    let is_image = matches!(microstructure, Some(MicrostructureSpec::Image { .. }));
    if grid.points.is_none() && !is_image {
        v.push("grid.points", "missing");
    }
    let mut dim = if is_image { 2 } else { grid.points.as_ref().map_or(0, Vec::len) };
    if let Some(points) = &grid.points {
        if !(points.len() == 2 || points.len() == 3) {
            v.push("grid.points", format!("needs 2 or 3 entries, got {}", points.len()));
            dim = 0;
        } else if is_image && points.len() != 2 {
            v.push("grid.points", "an image grid is two-dimensional");
        }
        if points.contains(&0) {
            v.push("grid.points", "every axis needs at least one node");
        }
    }
    if let Some(lengths) = &grid.lengths {
        if dim != 0 && lengths.len() != dim {
            v.push("grid.lengths", format!("needs {dim} entries, got {}", lengths.len()));
        }
        if lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            v.push("grid.lengths", "lengths must be positive");
        }
    }

    let phase_count = microstructure.as_ref().map(MicrostructureSpec::phase_count);
    let (model, phases) = model_spec(raw.model.unwrap_or_default(), phase_count, &mut v);

    let mut loading = raw.loading.unwrap_or_default();
    if overrides.increments.is_some() {
        loading.increments = overrides.increments;
    }
    let increments = if dim == 0 { Vec::new() } else { loading_spec(&loading, dim, &mut v) };

    let defaults = SolverParams::default();
    let solver = SolverParams {
        eta_newton: overrides.eta_newton.or(raw.solver.eta_newton).unwrap_or(defaults.eta_newton),
        eta_cg: overrides.eta_cg.or(raw.solver.eta_cg).unwrap_or(defaults.eta_cg),
        max_newton: overrides.max_newton.or(raw.solver.max_newton).unwrap_or(defaults.max_newton),
        max_cg: raw.solver.max_cg,
    };
    if !(solver.eta_newton > 0.0 && solver.eta_newton < 1.0) {
        v.push("solver.eta_newton", format!("must lie in (0, 1), got {}", solver.eta_newton));
    }
    if !(solver.eta_cg > 0.0 && solver.eta_cg < 1.0) {
        v.push("solver.eta_cg", format!("must lie in (0, 1), got {}", solver.eta_cg));
    }
    if solver.max_newton < 1 {
        v.push("solver.max_newton", "must be at least 1");
    }
    if solver.max_cg == Some(0) {
        v.push("solver.max_cg", "must be at least 1");
    }
    let nyquist = overrides.nyquist.or(raw.solver.nyquist).unwrap_or_default();

    let out = raw.output;
    let stride = out.stride.unwrap_or(1);
    if stride == 0 {
        v.push("output.stride", "must be at least 1");
    }
    let fields = match out.fields {
        None => OutputField::ALL.to_vec(),
        Some(names) => {
            let mut fields = Vec::new();
            for n in &names {
                match OutputField::parse(n) {
                    Some(f) if !fields.contains(&f) => fields.push(f),
                    Some(_) => v.push("output.fields", format!("{n:?} listed twice")),
                    None => v.push("output.fields", format!("unknown field {n:?} (expected F, P, eq_stress, eps_p)")),
                }
            }
            fields
        }
    };
    let output = OutputSpec {
        directory: overrides.output.clone().or(out.directory).unwrap_or_else(|| PathBuf::from("output")),
        stride,
        fields,
        vtk: out.vtk.unwrap_or(false),
    };

    v.finish()?;
    Ok(RunConfig {
        name,
        points: grid.points,
        lengths: grid.lengths,
        dim,
        microstructure: microstructure.expect("validated"),
        model: model.expect("validated"),
        phases,
        increments,
        solver,
        nyquist,
        output,
    })
}

#[derive(Default)]
struct Violations(Vec<String>);

impl Violations {
    fn push(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.0.push(format!("{path}: {msg}"));
    }

    fn finish(self) -> Result<(), ConfigError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(self.0))
        }
    }
}

fn valid_name(n: &str) -> bool {
    !n.is_empty() && n != "." && n != ".." && !n.contains(['/', '\\'])
}

fn microstructure_spec(m: &RawMicrostructure, base_dir: &Path, v: &mut Violations) -> Option<MicrostructureSpec> {
    let unused = |v: &mut Violations, key: &str, present: bool, kind: &str| {
        if present {
            v.push(&format!("microstructure.{key}"), format!("not used by kind {kind:?}"));
        }
    };
    let kind = m.kind.as_deref();
    match kind {
        Some("homogeneous") => {
            unused(v, "volume_fraction", m.volume_fraction.is_some(), "homogeneous");
            unused(v, "fractions", m.fractions.is_some(), "homogeneous");
            unused(v, "path", m.path.is_some(), "homogeneous");
            Some(MicrostructureSpec::Homogeneous)
        }
        Some("cube") => match m.volume_fraction {
            Some(f) if f > 0.0 && f < 1.0 => Some(MicrostructureSpec::Cube { volume_fraction: f }),
            Some(f) => {
                v.push("microstructure.volume_fraction", format!("must lie in (0, 1), got {f}"));
                None
            }
            None => {
                v.push("microstructure.volume_fraction", "missing");
                None
            }
        },
        Some("laminate") => match &m.fractions {
            Some(fr) if !fr.is_empty() => {
                let sum: f64 = fr.iter().sum();
                if fr.iter().any(|&f| !(f > 0.0)) {
                    v.push("microstructure.fractions", "every fraction must be positive");
                    None
                } else if (sum - 1.0).abs() > 1e-9 {
                    v.push("microstructure.fractions", format!("must sum to 1, got {sum}"));
                    None
                } else {
                    Some(MicrostructureSpec::Laminate { fractions: fr.clone() })
                }
            }
            _ => {
                v.push("microstructure.fractions", "missing");
                None
            }
        },
        Some("image") => {
            let path = m.path.as_ref().map(|p| base_dir.join(p));
            if path.is_none() {
                v.push("microstructure.path", "missing");
            }
            let threshold = m.threshold;
            match threshold {
                None => v.push("microstructure.threshold", "missing"),
                Some(t) if !(t >= 0.0 && t.is_finite()) => {
                    v.push("microstructure.threshold", format!("must be a non-negative gray level, got {t}"))
                }
                _ => {}
            }
            Some(MicrostructureSpec::Image {
                path: path?,
                threshold: threshold?,
                invert: m.invert.unwrap_or(false),
            })
        }
        Some(other) => {
            v.push(
                "microstructure.kind",
                format!("unknown kind {other:?} (expected homogeneous, cube, laminate, image)"),
            );
            None
        }
        None => {
            v.push("microstructure.kind", "missing");
            None
        }
    }
}

fn model_spec(m: RawModel, phase_count: Option<usize>, v: &mut Violations) -> (Option<ModelKind>, Vec<PlasticParams>) {
    let defaults = RawPhase { youngs: m.youngs, poisson: m.poisson, tau_y0: m.tau_y0, hardening: m.hardening };
    let kind = match m.kind.as_deref() {
        Some("hyperelastic") => Some(ModelKind::Hyperelastic),
        Some("simo") => Some(ModelKind::Simo),
        Some(other) => {
            v.push("model.kind", format!("unknown kind {other:?} (expected hyperelastic, simo)"));
            None
        }
        None => {
            v.push("model.kind", "missing");
            None
        }
    };

    // phase-by-phase raw values with top-level defaults filled in
    let raw_phases: Vec<(String, RawPhase)> = match (&m.phases, m.contrast) {
        (Some(_), Some(_)) => {
            v.push("model.contrast", "cannot be combined with model.phases");
            return (kind, Vec::new());
        }
        (Some(list), None) => {
            if let Some(n) = phase_count {
                if list.len() != n {
                    v.push("model.phases", format!("microstructure has {n} phases, {} given", list.len()));
                }
            }
            list.iter()
                .enumerate()
                .map(|(i, p)| (format!("model.phases[{i}]"), merge(p, &defaults)))
                .collect()
        }
        (None, Some(chi)) => {
            if !(chi > 0.0 && chi.is_finite()) {
                v.push("model.contrast", format!("must be positive, got {chi}"));
            }
            if phase_count.is_some_and(|n| n != 2) {
                v.push("model.contrast", "needs a two-phase microstructure");
            }
            let soft = defaults.clone();
            let mut hard = defaults.clone();
            match kind {
                Some(ModelKind::Simo) => {
                    hard.tau_y0 = hard.tau_y0.map(|t| t * chi);
                    hard.hardening = hard.hardening.map(|h| h * chi);
                }
                _ => hard.youngs = hard.youngs.map(|e| e * chi),
            }
            vec![("model".to_string(), soft), ("model".to_string(), hard)]
        }
        (None, None) => (0..phase_count.unwrap_or(1)).map(|_| ("model".to_string(), defaults.clone())).collect(),
    };

    let mut phases = Vec::new();
    for (path, p) in raw_phases {
        let youngs = p.youngs.unwrap_or_else(|| {
            v.push(&format!("{path}.youngs"), "missing");
            1.0
        });
        let poisson = p.poisson.unwrap_or_else(|| {
            v.push(&format!("{path}.poisson"), "missing");
            0.0
        });
        let elastic = match ElasticParams::new(youngs, poisson) {
            Ok(e) => e,
            Err(_) => {
                if !(youngs > 0.0 && youngs.is_finite()) {
                    v.push(&format!("{path}.youngs"), format!("must be positive, got {youngs}"));
                }
                if !(poisson > -1.0 && poisson < 0.5) {
                    v.push(&format!("{path}.poisson"), format!("must lie in (-1, 0.5), got {poisson}"));
                }
                continue;
            }
        };
        match kind {
            Some(ModelKind::Simo) => {
                let tau_y0 = p.tau_y0.unwrap_or_else(|| {
                    v.push(&format!("{path}.tau_y0"), "missing");
                    1.0
                });
                let hardening = p.hardening.unwrap_or(0.0);
                match PlasticParams::new(elastic, tau_y0, hardening) {
                    Ok(pp) => phases.push(pp),
                    Err(_) => {
                        if !(tau_y0 > 0.0) {
                            v.push(&format!("{path}.tau_y0"), format!("must be positive, got {tau_y0}"));
                        }
                        if !(hardening >= 0.0) {
                            v.push(&format!("{path}.hardening"), format!("must be non-negative, got {hardening}"));
                        }
                    }
                }
            }
            _ => phases.push(PlasticParams::elastic_only(elastic)),
        }
    }
    (kind, phases)
}

fn merge(p: &RawPhase, d: &RawPhase) -> RawPhase {
    RawPhase {
        youngs: p.youngs.or(d.youngs),
        poisson: p.poisson.or(d.poisson),
        tau_y0: p.tau_y0.or(d.tau_y0),
        hardening: p.hardening.or(d.hardening),
    }
}

fn loading_spec(l: &RawLoading, dim: usize, v: &mut Violations) -> Vec<Increment> {
    let count = l.increments.unwrap_or(1);
    if count == 0 {
        v.push("loading.increments", "must be at least 1");
        return Vec::new();
    }
    let ramp = |v: &mut Violations, key: &str, value: Option<f64>, f: &dyn Fn(f64) -> Tensor2| -> Vec<Increment> {
        match value {
            None => {
                v.push(&format!("loading.{key}"), "missing");
                Vec::new()
            }
            Some(x) if !x.is_finite() => {
                v.push(&format!("loading.{key}"), "must be finite");
                Vec::new()
            }
            Some(x) => (1..=count)
                .map(|k| {
                    let t = k as f64 / count as f64;
                    Increment { fbar: f(x * t), time: t }
                })
                .collect(),
        }
    };
    match l.mode.as_deref() {
        Some("simple_shear") => ramp(v, "gamma", l.gamma, &|g| {
            let mut f = Tensor2::identity(dim);
            f[(0, 1)] = g;
            f
        }),
        Some("pure_shear") => {
            if let Some(s) = l.stretch {
                if !(s > 0.0) {
                    v.push("loading.stretch", format!("must be positive, got {s}"));
                    return Vec::new();
                }
            }
            // stretch ramps linearly from 1
            
            ramp(v, "stretch", l.stretch.map(|s| s - 1.0), &|ds| {
                let mut f = Tensor2::identity(dim);
                f[(0, 0)] = 1.0 + ds;
                f[(1, 1)] = 1.0 / (1.0 + ds);
                f
            })
        }
        Some("explicit") => {
            if l.increments.is_some() {
                v.push("loading.increments", "not used with explicit loading (one increment per fbar entry)");
            }
            let list = match &l.fbar {
                Some(list) if !list.is_empty() => list,
                _ => {
                    v.push("loading.fbar", "missing");
                    return Vec::new();
                }
            };
            let mut incs = Vec::new();
            for (k, vals) in list.iter().enumerate() {
                let path = format!("loading.fbar[{k}]");
                if vals.len() != dim * dim {
                    v.push(&path, format!("needs {} row-major entries, got {}", dim * dim, vals.len()));
                    continue;
                }
                let f = Tensor2::from_row_major(dim, vals);
                if !(f.det() > 0.0) {
                    v.push(&path, format!("det F̄ = {} is not positive", f.det()));
                    continue;
                }
                incs.push(Increment { fbar: f, time: (k + 1) as f64 / list.len() as f64 });
            }
            incs
        }
        Some(other) => {
            v.push("loading.mode", format!("unknown mode {other:?} (expected simple_shear, pure_shear, explicit)"));
            Vec::new()
        }
        None => {
            v.push("loading.mode", "missing");
            Vec::new()
        }
    }
}
