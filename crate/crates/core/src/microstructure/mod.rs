//! Phase layouts on the grid and binding of per-phase parameters to nodes.

mod image;

use thiserror::Error;

pub use self::image::{load_image_threshold, gray_image, phase_grid_to_gray, write_pgm};

use crate::constitutive::{MaterialFields, PlasticParams};
use crate::tensor_field::{GridShape, ScalarField, TensorError};

#[derive(Debug, Error)]
pub enum MicrostructureError {
    #[error("volume fraction {requested} is not achievable: {reason}")]
    FractionUnachievable { requested: f64, reason: String },
    #[error("bad layer fractions: {0}")]
    BadFractions(String),
    #[error("unreadable image {path}: {reason}")]
    UnreadableImage { path: String, reason: String },
    #[error("expected parameters for {expected} phases, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Shape(#[from] TensorError),
}

/// Phase label per node.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    shape: GridShape,
    labels: Vec<usize>,
    phases: usize,
}

impl PhaseGrid {
    pub fn new(shape: &GridShape, labels: Vec<usize>, phases: usize) -> Self {
        assert_eq!(labels.len(), shape.nodes());
        assert!(labels.iter().all(|&l| l < phases), "label out of range");
        Self { shape: shape.clone(), labels, phases }
    }

    pub fn homogeneous(shape: &GridShape) -> Self {
        Self::new(shape, vec![0; shape.nodes()], 1)
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn phases(&self) -> usize {
        self.phases
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.phases];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    pub fn fraction(&self, phase: usize) -> f64 {
        self.counts().get(phase).copied().unwrap_or(0) as f64 / self.labels.len() as f64
    }
}

/// Centred axis-aligned box of phase 1 in a phase-0 matrix. The side along
/// each axis is the whole number of nodes nearest to `fraction^(1/d) · N`.
pub fn make_cubic_inclusion(shape: &GridShape, volume_fraction: f64) -> Result<PhaseGrid, MicrostructureError> {
    let unachievable = |reason: String| MicrostructureError::FractionUnachievable { requested: volume_fraction, reason };
    if !(volume_fraction > 0.0 && volume_fraction < 1.0) {
        return Err(unachievable("must lie in (0, 1)".into()));
    }
    let d = shape.dim();
    let scale = volume_fraction.powf(1.0 / d as f64);
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..d {
        let n = shape.points()[a];
        let side = (scale * n as f64).round() as usize;
        if side == 0 || side >= n {
            return Err(unachievable(format!("side of {side} nodes along axis {a} of {n}")));
        }
        lo[a] = (n - side) / 2;
        hi[a] = lo[a] + side;
    }
    let labels = (0..shape.nodes())
        .map(|node| {
            let idx = shape.multi_index(node);
            usize::from((0..d).all(|a| idx[a] >= lo[a] && idx[a] < hi[a]))
        })
        .collect();
    Ok(PhaseGrid::new(shape, labels, 2))
}

/// Layers stacked along axis 0; layer `i` is phase `i`. Node counts follow the
/// fractions by largest remainder.
pub fn make_laminate(shape: &GridShape, layer_fractions: &[f64]) -> Result<PhaseGrid, MicrostructureError> {
    if layer_fractions.is_empty() {
        return Err(MicrostructureError::BadFractions("no layers given".into()));
    }
    if layer_fractions.iter().any(|&f| !(f > 0.0)) {
        return Err(MicrostructureError::BadFractions("every fraction must be positive".into()));
    }
    let sum: f64 = layer_fractions.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(MicrostructureError::BadFractions(format!("fractions sum to {sum}, not 1")));
    }
    let n = shape.points()[0];
    let ideal: Vec<f64> = layer_fractions.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..ideal.len()).collect();
    order.sort_by(|&a, &b| (ideal[b] - ideal[b].floor()).total_cmp(&(ideal[a] - ideal[a].floor())).then(a.cmp(&b)));
    let missing = n - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(MicrostructureError::FractionUnachievable {
            requested: layer_fractions[i],
            reason: format!("layer {i} gets no node out of {n}"),
        });
    }
    let mut layer_of = Vec::with_capacity(n);
    for (i, &c) in counts.iter().enumerate() {
        layer_of.extend(std::iter::repeat_n(i, c));
    }
    let labels = (0..shape.nodes()).map(|node| layer_of[shape.multi_index(node)[0]]).collect();
    Ok(PhaseGrid::new(shape, labels, layer_fractions.len()))
}

/// Per-node parameter fields from one parameter set per phase.
pub fn bind_parameters(pg: &PhaseGrid, per_phase: &[PlasticParams]) -> Result<MaterialFields, MicrostructureError> {
    if per_phase.len() != pg.phases() {
        return Err(MicrostructureError::ArityMismatch { expected: pg.phases(), got: per_phase.len() });
    }
    let field = |f: &dyn Fn(&PlasticParams) -> f64| {
        ScalarField::from_vec(pg.shape(), pg.labels().iter().map(|&l| f(&per_phase[l])).collect())
    };
    Ok(MaterialFields {
        lambda: field(&|p| p.elastic.lame_lambda()),
        mu: field(&|p| p.elastic.lame_mu()),
        tau_y0: field(&|p| p.tau_y0),
        hardening: field(&|p| p.hardening),
    })
}
