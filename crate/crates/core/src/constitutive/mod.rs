//! Node-local constitutive models in the reference configuration.
//!
//! Every model returns the first Piola–Kirchhoff stress `P` and the tangent `K`
//! defined by `δPᵀ = K : δFᵀ`, i.e. `K_ijkl = ∂P_ji / ∂F_kl`.
//!
//! Two-dimensional grids are treated in plane strain: fields hold 2×2 tensors,
//! the kernels embed them with `F_33 = 1`, evaluate in 3-D and return the
//! in-plane blocks. Out-of-plane quantities needed by the models (the elastic
//! left Cauchy–Green tensor, equivalent stresses) are kept in full.

mod hyperelastic;
mod measures;
mod simo;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor_field::{GridShape, ScalarField, Tensor2, Tensor2Field, Tensor4, Tensor4Field};

pub use hyperelastic::{hyperelastic_evaluate, hyperelastic_point, Hyperelastic};
pub use measures::{equivalent_stress, macroscopic_equivalent_strain, von_mises};
pub use simo::{simo_evaluate, simo_point, SimoPlastic, SimoPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstitutiveError {
    #[error("inverted element at node {node} (det F ≤ 0)")]
    InvertedElement { node: usize },
    /// Unused with linear hardening, whose return map is closed form.
    #[error("return map did not converge at node {node}")]
    NonConvergedReturnMap { node: usize },
    #[error("invalid material parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticParams {
    pub youngs: f64,
    pub poisson: f64,
}

impl ElasticParams {
    pub fn new(youngs: f64, poisson: f64) -> Result<Self, ConstitutiveError> {
        if !(youngs > 0.0 && youngs.is_finite()) {
            return Err(ConstitutiveError::InvalidParameters(format!("youngs must be positive, got {youngs}")));
        }
        if !(poisson > -1.0 && poisson < 0.5) {
            return Err(ConstitutiveError::InvalidParameters(format!(
                "poisson must lie in (-1, 0.5), got {poisson}"
            )));
        }
        Ok(Self { youngs, poisson })
    }

    pub fn lame_lambda(&self) -> f64 {
        let (e, nu) = (self.youngs, self.poisson);
        e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    }

    pub fn lame_mu(&self) -> f64 {
        self.youngs / (2.0 * (1.0 + self.poisson))
    }

    pub fn bulk(&self) -> f64 {
        self.lame_lambda() + 2.0 / 3.0 * self.lame_mu()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlasticParams {
    pub elastic: ElasticParams,
    pub tau_y0: f64,
    pub hardening: f64,
}

impl PlasticParams {
    pub fn new(elastic: ElasticParams, tau_y0: f64, hardening: f64) -> Result<Self, ConstitutiveError> {
        if !(tau_y0 > 0.0) {
            return Err(ConstitutiveError::InvalidParameters(format!("tau_y0 must be positive, got {tau_y0}")));
        }
        if !(hardening >= 0.0 && hardening.is_finite()) {
            return Err(ConstitutiveError::InvalidParameters(format!(
                "hardening must be non-negative, got {hardening}"
            )));
        }
        Ok(Self { elastic, tau_y0, hardening })
    }

    /// Parameters of a phase that never yields.
    pub fn elastic_only(elastic: ElasticParams) -> Self {
        Self { elastic, tau_y0: f64::INFINITY, hardening: 0.0 }
    }
}

/// Per-node material parameters, so mixed-phase cells need no branching in the kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialFields {
    pub lambda: ScalarField,
    pub mu: ScalarField,
    pub tau_y0: ScalarField,
    pub hardening: ScalarField,
}

impl MaterialFields {
    pub fn uniform(shape: &GridShape, params: &PlasticParams) -> Self {
        Self {
            lambda: ScalarField::constant(shape, params.elastic.lame_lambda()),
            mu: ScalarField::constant(shape, params.elastic.lame_mu()),
            tau_y0: ScalarField::constant(shape, params.tau_y0),
            hardening: ScalarField::constant(shape, params.hardening),
        }
    }

    pub fn shape(&self) -> &GridShape {
        self.mu.shape()
    }
}

/// Internal variables of a cell.
///
/// `be` is always 3×3 (plane strain keeps the out-of-plane stretch); `f_ref`
/// is the deformation gradient at the last committed state, from which the
/// incremental deformation is measured.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryState {
    pub be: Vec<Tensor2>,
    pub eps_p: ScalarField,
    pub f_ref: Tensor2Field,
}

impl HistoryState {
    pub fn virgin(shape: &GridShape) -> Self {
        Self {
            be: vec![Tensor2::identity(3); shape.nodes()],
            eps_p: ScalarField::zeros(shape),
            f_ref: Tensor2Field::broadcast(shape, &Tensor2::identity(shape.dim())),
        }
    }

    pub fn shape(&self) -> &GridShape {
        self.eps_p.shape()
    }

    /// A converged trial state becomes the committed one.
    pub fn commit(trial: HistoryState) -> HistoryState {
        trial
    }
}

/// Output of a model evaluation over the whole grid.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub stress: Tensor2Field,
    pub tangent: Tensor4Field,
    pub trial: HistoryState,
    /// von Mises measure of the model's natural stress (`S` or `τ`).
    pub equivalent_stress: ScalarField,
}

pub trait MaterialModel: Send + Sync {
    fn name(&self) -> &'static str;

    fn shape(&self) -> &GridShape;

    fn initial_history(&self) -> HistoryState {
        HistoryState::virgin(self.shape())
    }

    /// Deterministic and node-local; `committed` is never modified.
    fn evaluate(&self, f: &Tensor2Field, committed: &HistoryState) -> Result<Evaluation, ConstitutiveError>;
}

pub(crate) fn plane_embed(f: &Tensor2) -> Tensor2 {
    f.embed3(1.0)
}

/// Assembles grid outputs from per-node 3-D results.
pub(crate) struct Assembly {
    dim: usize,
    stress: Tensor2Field,
    tangent: Tensor4Field,
    eq: ScalarField,
}

impl Assembly {
    pub(crate) fn new(shape: &GridShape) -> Self {
        Self {
            dim: shape.dim(),
            stress: Tensor2Field::zeros(shape),
            tangent: Tensor4Field::zeros(shape),
            eq: ScalarField::zeros(shape),
        }
    }

    pub(crate) fn put(&mut self, node: usize, p: &Tensor2, k: &Tensor4, eq: f64) {
        self.stress.set(node, &p.restrict(self.dim));
        self.tangent.set(node, &k.restrict(self.dim));
        self.eq.data_mut()[node] = eq;
    }

    pub(crate) fn finish(self, trial: HistoryState) -> Evaluation {
        Evaluation { stress: self.stress, tangent: self.tangent, trial, equivalent_stress: self.eq }
    }
}
