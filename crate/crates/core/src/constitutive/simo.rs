//! Finite-strain J2 plasticity with a multiplicative split, formulated on the
//! elastic left Cauchy–Green tensor `b_e` with a linear Hencky law
//! `τ = ½ C : ln b_e` and linear isotropic hardening.
//!
//! The stress update is an exponential-map radial return: the trial logarithmic
//! strain is returned along the deviatoric direction, which keeps all
//! quantities coaxial with the trial `b_e` so the update runs in its principal
//! basis.

use super::{plane_embed, Assembly, ConstitutiveError, Evaluation, HistoryState, MaterialFields, MaterialModel};
use crate::tensor_field::sym::{ln_derivative, symmetric_eigen};
use crate::tensor_field::{GridShape, ScalarField, Tensor2, Tensor2Field, Tensor4};

/// Relative band around the yield surface that is treated as plastic, so that
/// a state returned onto the surface stays on the plastic branch when
/// re-evaluated.
const YIELD_ROUNDOFF: f64 = 1e-10;

const SQRT_3_2: f64 = 1.224_744_871_391_589;

#[derive(Debug, Clone, Copy)]
pub struct SimoPoint {
    pub stress: Tensor2,
    pub tangent: Tensor4,
    pub tau: Tensor2,
    pub be: Tensor2,
    pub eps_p: f64,
    pub tau_eq: f64,
    pub plastic: bool,
}

/// Stress update and consistent tangent at one point (all tensors 3×3).
///
/// `f_old` is the deformation gradient of the committed state holding `be_old`
/// and `eps_p_old`.
#[allow(clippy::too_many_arguments)]
pub fn simo_point(
    f: &Tensor2,
    f_old: &Tensor2,
    be_old: &Tensor2,
    eps_p_old: f64,
    lambda: f64,
    mu: f64,
    tau_y0: f64,
    hardening: f64,
) -> Option<SimoPoint> {
    if f.det() <= 0.0 {
        return None;
    }
    let finv = f.inverse().ok()?;
    let rel = f.dot(&f_old.inverse().ok()?);
    let b_tr = rel.dot(be_old).dot(&rel.transpose()).sym();
    let eig = symmetric_eigen(&b_tr);
    if eig.values.iter().any(|&v| v <= 0.0) {
        return None;
    }

    let eps_tr = eig.values.map(|v| 0.5 * v.ln());
    let tr = eps_tr.iter().sum::<f64>();
    let tau_tr = eps_tr.map(|e| lambda * tr + 2.0 * mu * e);
    let mean = tau_tr.iter().sum::<f64>() / 3.0;
    let dev = tau_tr.map(|t| t - mean);
    let dev_norm = dev.iter().map(|d| d * d).sum::<f64>().sqrt();
    let tau_eq_tr = SQRT_3_2 * dev_norm;
    let tau_y = tau_y0 + hardening * eps_p_old;
    let phi = tau_eq_tr - tau_y;
    let plastic = phi > -YIELD_ROUNDOFF * tau_y && dev_norm > 0.0;

    let mut tau_p = tau_tr;
    let mut eps_e = eps_tr;
    let mut eps_p = eps_p_old;
    let mut dgamma = 0.0;
    let mut n = [0.0; 3];
    if plastic {
        dgamma = phi.max(0.0) / (3.0 * mu + hardening);
        n = dev.map(|d| d / dev_norm);
        for a in 0..3 {
            tau_p[a] -= 2.0 * mu * dgamma * SQRT_3_2 * n[a];
            eps_e[a] -= dgamma * SQRT_3_2 * n[a];
        }
        eps_p += dgamma;
    }
    let tau = eig.compose(&tau_p);
    let be = eig.compose(&eps_e.map(|e| (2.0 * e).exp()));

    // dτ/dε in log-strain space
    let d = if plastic {
        let kappa = lambda + 2.0 * mu / 3.0;
        let ii = Tensor2::identity(3).dyad(&Tensor2::identity(3));
        let idev = Tensor4::identity_sym(3) - ii * (1.0 / 3.0);
        let nn = eig.compose(&n);
        let theta = 1.0 - 3.0 * mu * dgamma / tau_eq_tr;
        let beta = 6.0 * mu * mu * (dgamma / tau_eq_tr - 1.0 / (3.0 * mu + hardening));
        ii * kappa + idev * (2.0 * mu * theta) + nn.dyad(&nn) * beta
    } else {
        Tensor4::isotropic(3, lambda, mu)
    };

    // ∂τ/∂L for a perturbation f → (I + δL)·f, one column (k,l) at a time
    let mut spatial = Tensor4::zeros(3);
    for k in 0..3 {
        for l in 0..3 {
            let db = Tensor2::from_fn(3, |i, j| {
                let mut v = 0.0;
                if i == k {
                    v += b_tr[(l, j)];
                }
                if j == k {
                    v += b_tr[(i, l)];
                }
                v
            });
            let deps = ln_derivative(&eig, &db) * 0.5;
            let dtau = d.ddot2(&deps);
            for i in 0..3 {
                for j in 0..3 {
                    spatial[(i, j, k, l)] = dtau[(i, j)];
                }
            }
        }
    }
    let kx = spatial - Tensor4::identity_rt(3).dot2(&tau);

    let finv_t = finv.transpose();
    Some(SimoPoint {
        stress: tau.dot(&finv_t),
        tangent: finv.dot4(&kx.dot2(&finv_t)),
        tau,
        be,
        eps_p,
        tau_eq: SQRT_3_2 * tau.deviator().norm(),
        plastic,
    })
}

/// Grid evaluation from the committed history.
pub fn simo_evaluate(
    f: &Tensor2Field,
    committed: &HistoryState,
    params: &MaterialFields,
) -> Result<Evaluation, ConstitutiveError> {
    let shape = f.shape();
    let mut out = Assembly::new(shape);
    let mut be = Vec::with_capacity(f.nodes());
    let mut eps_p = ScalarField::zeros(shape);
    for node in 0..f.nodes() {
        let pt = simo_point(
            &plane_embed(&f.get(node)),
            &plane_embed(&committed.f_ref.get(node)),
            &committed.be[node],
            committed.eps_p.get(node),
            params.lambda.get(node),
            params.mu.get(node),
            params.tau_y0.get(node),
            params.hardening.get(node),
        )
        .ok_or(ConstitutiveError::InvertedElement { node })?;
        out.put(node, &pt.stress, &pt.tangent, pt.tau_eq);
        be.push(pt.be);
        eps_p.data_mut()[node] = pt.eps_p;
    }
    Ok(out.finish(HistoryState { be, eps_p, f_ref: f.clone() }))
}

#[derive(Debug, Clone)]
pub struct SimoPlastic {
    params: MaterialFields,
}

impl SimoPlastic {
    pub fn new(params: MaterialFields) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &MaterialFields {
        &self.params
    }
}

impl MaterialModel for SimoPlastic {
    fn name(&self) -> &'static str {
        "simo"
    }

    fn shape(&self) -> &GridShape {
        self.params.shape()
    }

    fn evaluate(&self, f: &Tensor2Field, committed: &HistoryState) -> Result<Evaluation, ConstitutiveError> {
        simo_evaluate(f, committed, &self.params)
    }
}
