//! Saint Venant–Kirchhoff: linear `S(E)` with the Green–Lagrange strain.

use super::{plane_embed, Assembly, ConstitutiveError, Evaluation, HistoryState, MaterialFields, MaterialModel};
use crate::constitutive::von_mises;
use crate::tensor_field::{GridShape, ScalarField, Tensor2, Tensor2Field, Tensor4, Tensor4Field};

/// `(P, K, S)` at one point; `F` is 3×3.
pub fn hyperelastic_point(f: &Tensor2, lambda: f64, mu: f64) -> (Tensor2, Tensor4, Tensor2) {
    let c = Tensor4::isotropic(3, lambda, mu);
    let ii = Tensor4::identity(3);
    let irt = Tensor4::identity_rt(3);
    let e = (f.transpose().dot(f) - Tensor2::identity(3)) * 0.5;
    let s = c.ddot2(&e);
    let p = f.dot(&s);
    let fcft = f.dot4(&c).dot2(&f.transpose());
    let k = s.dot4(&ii) + irt.ddot4(&fcft).ddot4(&irt);
    (p, k, s)
}

/// Grid evaluation; returns `(P, K)` and the von Mises measure of `S`.
pub fn hyperelastic_evaluate(
    f: &Tensor2Field,
    params: &MaterialFields,
) -> Result<(Tensor2Field, Tensor4Field, ScalarField), ConstitutiveError> {
    let mut out = Assembly::new(f.shape());
    for node in 0..f.nodes() {
        let f3 = plane_embed(&f.get(node));
        if f3.det() <= 0.0 {
            return Err(ConstitutiveError::InvertedElement { node });
        }
        let (p, k, s) = hyperelastic_point(&f3, params.lambda.get(node), params.mu.get(node));
        out.put(node, &p, &k, von_mises(&s));
    }
    let ev = out.finish(HistoryState::virgin(f.shape()));
    Ok((ev.stress, ev.tangent, ev.equivalent_stress))
}

#[derive(Debug, Clone)]
pub struct Hyperelastic {
    params: MaterialFields,
}

impl Hyperelastic {
    pub fn new(params: MaterialFields) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &MaterialFields {
        &self.params
    }
}

impl MaterialModel for Hyperelastic {
    fn name(&self) -> &'static str {
        "hyperelastic"
    }

    fn shape(&self) -> &GridShape {
        self.params.shape()
    }

    fn evaluate(&self, f: &Tensor2Field, committed: &HistoryState) -> Result<Evaluation, ConstitutiveError> {
        let (stress, tangent, equivalent_stress) = hyperelastic_evaluate(f, &self.params)?;
        let trial = HistoryState { f_ref: f.clone(), ..committed.clone() };
        Ok(Evaluation { stress, tangent, trial, equivalent_stress })
    }
}
