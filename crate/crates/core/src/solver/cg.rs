//! Matrix-free conjugate gradients on tensor fields.

use super::SolverError;
use crate::projection::ProjectionError;
use crate::tensor_field::Tensor2Field;

pub type Operator<'a> = dyn FnMut(&Tensor2Field) -> Result<Tensor2Field, ProjectionError> + 'a;

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub solution: Tensor2Field,
    pub iterations: usize,
    /// Final `‖b − A x‖ / ‖b‖` (recursively updated residual).
    pub relative_residual: f64,
}

/// Inner solver for the linearised equilibrium system.
pub trait LinearSolver: Send + Sync {
    fn solve(
        &self,
        op: &mut Operator<'_>,
        rhs: &Tensor2Field,
        tol: f64,
        max_iter: usize,
    ) -> Result<LinearSolution, SolverError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ConjugateGradient;

impl LinearSolver for ConjugateGradient {
    fn solve(
        &self,
        op: &mut Operator<'_>,
        rhs: &Tensor2Field,
        tol: f64,
        max_iter: usize,
    ) -> Result<LinearSolution, SolverError> {
        cg_solve(op, rhs, tol, max_iter, None)
    }
}

/// CG from a zero initial guess, stopping at `‖r‖ ≤ tol · ‖b‖`.
///
/// A non-positive curvature `pᵀAp` does not abort the iteration: the projected
/// tangent of a stressed, yielding cell is not guaranteed to be definite, and
/// plain CG usually still converges on it. Only `pᵀAp = 0` (or a non-finite
/// value) is a breakdown.
///
/// Starting from zero keeps every iterate in the span of the right-hand side's
/// Krylov space, hence compatible when the operator ends in a projection.
/// `monitor` sees each iterate.
pub fn cg_solve(
    op: &mut Operator<'_>,
    rhs: &Tensor2Field,
    tol: f64,
    max_iter: usize,
    mut monitor: Option<&mut dyn FnMut(&Tensor2Field)>,
) -> Result<LinearSolution, SolverError> {
    let mut x = Tensor2Field::zeros(rhs.shape());
    let b_norm = rhs.inner(rhs).sqrt();
    if b_norm == 0.0 {
        return Ok(LinearSolution { solution: x, iterations: 0, relative_residual: 0.0 });
    }
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = r.inner(&r);
    for it in 1..=max_iter {
        let ap = op(&p)?;
        let pap = p.inner(&ap);
        if pap == 0.0 || !pap.is_finite() {
            return Err(SolverError::CgStalled { iterations: it, relative_residual: rr.sqrt() / b_norm });
        }
        let alpha = rr / pap;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        if let Some(m) = monitor.as_mut() {
            m(&x);
        }
        let rr_new = r.inner(&r);
        if rr_new.sqrt() <= tol * b_norm {
            return Ok(LinearSolution { solution: x, iterations: it, relative_residual: rr_new.sqrt() / b_norm });
        }
        p.scale(rr_new / rr);
        p.axpy(1.0, &r);
        rr = rr_new;
    }
    Err(SolverError::CgStalled { iterations: max_iter, relative_residual: rr.sqrt() / b_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{NyquistMode, ProjectionOperator};
    use crate::tensor_field::{field_norm, GridShape, Tensor4, Tensor4Field};

    fn rough(shape: &GridShape) -> Tensor2Field {
        let d = shape.dim();
        Tensor2Field::from_vec(
            shape,
            (0..d * d * shape.nodes()).map(|k| ((k * 7919 % 101) as f64 / 50.0) - 1.0).collect(),
        )
    }

    #[test]
    fn zero_rhs_gives_zero_without_iterating() {
        let shape = GridShape::unit(&[3, 3]).unwrap();
        let mut op = |x: &Tensor2Field| Ok(x.clone());
        let sol = cg_solve(&mut op, &Tensor2Field::zeros(&shape), 1e-8, 10, None).unwrap();
        assert_eq!(sol.iterations, 0);
        assert_eq!(field_norm(&sol.solution), 0.0);
    }

    #[test]
    fn diagonal_system_and_a_norm_error_decreases() {
        // SPD diagonal scaling per node: A x = w(node) x
        let shape = GridShape::unit(&[5, 4]).unwrap();
        let w: Vec<f64> = (0..shape.nodes()).map(|k| 1.0 + (k % 7) as f64).collect();
        let apply = |x: &Tensor2Field| {
            let mut y = x.clone();
            let n = shape.nodes();
            for (idx, v) in y.data_mut().iter_mut().enumerate() {
                *v *= w[idx % n];
            }
            y
        };
        let b = rough(&shape);
        let exact = {
            let mut e = b.clone();
            let n = shape.nodes();
            for (idx, v) in e.data_mut().iter_mut().enumerate() {
                *v /= w[idx % n];
            }
            e
        };
        let mut errs = Vec::new();
        let mut monitor = |x: &Tensor2Field| {
            let e = x.sub(&exact);
            errs.push(e.inner(&apply(&e)).sqrt());
        };
        let mut op = |x: &Tensor2Field| Ok(apply(x));
        let sol = cg_solve(&mut op, &b, 1e-12, 100, Some(&mut monitor)).unwrap();
        assert!(sol.iterations <= 7);
        assert!(field_norm(&sol.solution.sub(&exact)) < 1e-10);
        assert!(errs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn stalls_when_capped() {
        let shape = GridShape::unit(&[5, 5, 5]).unwrap();
        let g = ProjectionOperator::new(&shape, NyquistMode::ZeroCompatible);
        let k = Tensor4Field::from_fn(&shape, |n| Tensor4::isotropic(3, 1.0, 0.5 + (n % 3) as f64));
        let b = g.apply(&rough(&shape)).unwrap();
        let mut op = |x: &Tensor2Field| g.apply_projected_tangent(&k, x);
        match cg_solve(&mut op, &b, 1e-14, 1, None) {
            Err(SolverError::CgStalled { iterations: 1, .. }) => {}
            other => panic!("expected stall, got {other:?}"),
        }
    }
}
