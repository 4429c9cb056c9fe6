//! Spectral decomposition of small symmetric tensors.
//!
//! A single Jacobi rotation diagonalises a 2×2 tensor exactly, so the 2-D case
//! is closed form; 3×3 tensors use cyclic Jacobi sweeps, which keep the
//! eigenvectors orthonormal to round-off even for (nearly) repeated eigenvalues.

use super::local::Tensor2;

const MAX_SWEEPS: usize = 64;

/// `A = Σ_a values[a] · v_a ⊗ v_a` with `v_a` the columns of `vectors`.
#[derive(Debug, Clone, Copy)]
pub struct SymEigen {
    pub values: [f64; 3],
    pub vectors: Tensor2,
}

impl SymEigen {
    pub fn dim(&self) -> usize {
        self.vectors.dim()
    }

    /// Isotropic tensor function `Σ_a f(λ_a) v_a ⊗ v_a`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor2 {
        let mapped: Vec<f64> = self.values[..self.dim()].iter().map(|&v| f(v)).collect();
        self.compose(&mapped)
    }

    /// `Σ_a w[a] v_a ⊗ v_a` for principal values `w` in this basis.
    pub fn compose(&self, w: &[f64]) -> Tensor2 {
        let d = self.dim();
        let q = &self.vectors;
        Tensor2::from_fn(d, |i, j| (0..d).map(|a| w[a] * q[(i, a)] * q[(j, a)]).sum())
    }

    /// Rotates `A` into the eigenbasis: `Qᵀ A Q`.
    pub fn to_principal(&self, a: &Tensor2) -> Tensor2 {
        self.vectors.transpose().dot(a).dot(&self.vectors)
    }

    /// Rotates back: `Q A Qᵀ`.
    pub fn from_principal(&self, a: &Tensor2) -> Tensor2 {
        self.vectors.dot(a).dot(&self.vectors.transpose())
    }
}

/// Eigen-decomposition of a symmetric tensor (upper triangle is trusted).
pub fn symmetric_eigen(a: &Tensor2) -> SymEigen {
    let d = a.dim();
    let mut m = a.sym();
    let mut v = Tensor2::identity(d);
    let scale = m.norm();
    if scale == 0.0 {
        return SymEigen { values: [0.0; 3], vectors: v };
    }
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|p| (p + 1..d).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)] * m[(p, q)])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-3 * scale {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    let mut values = [0.0; 3];
    for i in 0..d {
        values[i] = m[(i, i)];
    }
    SymEigen { values, vectors: v }
}

fn rotate(m: &mut Tensor2, v: &mut Tensor2, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == 0.0 {
        return;
    }
    let d = m.dim();
    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for k in 0..d {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..d {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..d {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Divided difference `(ln x − ln y)/(x − y)`, continuous at `x = y`.
pub fn ln_divided_difference(x: f64, y: f64) -> f64 {
    let r = x / y - 1.0;
    if r.abs() < 1e-4 {
        (1.0 - r / 2.0 + r * r / 3.0 - r * r * r / 4.0) / y
    } else {
        (x.ln() - y.ln()) / (x - y)
    }
}

/// Directional derivative of `ln B` at SPD `B` (given by its eigen-decomposition)
/// in direction `dB` (symmetric).
pub fn ln_derivative(eig: &SymEigen, db: &Tensor2) -> Tensor2 {
    let d = eig.dim();
    let mut t = eig.to_principal(db);
    for a in 0..d {
        for b in 0..d {
            t[(a, b)] *= ln_divided_difference(eig.values[a], eig.values[b]);
        }
    }
    eig.from_principal(&t)
}
