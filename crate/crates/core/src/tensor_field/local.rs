//! Node-local second- and fourth-order tensors of dimension 2 or 3.
//!
//! Products follow a single convention throughout the crate:
//!
//! | operation        | index form                       |
//! |------------------|----------------------------------|
//! | `A · B`  (2·2)   | `C_ik   = A_ij B_jk`             |
//! | `A · B`  (2·4)   | `C_ilmn = A_ij B_jlmn`           |
//! | `A · B`  (4·2)   | `C_ijkm = A_ijkl B_lm`           |
//! | `A : B`  (4:2)   | `C_ij   = A_ijkl B_lk`           |
//! | `A : B`  (4:4)   | `C_ijmn = A_ijkl B_lkmn`         |
//! | `A : B`  (2:2)   | `c      = A_ij B_ji`             |
//! | `A ⊗ B`          | `C_ijkl = A_ij B_kl`             |
//! | `A^T`  (4)       | `C_lkji = A_ijkl`                |
//! | `A^LT`           | `C_jikl = A_ijkl`                |
//! | `A^RT`           | `C_ijlk = A_ijkl`                |
//! | `II`             | `δ_il δ_jk`  (`II : A = A`)      |
//! | `I^RT`           | `δ_ik δ_jl`  (`I^RT : A = A^T`)  |
//! | `I^s`            | `½ (II + I^RT)`                  |
//!
//! Note the reversed inner pair in the double contraction: `A : B` contracts
//! the last index of `A` with the first index of `B` and so on inwards.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use super::sym::{symmetric_eigen, SymEigen};

/// Tolerance on `|det|` below which a tensor is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-30;

/// Smallest eigenvalue accepted by [`Tensor2::ln_sym`].
pub const EIGEN_CLAMP: f64 = 1e-30;

/// Relative tolerance used by the symmetry check of `ln_sym` / `exp_sym`.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalError {
    Singular,
    NotSymmetric,
    NotPositiveDefinite,
}

/// Second-order tensor, row-major in the first `dim²` slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor2 {
    dim: usize,
    c: [f64; 9],
}

/// Fourth-order tensor; component `(i,j,k,l)` lives at `((i·d + j)·d + k)·d + l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor4 {
    dim: usize,
    c: [f64; 81],
}

fn check_dim(dim: usize) {
    assert!(dim == 2 || dim == 3, "tensor dimension must be 2 or 3, got {dim}");
}

impl Tensor2 {
    pub fn zeros(dim: usize) -> Self {
        check_dim(dim);
        Self { dim, c: [0.0; 9] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            t[(i, i)] = 1.0;
        }
        t
    }

    /// Builds from a row-major slice of length `dim²`.
    pub fn from_row_major(dim: usize, values: &[f64]) -> Self {
        let mut t = Self::zeros(dim);
        assert_eq!(values.len(), dim * dim);
        t.c[..dim * dim].copy_from_slice(values);
        t
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                t[(i, j)] = f(i, j);
            }
        }
        t
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut t = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            t[(i, i)] = *v;
        }
        t
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.c[..self.dim * self.dim]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.c[..self.dim * self.dim]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn sym(&self) -> Self {
        Self::from_fn(self.dim, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    pub fn deviator(&self) -> Self {
        let mut t = *self;
        let m = self.trace() / self.dim as f64;
        for i in 0..self.dim {
            t[(i, i)] -= m;
        }
        t
    }

    pub fn norm(&self) -> f64 {
        self.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `A · B`
    pub fn dot(&self, other: &Tensor2) -> Tensor2 {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        Self::from_fn(d, |i, k| (0..d).map(|j| self[(i, j)] * other[(j, k)]).sum())
    }

    /// `A · B` with `B` fourth order: `C_ilmn = A_ij B_jlmn`.
    pub fn dot4(&self, other: &Tensor4) -> Tensor4 {
        let d = self.dim;
        Tensor4::from_fn(d, |i, l, m, n| {
            (0..d).map(|j| self[(i, j)] * other[(j, l, m, n)]).sum()
        })
    }

    /// `A : B = A_ij B_ji`
    pub fn ddot(&self, other: &Tensor2) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += self[(i, j)] * other[(j, i)];
            }
        }
        s
    }

    /// `A ⊗ B`
    pub fn dyad(&self, other: &Tensor2) -> Tensor4 {
        Tensor4::from_fn(self.dim, |i, j, k, l| self[(i, j)] * other[(k, l)])
    }

    pub fn det(&self) -> f64 {
        let a = self;
        match self.dim {
            2 => a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)],
            _ => {
                a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
                    - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
                    + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)])
            }
        }
    }

    /// Inverse by the adjugate; fails when `|det| < SINGULAR_TOL`.
    pub fn inverse(&self) -> Result<Tensor2, LocalError> {
        let det = self.det();
        if det.abs() < SINGULAR_TOL || !det.is_finite() {
            return Err(LocalError::Singular);
        }
        let a = self;
        let inv = match self.dim {
            2 => Tensor2::from_row_major(
                2,
                &[
                    a[(1, 1)] / det,
                    -a[(0, 1)] / det,
                    -a[(1, 0)] / det,
                    a[(0, 0)] / det,
                ],
            ),
            _ => {
                let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
                    a[(r0, c0)] * a[(r1, c1)] - a[(r0, c1)] * a[(r1, c0)]
                };
                Tensor2::from_row_major(
                    3,
                    &[
                        cof(1, 2, 1, 2) / det,
                        -cof(0, 2, 1, 2) / det,
                        cof(0, 1, 1, 2) / det,
                        -cof(1, 2, 0, 2) / det,
                        cof(0, 2, 0, 2) / det,
                        -cof(0, 1, 0, 2) / det,
                        cof(1, 2, 0, 1) / det,
                        -cof(0, 2, 0, 1) / det,
                        cof(0, 1, 0, 1) / det,
                    ],
                )
            }
        };
        Ok(inv)
    }

    pub fn is_symmetric(&self) -> bool {
        let scale = self.norm().max(1.0);
        let d = self.dim;
        (0..d).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= SYMMETRY_TOL * scale))
    }

    /// Eigen-decomposition of the symmetric part; errors if the tensor is not symmetric.
    pub fn eigen_sym(&self) -> Result<SymEigen, LocalError> {
        if !self.is_symmetric() {
            return Err(LocalError::NotSymmetric);
        }
        Ok(symmetric_eigen(&self.sym()))
    }

    /// Matrix logarithm of a symmetric positive-definite tensor.
    pub fn ln_sym(&self) -> Result<Tensor2, LocalError> {
        let eig = self.eigen_sym()?;
        if eig.values[..self.dim].iter().any(|&v| v < EIGEN_CLAMP) {
            return Err(LocalError::NotPositiveDefinite);
        }
        Ok(eig.map(f64::ln))
    }

    /// Matrix exponential of a symmetric tensor.
    pub fn exp_sym(&self) -> Result<Tensor2, LocalError> {
        Ok(self.eigen_sym()?.map(f64::exp))
    }

    /// Embeds a 2×2 tensor in 3×3 with `fill` in the out-of-plane diagonal slot.
    pub fn embed3(&self, fill: f64) -> Tensor2 {
        if self.dim == 3 {
            return *self;
        }
        let mut t = Tensor2::zeros(3);
        for i in 0..2 {
            for j in 0..2 {
                t[(i, j)] = self[(i, j)];
            }
        }
        t[(2, 2)] = fill;
        t
    }

    /// Leading `dim × dim` block.
    pub fn restrict(&self, dim: usize) -> Tensor2 {
        Tensor2::from_fn(dim, |i, j| self[(i, j)])
    }
}

impl std::ops::Index<(usize, usize)> for Tensor2 {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.c[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Tensor2 {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.c[i * self.dim + j]
    }
}

impl Add for Tensor2 {
    type Output = Tensor2;
    fn add(mut self, rhs: Tensor2) -> Tensor2 {
        self += rhs;
        self
    }
}

impl AddAssign for Tensor2 {
    fn add_assign(&mut self, rhs: Tensor2) {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
    }
}

impl Sub for Tensor2 {
    type Output = Tensor2;
    fn sub(mut self, rhs: Tensor2) -> Tensor2 {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        self
    }
}

impl Mul<f64> for Tensor2 {
    type Output = Tensor2;
    fn mul(mut self, s: f64) -> Tensor2 {
        self.c.iter_mut().for_each(|v| *v *= s);
        self
    }
}

impl Neg for Tensor2 {
    type Output = Tensor2;
    fn neg(self) -> Tensor2 {
        self * -1.0
    }
}

impl Tensor4 {
    pub fn zeros(dim: usize) -> Self {
        check_dim(dim);
        Self { dim, c: [0.0; 81] }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        t[(i, j, k, l)] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    pub fn from_slice(dim: usize, values: &[f64]) -> Self {
        let mut t = Self::zeros(dim);
        t.c[..dim.pow(4)].copy_from_slice(values);
        t
    }

    /// `II_ijkl = δ_il δ_jk`
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j, k, l| delta(i, l) * delta(j, k))
    }

    /// `I^RT_ijkl = δ_ik δ_jl`
    pub fn identity_rt(dim: usize) -> Self {
        Self::from_fn(dim, |i, j, k, l| delta(i, k) * delta(j, l))
    }

    /// `I^s = ½ (II + I^RT)`
    pub fn identity_sym(dim: usize) -> Self {
        Self::from_fn(dim, |i, j, k, l| {
            0.5 * (delta(i, l) * delta(j, k) + delta(i, k) * delta(j, l))
        })
    }

    /// Isotropic stiffness `λ I⊗I + 2μ I^s`.
    pub fn isotropic(dim: usize, lambda: f64, mu: f64) -> Self {
        Self::from_fn(dim, |i, j, k, l| {
            lambda * delta(i, j) * delta(k, l)
                + mu * (delta(i, l) * delta(j, k) + delta(i, k) * delta(j, l))
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.c[..self.dim.pow(4)]
    }

    pub fn norm(&self) -> f64 {
        self.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `A : B = A_ijkl B_lk`
    pub fn ddot2(&self, b: &Tensor2) -> Tensor2 {
        let d = self.dim;
        Tensor2::from_fn(d, |i, j| {
            let mut s = 0.0;
            for k in 0..d {
                for l in 0..d {
                    s += self[(i, j, k, l)] * b[(l, k)];
                }
            }
            s
        })
    }

    /// `A : B = A_ijkl B_lkmn`
    pub fn ddot4(&self, b: &Tensor4) -> Tensor4 {
        let d = self.dim;
        Tensor4::from_fn(d, |i, j, m, n| {
            let mut s = 0.0;
            for k in 0..d {
                for l in 0..d {
                    s += self[(i, j, k, l)] * b[(l, k, m, n)];
                }
            }
            s
        })
    }

    /// `A · B = A_ijkl B_lm`
    pub fn dot2(&self, b: &Tensor2) -> Tensor4 {
        let d = self.dim;
        Tensor4::from_fn(d, |i, j, k, m| (0..d).map(|l| self[(i, j, k, l)] * b[(l, m)]).sum())
    }

    /// `C_lkji = A_ijkl`
    pub fn transpose(&self) -> Tensor4 {
        Tensor4::from_fn(self.dim, |l, k, j, i| self[(i, j, k, l)])
    }

    /// `C_jikl = A_ijkl`
    pub fn transpose_left(&self) -> Tensor4 {
        Tensor4::from_fn(self.dim, |j, i, k, l| self[(i, j, k, l)])
    }

    /// `C_ijlk = A_ijkl`
    pub fn transpose_right(&self) -> Tensor4 {
        Tensor4::from_fn(self.dim, |i, j, l, k| self[(i, j, k, l)])
    }

    /// Leading block with all indices below `dim`.
    pub fn restrict(&self, dim: usize) -> Tensor4 {
        Tensor4::from_fn(dim, |i, j, k, l| self[(i, j, k, l)])
    }
}

impl std::ops::Index<(usize, usize, usize, usize)> for Tensor4 {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j, k, l): (usize, usize, usize, usize)) -> &f64 {
        let d = self.dim;
        &self.c[((i * d + j) * d + k) * d + l]
    }
}

impl std::ops::IndexMut<(usize, usize, usize, usize)> for Tensor4 {
    #[inline]
    fn index_mut(&mut self, (i, j, k, l): (usize, usize, usize, usize)) -> &mut f64 {
        let d = self.dim;
        &mut self.c[((i * d + j) * d + k) * d + l]
    }
}

impl Add for Tensor4 {
    type Output = Tensor4;
    fn add(mut self, rhs: Tensor4) -> Tensor4 {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for Tensor4 {
    type Output = Tensor4;
    fn sub(mut self, rhs: Tensor4) -> Tensor4 {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        self
    }
}

impl Mul<f64> for Tensor4 {
    type Output = Tensor4;
    fn mul(mut self, s: f64) -> Tensor4 {
        self.c.iter_mut().for_each(|v| *v *= s);
        self
    }
}

#[inline]
pub fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(dim: usize, seed: f64) -> Tensor2 {
        Tensor2::from_fn(dim, |i, j| ((i * 3 + j) as f64 * 0.731 + seed).sin())
    }

    #[test]
    fn identity_contractions() {
        for d in [2, 3] {
            let a = sample(d, 0.3);
            assert_eq!(Tensor2::identity(d).dot(&a), a);
            let rt = Tensor4::identity_rt(d).ddot2(&a);
            // index oracle: I^RT_ijkl A_lk = δ_ik δ_jl A_lk = A_ji
            for i in 0..d {
                for j in 0..d {
                    let mut s = 0.0;
                    for k in 0..d {
                        for l in 0..d {
                            s += delta(i, k) * delta(j, l) * a[(l, k)];
                        }
                    }
                    assert_eq!(rt[(i, j)], s);
                    assert_eq!(rt[(i, j)], a[(j, i)]);
                }
            }
            assert_eq!(Tensor4::identity(d).ddot2(&a), a);
            let s = Tensor4::identity_sym(d).ddot2(&a);
            assert!((s - a.sym()).norm() < 1e-15);
        }
    }

    #[test]
    fn dyad_of_identities_gives_trace() {
        let a = sample(3, 1.1);
        let i = Tensor2::identity(3);
        let r = i.dyad(&i).ddot2(&a);
        assert!((r - i * a.trace()).norm() < 1e-14);
    }

    #[test]
    fn inverse_round_trip() {
        for d in [2, 3] {
            let f = Tensor2::identity(d) + sample(d, 0.5) * 0.3;
            let inv = f.inverse().unwrap();
            assert!((inv.dot(&f) - Tensor2::identity(d)).norm() < 1e-12);
        }
        assert_eq!(Tensor2::zeros(3).inverse(), Err(LocalError::Singular));
    }

    #[test]
    fn ln_of_diagonal() {
        let e = std::f64::consts::E;
        let b = Tensor2::diag(&[e * e, 1.0, 1.0]);
        let l = b.ln_sym().unwrap();
        assert!((l - Tensor2::diag(&[2.0, 0.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn ln_rejects_bad_input() {
        let mut a = Tensor2::identity(3);
        a[(0, 1)] = 0.5;
        assert_eq!(a.ln_sym(), Err(LocalError::NotSymmetric));
        assert_eq!(Tensor2::diag(&[1.0, -1.0, 1.0]).ln_sym(), Err(LocalError::NotPositiveDefinite));
    }

    #[test]
    fn transposes_follow_index_table() {
        let a = Tensor4::from_fn(2, |i, j, k, l| (i * 8 + j * 4 + k * 2 + l) as f64);
        assert_eq!(a.transpose()[(1, 0, 1, 0)], a[(0, 1, 0, 1)]);
        assert_eq!(a.transpose_left()[(1, 0, 0, 1)], a[(0, 1, 0, 1)]);
        assert_eq!(a.transpose_right()[(0, 1, 1, 0)], a[(0, 1, 0, 1)]);
    }

    #[test]
    fn ddot44_is_composition() {
        let a = Tensor4::from_fn(3, |i, j, k, l| ((i + 2 * j + 3 * k + 5 * l) as f64).cos());
        let b = Tensor4::from_fn(3, |i, j, k, l| ((i * j + k + l) as f64 * 0.3).sin());
        let x = sample(3, 0.9);
        let lhs = a.ddot4(&b).ddot2(&x);
        let rhs = a.ddot2(&b.ddot2(&x));
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
