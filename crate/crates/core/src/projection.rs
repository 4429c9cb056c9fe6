//! Fourier-space projection onto zero-mean compatible tensor fields.
//!
//! In Fourier space the projection acts row by row on a second-order field:
//! `Â_ij(q) = ĝ_jl(q) B̂_il(q)` with `ĝ(q) = ξ⊗ξ / |ξ|²`, `ξ_a = q_a / L_a`, and
//! `ĝ(0) = 0`. Every row of the result is therefore the gradient of a periodic
//! scalar potential. Only `ĝ` (`d × d` per frequency) is stored.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fft::FftNd;
use crate::tensor_field::{ddot42, trans2, GridShape, Tensor2, Tensor2Field, Tensor4Field};

/// Largest imaginary residue (relative to the input magnitude) tolerated when
/// returning to real space.
pub const COMPLEX_RESIDUE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error("imaginary residue {residue:e} after inverse transform")]
    ComplexResidue { residue: f64 },
    #[error("field shape does not match the projection grid")]
    ShapeMismatch,
}

/// Treatment of Nyquist frequencies on even-sized axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NyquistMode {
    /// `ĝ = 0`: the solution stays exactly compatible.
    #[default]
    ZeroCompatible,
    /// `ĝ = I`: the stress is equilibrated at those frequencies instead.
    IdentityEquilibrium,
}

/// Centred integer frequency for FFT index `m` on an axis of `n` points,
/// numpy `fftfreq` order: `0, 1, …, -2, -1`. For even `n` index `n/2` maps to `-n/2`.
pub fn centered_frequency(m: usize, n: usize) -> i64 {
    if m <= (n - 1) / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Integer and scaled frequency of every node in natural FFT order.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    shape: GridShape,
    q: Vec<[i64; 3]>,
}

impl FrequencyGrid {
    pub fn new(shape: &GridShape) -> Self {
        let q = (0..shape.nodes())
            .map(|node| {
                let idx = shape.multi_index(node);
                let mut q = [0i64; 3];
                for a in 0..shape.dim() {
                    q[a] = centered_frequency(idx[a], shape.points()[a]);
                }
                q
            })
            .collect();
        Self { shape: shape.clone(), q }
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn q(&self, node: usize) -> [i64; 3] {
        self.q[node]
    }

    pub fn xi(&self, node: usize) -> [f64; 3] {
        let mut xi = [0.0; 3];
        for (a, l) in self.shape.lengths().iter().enumerate() {
            xi[a] = self.q[node][a] as f64 / l;
        }
        xi
    }

    /// True when any component sits on the Nyquist index of an even axis.
    pub fn is_nyquist(&self, node: usize) -> bool {
        (0..self.shape.dim()).any(|a| {
            let n = self.shape.points()[a];
            n.is_multiple_of(2) && self.q[node][a] == -(n as i64 / 2)
        })
    }
}

/// Precomputed `ĝ(q)` for every frequency of a grid.
#[derive(Debug)]
pub struct ProjectionOperator {
    shape: GridShape,
    nyquist_mode: NyquistMode,
    /// `d²` entries per node, row-major, node-major.
    ghat: Vec<f64>,
    fft: FftNd,
}

impl ProjectionOperator {
    pub fn new(shape: &GridShape, nyquist_mode: NyquistMode) -> Self {
        let d = shape.dim();
        let freq = FrequencyGrid::new(shape);
        let mut ghat = vec![0.0; shape.nodes() * d * d];
        for node in 0..shape.nodes() {
            let g = &mut ghat[node * d * d..(node + 1) * d * d];
            if freq.is_nyquist(node) {
                if nyquist_mode == NyquistMode::IdentityEquilibrium {
                    for i in 0..d {
                        g[i * d + i] = 1.0;
                    }
                }
                continue;
            }
            let xi = freq.xi(node);
            let norm2: f64 = xi[..d].iter().map(|x| x * x).sum();
            if norm2 == 0.0 {
                continue;
            }
            for i in 0..d {
                for j in 0..d {
                    g[i * d + j] = xi[i] * xi[j] / norm2;
                }
            }
        }
        Self { shape: shape.clone(), nyquist_mode, ghat, fft: FftNd::new(shape) }
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn nyquist_mode(&self) -> NyquistMode {
        self.nyquist_mode
    }

    /// `ĝ` at a node (natural FFT ordering).
    pub fn ghat(&self, node: usize) -> Tensor2 {
        let d = self.shape.dim();
        Tensor2::from_row_major(d, &self.ghat[node * d * d..(node + 1) * d * d])
    }

    /// `G ⋆ A = F⁻¹{ Ĝ : F{A} }`.
    pub fn apply(&self, a: &Tensor2Field) -> Result<Tensor2Field, ProjectionError> {
        if a.shape() != &self.shape {
            return Err(ProjectionError::ShapeMismatch);
        }
        let d = self.shape.dim();
        let n = self.shape.nodes();
        let mut spectra: Vec<Vec<Complex64>> = a
            .data()
            .chunks(n)
            .map(|comp| comp.iter().map(|&v| Complex64::new(v, 0.0)).collect())
            .collect();
        for comp in spectra.iter_mut() {
            self.fft.forward(comp);
        }

        let mut projected = vec![vec![Complex64::default(); n]; d * d];
        let mut row = [Complex64::default(); 3];
        for node in 0..n {
            let g = &self.ghat[node * d * d..(node + 1) * d * d];
            for i in 0..d {
                for (l, r) in row.iter_mut().enumerate().take(d) {
                    *r = spectra[i * d + l][node];
                }
                for j in 0..d {
                    let mut acc = Complex64::default();
                    for l in 0..d {
                        acc += row[l] * g[j * d + l];
                    }
                    projected[i * d + j][node] = acc;
                }
            }
        }

        let scale = a.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut out = Vec::with_capacity(d * d * n);
        let mut residue = 0.0f64;
        for comp in projected.iter_mut() {
            self.fft.inverse(comp);
            for v in comp.iter() {
                residue = residue.max(v.im.abs());
                out.push(v.re);
            }
        }
        if residue > COMPLEX_RESIDUE_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(ProjectionError::ComplexResidue { residue });
        }
        Ok(Tensor2Field::from_vec(&self.shape, out))
    }

    /// Left-hand side of the linearised equilibrium system, `G : K^LT : δFᵀ`.
    ///
    /// With `δPᵀ = K : δFᵀ` this is simply `G ⋆ δP`.
    pub fn apply_projected_tangent(
        &self,
        tangent: &Tensor4Field,
        df: &Tensor2Field,
    ) -> Result<Tensor2Field, ProjectionError> {
        self.apply(&linearized_stress(tangent, df))
    }
}

/// `δP = (K : δFᵀ)ᵀ`, node by node.
pub fn linearized_stress(tangent: &Tensor4Field, df: &Tensor2Field) -> Tensor2Field {
    trans2(&ddot42(tangent, &trans2(df)))
}

pub fn build_projection(shape: &GridShape, nyquist_mode: NyquistMode) -> ProjectionOperator {
    ProjectionOperator::new(shape, nyquist_mode)
}

pub fn apply_projection(g: &ProjectionOperator, a: &Tensor2Field) -> Result<Tensor2Field, ProjectionError> {
    g.apply(a)
}

pub fn apply_projected_tangent(
    g: &ProjectionOperator,
    k: &Tensor4Field,
    df: &Tensor2Field,
) -> Result<Tensor2Field, ProjectionError> {
    g.apply_projected_tangent(k, df)
}
