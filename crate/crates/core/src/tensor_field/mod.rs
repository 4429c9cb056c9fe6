//! Scalar, second- and fourth-order tensor fields on a regular periodic grid.
//!
//! Storage is component-major: each tensor component is one contiguous array of
//! `n` nodal values, nodes ordered row-major over the grid axes (last axis
//! fastest). Component `(i, j)` of a second-order field is array `i·d + j`; a
//! fourth-order field orders its `d⁴` arrays the same way. See [`local`] for the
//! product conventions.

pub mod local;
pub mod sym;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use local::{LocalError, Tensor2, Tensor4};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("singular tensor at node {node}")]
    SingularTensor { node: usize },
    #[error("tensor at node {node} is not symmetric")]
    NotSymmetric { node: usize },
    #[error("tensor at node {node} is not positive definite")]
    NotPositiveDefinite { node: usize },
    #[error("invalid grid shape: {0}")]
    InvalidShape(String),
}

impl TensorError {
    fn at(node: usize, e: LocalError) -> Self {
        match e {
            LocalError::Singular => TensorError::SingularTensor { node },
            LocalError::NotSymmetric => TensorError::NotSymmetric { node },
            LocalError::NotPositiveDefinite => TensorError::NotPositiveDefinite { node },
        }
    }
}

/// Periodic grid: number of nodes and cell length per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridShape {
    points: Vec<usize>,
    lengths: Vec<f64>,
}

impl GridShape {
    pub fn new(points: &[usize], lengths: &[f64]) -> Result<Self, TensorError> {
        if !(points.len() == 2 || points.len() == 3) {
            return Err(TensorError::InvalidShape(format!(
                "dimension must be 2 or 3, got {}",
                points.len()
            )));
        }
        if lengths.len() != points.len() {
            return Err(TensorError::InvalidShape(format!(
                "{} lengths given for {} axes",
                lengths.len(),
                points.len()
            )));
        }
        if points.contains(&0) {
            return Err(TensorError::InvalidShape("every axis needs at least one node".into()));
        }
        if lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(TensorError::InvalidShape("cell lengths must be positive".into()));
        }
        Ok(Self { points: points.to_vec(), lengths: lengths.to_vec() })
    }

    /// Unit cell of length one along every axis.
    pub fn unit(points: &[usize]) -> Result<Self, TensorError> {
        Self::new(points, &vec![1.0; points.len()])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    #[inline]
    pub fn nodes(&self) -> usize {
        self.points.iter().product()
    }

    /// Grid multi-index of a node (unused trailing axes are zero).
    pub fn multi_index(&self, mut node: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for axis in (0..self.dim()).rev() {
            idx[axis] = node % self.points[axis];
            node /= self.points[axis];
        }
        idx
    }

    pub fn node_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.points).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Reference position of a node: `X_a = i_a · L_a / N_a`.
    pub fn position(&self, node: usize) -> [f64; 3] {
        let idx = self.multi_index(node);
        let mut x = [0.0; 3];
        for a in 0..self.dim() {
            x[a] = idx[a] as f64 * self.lengths[a] / self.points[a] as f64;
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    shape: GridShape,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(shape: &GridShape) -> Self {
        Self::constant(shape, 0.0)
    }

    pub fn constant(shape: &GridShape, value: f64) -> Self {
        Self { data: vec![value; shape.nodes()], shape: shape.clone() }
    }

    pub fn from_vec(shape: &GridShape, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), shape.nodes(), "scalar field length mismatch");
        Self { shape: shape.clone(), data }
    }

    pub fn from_fn(shape: &GridShape, f: impl Fn(usize) -> f64) -> Self {
        Self { data: (0..shape.nodes()).map(f).collect(), shape: shape.clone() }
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, node: usize) -> f64 {
        self.data[node]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// Field of `d × d` tensors, `d` equal to the grid dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2Field {
    shape: GridShape,
    data: Vec<f64>,
}

impl Tensor2Field {
    pub fn zeros(shape: &GridShape) -> Self {
        let d = shape.dim();
        Self { data: vec![0.0; d * d * shape.nodes()], shape: shape.clone() }
    }

    pub fn from_vec(shape: &GridShape, data: Vec<f64>) -> Self {
        let d = shape.dim();
        assert_eq!(data.len(), d * d * shape.nodes(), "tensor field length mismatch");
        Self { shape: shape.clone(), data }
    }

    /// The same tensor at every node.
    pub fn broadcast(shape: &GridShape, t: &Tensor2) -> Self {
        assert_eq!(t.dim(), shape.dim());
        let n = shape.nodes();
        let mut data = Vec::with_capacity(t.as_slice().len() * n);
        for &v in t.as_slice() {
            data.extend(std::iter::repeat_n(v, n));
        }
        Self { shape: shape.clone(), data }
    }

    pub fn from_fn(shape: &GridShape, f: impl Fn(usize) -> Tensor2) -> Self {
        let mut out = Self::zeros(shape);
        for node in 0..shape.nodes() {
            out.set(node, &f(node));
        }
        out
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    #[inline]
    pub fn nodes(&self) -> usize {
        self.shape.nodes()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Contiguous nodal array of component `(i, j)`.
    pub fn component(&self, i: usize, j: usize) -> &[f64] {
        let n = self.nodes();
        let c = i * self.dim() + j;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let n = self.nodes();
        let c = i * self.dim() + j;
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, node: usize) -> Tensor2 {
        let d = self.dim();
        let n = self.nodes();
        let mut t = Tensor2::zeros(d);
        for (c, v) in t.as_mut_slice().iter_mut().enumerate() {
            *v = self.data[c * n + node];
        }
        t
    }

    pub fn set(&mut self, node: usize, t: &Tensor2) {
        let n = self.nodes();
        for (c, v) in t.as_slice().iter().enumerate() {
            self.data[c * n + node] = *v;
        }
    }

    pub fn map(&self, f: impl Fn(&Tensor2) -> Tensor2) -> Tensor2Field {
        Self::from_fn(&self.shape, |k| f(&self.get(k)))
    }

    fn try_map(&self, f: impl Fn(&Tensor2) -> Result<Tensor2, LocalError>) -> Result<Tensor2Field, TensorError> {
        let mut out = Self::zeros(&self.shape);
        for node in 0..self.nodes() {
            let t = f(&self.get(node)).map_err(|e| TensorError::at(node, e))?;
            out.set(node, &t);
        }
        Ok(out)
    }

    /// Inner product summed over nodes and components.
    pub fn inner(&self, other: &Tensor2Field) -> f64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// `self += alpha · x`
    pub fn axpy(&mut self, alpha: f64, x: &Tensor2Field) {
        for (a, b) in self.data.iter_mut().zip(&x.data) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn scaled(&self, alpha: f64) -> Tensor2Field {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    pub fn add(&self, other: &Tensor2Field) -> Tensor2Field {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &Tensor2Field) -> Tensor2Field {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }
}

/// Field of `d × d × d × d` tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4Field {
    shape: GridShape,
    data: Vec<f64>,
}

impl Tensor4Field {
    pub fn zeros(shape: &GridShape) -> Self {
        Self { data: vec![0.0; shape.dim().pow(4) * shape.nodes()], shape: shape.clone() }
    }

    pub fn broadcast(shape: &GridShape, t: &Tensor4) -> Self {
        assert_eq!(t.dim(), shape.dim());
        let n = shape.nodes();
        let mut data = Vec::with_capacity(t.as_slice().len() * n);
        for &v in t.as_slice() {
            data.extend(std::iter::repeat_n(v, n));
        }
        Self { shape: shape.clone(), data }
    }

    pub fn from_fn(shape: &GridShape, f: impl Fn(usize) -> Tensor4) -> Self {
        let mut out = Self::zeros(shape);
        for node in 0..shape.nodes() {
            out.set(node, &f(node));
        }
        out
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, node: usize) -> Tensor4 {
        let d = self.shape.dim();
        let n = self.shape.nodes();
        let vals: Vec<f64> = (0..d.pow(4)).map(|c| self.data[c * n + node]).collect();
        Tensor4::from_slice(d, &vals)
    }

    pub fn set(&mut self, node: usize, t: &Tensor4) {
        let n = self.shape.nodes();
        for (c, v) in t.as_slice().iter().enumerate() {
            self.data[c * n + node] = *v;
        }
    }
}

pub fn identity2(shape: &GridShape) -> Tensor2Field {
    Tensor2Field::broadcast(shape, &Tensor2::identity(shape.dim()))
}

pub fn identity4(shape: &GridShape) -> Tensor4Field {
    Tensor4Field::broadcast(shape, &Tensor4::identity(shape.dim()))
}

pub fn identity4rt(shape: &GridShape) -> Tensor4Field {
    Tensor4Field::broadcast(shape, &Tensor4::identity_rt(shape.dim()))
}

pub fn identity4sym(shape: &GridShape) -> Tensor4Field {
    Tensor4Field::broadcast(shape, &Tensor4::identity_sym(shape.dim()))
}

/// `C_ij = A_ijkl B_lk`, node by node.
///
/// Works directly on the component arrays since this sits inside the inner
/// linear solve.
pub fn ddot42(a: &Tensor4Field, b: &Tensor2Field) -> Tensor2Field {
    let d = b.dim();
    let n = b.nodes();
    let mut out = Tensor2Field::zeros(b.shape());
    for i in 0..d {
        for j in 0..d {
            let dst = i * d + j;
            for k in 0..d {
                for l in 0..d {
                    let ac = ((i * d + j) * d + k) * d + l;
                    let bc = l * d + k;
                    let av = &a.data[ac * n..(ac + 1) * n];
                    let bv = &b.data[bc * n..(bc + 1) * n];
                    let ov = &mut out.data[dst * n..(dst + 1) * n];
                    for ((o, x), y) in ov.iter_mut().zip(av).zip(bv) {
                        *o += x * y;
                    }
                }
            }
        }
    }
    out
}

pub fn ddot44(a: &Tensor4Field, b: &Tensor4Field) -> Tensor4Field {
    Tensor4Field::from_fn(a.shape(), |k| a.get(k).ddot4(&b.get(k)))
}

pub fn dot22(a: &Tensor2Field, b: &Tensor2Field) -> Tensor2Field {
    Tensor2Field::from_fn(a.shape(), |k| a.get(k).dot(&b.get(k)))
}

pub fn dot24(a: &Tensor2Field, b: &Tensor4Field) -> Tensor4Field {
    Tensor4Field::from_fn(a.shape(), |k| a.get(k).dot4(&b.get(k)))
}

pub fn dot42(a: &Tensor4Field, b: &Tensor2Field) -> Tensor4Field {
    Tensor4Field::from_fn(a.shape(), |k| a.get(k).dot2(&b.get(k)))
}

pub fn dyad22(a: &Tensor2Field, b: &Tensor2Field) -> Tensor4Field {
    Tensor4Field::from_fn(a.shape(), |k| a.get(k).dyad(&b.get(k)))
}

pub fn trans2(a: &Tensor2Field) -> Tensor2Field {
    let d = a.dim();
    let mut out = Tensor2Field::zeros(a.shape());
    for i in 0..d {
        for j in 0..d {
            out.component_mut(j, i).copy_from_slice(a.component(i, j));
        }
    }
    out
}

pub fn trans4_left(a: &Tensor4Field) -> Tensor4Field {
    Tensor4Field::from_fn(a.shape(), |k| a.get(k).transpose_left())
}

pub fn trans4_right(a: &Tensor4Field) -> Tensor4Field {
    Tensor4Field::from_fn(a.shape(), |k| a.get(k).transpose_right())
}

pub fn inv2(a: &Tensor2Field) -> Result<Tensor2Field, TensorError> {
    a.try_map(|t| t.inverse())
}

pub fn det2(a: &Tensor2Field) -> ScalarField {
    ScalarField::from_fn(a.shape(), |k| a.get(k).det())
}

pub fn ln_sym2(a: &Tensor2Field) -> Result<Tensor2Field, TensorError> {
    a.try_map(|t| t.ln_sym())
}

pub fn exp_sym2(a: &Tensor2Field) -> Result<Tensor2Field, TensorError> {
    a.try_map(|t| t.exp_sym())
}

/// Frobenius norm over all nodes and components.
pub fn field_norm(a: &Tensor2Field) -> f64 {
    a.data.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Arithmetic mean tensor over the nodes.
pub fn field_mean(a: &Tensor2Field) -> Tensor2 {
    let d = a.dim();
    let n = a.nodes() as f64;
    Tensor2::from_fn(d, |i, j| a.component(i, j).iter().sum::<f64>() / n)
}
