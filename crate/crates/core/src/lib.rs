//! Finite-strain FFT homogenization of periodic cells.
//!
//! A Galerkin discretisation with a compatibility projection: the deformation
//! gradient is searched among compatible periodic fields with prescribed mean,
//! and equilibrium is enforced through Newton iterations whose linear systems
//! are solved matrix-free by conjugate gradients.

// Validation compares with `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod constitutive;
pub mod fft;
pub mod microstructure;
pub mod projection;
pub mod solver;
pub mod tensor_field;
