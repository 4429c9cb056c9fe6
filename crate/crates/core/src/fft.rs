//! Multi-dimensional complex FFT over row-major grids, one axis at a time.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::tensor_field::GridShape;

/// Forward/inverse plans for every axis of a grid. The inverse is normalised
/// by `1/n` so that `inverse(forward(x)) = x`.
pub struct FftNd {
    points: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd").field("points", &self.points).finish()
    }
}

impl FftNd {
    pub fn new(shape: &GridShape) -> Self {
        let mut planner = FftPlanner::new();
        let points = shape.points().to_vec();
        let forward = points.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = points.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Self { points, forward, inverse }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        let total: usize = self.points.iter().product();
        assert_eq!(data.len(), total);
        for (axis, plan) in plans.iter().enumerate() {
            let len = self.points[axis];
            if len == 1 {
                continue;
            }
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            let stride: usize = self.points[axis + 1..].iter().product();
            if stride == 1 {
                // last axis: lines are contiguous
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let outer = total / (len * stride);
            let mut line = vec![Complex64::default(); len];
            for o in 0..outer {
                let base = o * len * stride;
                for s in 0..stride {
                    for (m, v) in line.iter_mut().enumerate() {
                        *v = data[base + m * stride + s];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (m, v) in line.iter().enumerate() {
                        data[base + m * stride + s] = *v;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(shape: &GridShape, x: &[Complex64]) -> Vec<Complex64> {
        let n = shape.nodes();
        (0..n)
            .map(|q| {
                let qi = shape.multi_index(q);
                (0..n)
                    .map(|k| {
                        let ki = shape.multi_index(k);
                        let phase: f64 = (0..shape.dim())
                            .map(|a| (qi[a] * ki[a]) as f64 / shape.points()[a] as f64)
                            .sum();
                        x[k] * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * phase)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_and_inverts() {
        let shape = GridShape::unit(&[3, 4, 5]).unwrap();
        let x: Vec<Complex64> = (0..shape.nodes())
            .map(|k| Complex64::new((k as f64 * 0.7).sin(), (k as f64 * 0.3).cos()))
            .collect();
        let fft = FftNd::new(&shape);
        let mut y = x.clone();
        fft.forward(&mut y);
        let expect = naive_dft(&shape, &x);
        for (a, b) in y.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12);
        }
        fft.inverse(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
