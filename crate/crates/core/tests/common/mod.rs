//! Helpers shared by the integration tests and the acceptance suite.
//!
//! Everything here is written against first principles (naive DFT sums,
//! analytic gradients) so it can check the library rather than echo it.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::Path;

use fft_homog::constitutive::{ElasticParams, PlasticParams};
use fft_homog::microstructure::{gray_image, load_image_threshold, write_pgm, PhaseGrid};
use fft_homog::tensor_field::{GridShape, Tensor2, Tensor2Field};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_field(shape: &GridShape, rng: &mut ChaCha8Rng) -> Tensor2Field {
    let d = shape.dim();
    let data = (0..shape.nodes() * d * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Tensor2Field::from_vec(shape, data)
}

pub fn random_tensor(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> Tensor2 {
    let values: Vec<f64> = (0..d * d).map(|_| rng.gen_range(-scale..scale)).collect();
    Tensor2::from_row_major(d, &values)
}

/// `I + scale · noise`, redrawn until `det ≥ 0.5`.
pub fn random_deformation(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> Tensor2 {
    loop {
        let f = Tensor2::identity(d) + random_tensor(d, scale, rng);
        if f.det() >= 0.5 {
            return f;
        }
    }
}

pub fn simple_shear(d: usize, gamma: f64) -> Tensor2 {
    let mut f = Tensor2::identity(d);
    f[(0, 1)] = gamma;
    f
}

pub fn pure_shear(stretch: f64) -> Tensor2 {
    Tensor2::diag(&[stretch, 1.0 / stretch])
}

/// Integer frequency of index `m` on an axis of `n` points.
pub fn freq(m: usize, n: usize) -> i64 {
    if 2 * m < n {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Unnormalised forward DFT by direct summation, one axis at a time.
pub fn dft(shape: &GridShape, values: &[f64]) -> Vec<Complex64> {
    let pts = shape.points();
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for (axis, &n) in pts.iter().enumerate() {
        let stride: usize = pts[axis + 1..].iter().product();
        let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
        for (node, o) in out.iter_mut().enumerate() {
            let m = (node / stride) % n;
            let base = node - m * stride;
            for j in 0..n {
                let w = Complex64::from_polar(1.0, -2.0 * PI * (m * j % n) as f64 / n as f64);
                *o += w * data[base + j * stride];
            }
        }
        data = out;
    }
    data
}

/// Largest violation of `ξ_j Â_ik = ξ_k Â_ij` over all non-zero frequencies,
/// relative to `max|ξ| · max|Â|`. Zero for a field whose rows are gradients.
pub fn curl_residual(a: &Tensor2Field) -> f64 {
    let shape = a.shape();
    let d = shape.dim();
    let hat: Vec<Vec<Complex64>> =
        (0..d * d).map(|c| dft(shape, a.component(c / d, c % d))).collect();
    let scale = hat.iter().flatten().fold(0.0f64, |m, z| m.max(z.norm()));
    let mut worst = 0.0f64;
    let mut xi_max = 0.0f64;
    for (node, _) in hat[0].iter().enumerate() {
        let idx = shape.multi_index(node);
        let xi: Vec<f64> = (0..d).map(|k| freq(idx[k], shape.points()[k]) as f64 / shape.lengths()[k]).collect();
        if xi.iter().all(|&x| x == 0.0) {
            continue;
        }
        xi_max = xi_max.max(xi.iter().map(|x| x * x).sum::<f64>().sqrt());
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let r = hat[i * d + k][node] * xi[j] - hat[i * d + j][node] * xi[k];
                    worst = worst.max(r.norm());
                }
            }
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / (scale * xi_max)
    }
}

/// Band-limited periodic potentials `φ_i`, one per row, with their exact gradients.
pub struct Potential {
    /// `(q, row, cos amplitude, sin amplitude)`
    modes: Vec<([i64; 3], usize, f64, f64)>,
}

impl Potential {
    /// Frequencies are kept strictly below Nyquist on every axis.
    pub fn random(shape: &GridShape, modes_per_row: usize, rng: &mut ChaCha8Rng) -> Self {
        let d = shape.dim();
        let mut modes = Vec::new();
        for row in 0..d {
            while modes.iter().filter(|m: &&([i64; 3], usize, f64, f64)| m.1 == row).count() < modes_per_row {
                let mut q = [0i64; 3];
                for (qa, &n) in q.iter_mut().zip(shape.points()) {
                    let half = (n as i64 - 1) / 2;
                    *qa = rng.gen_range(-half..=half);
                }
                if q.iter().all(|&x| x == 0) {
                    continue;
                }
                modes.push((q, row, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
        }
        Self { modes }
    }

    /// `A_ij = ∂φ_i/∂x_j` at every node.
    pub fn gradient(&self, shape: &GridShape) -> Tensor2Field {
        let d = shape.dim();
        Tensor2Field::from_fn(shape, |node| {
            let idx = shape.multi_index(node);
            let mut t = Tensor2::zeros(d);
            for &(q, row, a, b) in &self.modes {
                let theta: f64 =
                    (0..d).map(|k| 2.0 * PI * q[k] as f64 * idx[k] as f64 / shape.points()[k] as f64).sum();
                for j in 0..d {
                    let dj = 2.0 * PI * q[j] as f64 / shape.lengths()[j];
                    t[(row, j)] += dj * (b * theta.cos() - a * theta.sin());
                }
            }
            t
        })
    }
}

/// Smooth periodic noise on a 2-D grid from a handful of low frequencies.
pub fn smooth_noise(shape: &GridShape, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut modes = Vec::new();
    for _ in 0..24 {
        let q = [rng.gen_range(-4i64..=4), rng.gen_range(-4i64..=4)];
        if q == [0, 0] {
            continue;
        }
        let amp = 1.0 / ((q[0] * q[0] + q[1] * q[1]) as f64).sqrt();
        modes.push((q, amp, rng.gen_range(0.0..2.0 * PI)));
    }
    (0..shape.nodes())
        .map(|node| {
            let idx = shape.multi_index(node);
            modes
                .iter()
                .map(|&(q, amp, phase)| {
                    let theta = 2.0 * PI
                        * (q[0] as f64 * idx[0] as f64 / shape.points()[0] as f64
                            + q[1] as f64 * idx[1] as f64 / shape.points()[1] as f64);
                    amp * (theta + phase).cos()
                })
                .sum()
        })
        .collect()
}

/// Writes a synthetic `n × n` micrograph with roughly `dark` of its pixels
/// black to `dir`, thresholds it back and returns the phase grid (phase 1 = dark).
pub fn synthetic_micrograph(dir: &Path, n: usize, dark: f64, seed: u64) -> PhaseGrid {
    let shape = GridShape::unit(&[n, n]).unwrap();
    let noise = smooth_noise(&shape, &mut rng(seed));
    let (lo, hi) = noise.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let levels: Vec<u8> = noise.iter().map(|&v| (255.0 * (v - lo) / (hi - lo)).round() as u8).collect();
    let mut sorted = levels.clone();
    sorted.sort_unstable();
    let threshold = sorted[((dark * levels.len() as f64) as usize).saturating_sub(1)];
    let path = dir.join("micrograph.pgm");
    write_pgm(&path, &gray_image(&shape, |node| levels[node])).unwrap();
    load_image_threshold(&path, threshold as f64, false).unwrap()
}

pub fn elastic_phase(youngs: f64) -> PlasticParams {
    PlasticParams::elastic_only(ElasticParams::new(youngs, 0.3).unwrap())
}

/// Soft phase 0 yields at `0.003 E` with hardening `0.01 E`; the hard phase 1
/// has both scaled by `chi` and the same elasticity.
pub fn dual_phase(chi: f64) -> Vec<PlasticParams> {
    let e = ElasticParams::new(1.0, 0.3).unwrap();
    vec![
        PlasticParams::new(e, 0.003, 0.01).unwrap(),
        PlasticParams::new(e, 0.003 * chi, 0.01 * chi).unwrap(),
    ]
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
