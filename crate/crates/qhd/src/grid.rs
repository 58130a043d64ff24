//! Uniform tensor grids on `[0, 2pi)^d` and the FFT plumbing between grid
//! values and Fourier coefficients.
//!
//! Coefficients are mean-normalized: `u(x) = sum_j u_j e^{i j.x}` with
//! `u_j = (2pi)^{-d} \int u e^{-i j.x} dx`. With this convention
//! `sum_j |u_j|^2` equals the mean of `|u|^2` over the torus, so the mass
//! constraint `alpha^2 + sum_{j!=0} |z_j|^2 = m` holds exactly and all
//! Sobolev norms are computed as plain weighted coefficient sums.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::lattice::TorusShape;

/// Frequency of grid index `k` on an axis of size `n` (standard FFT order).
#[inline]
pub fn freq_of_index(k: usize, n: usize) -> i32 {
    if k <= n / 2 && !(n % 2 == 0 && k == n / 2) {
        k as i32
    } else {
        k as i32 - n as i32
    }
}

/// Grid index of frequency `j` on an axis of size `n`.
#[inline]
pub fn index_of_freq(j: i32, n: usize) -> usize {
    j.rem_euclid(n as i32) as usize
}

/// Complex field sampled on the `n^d` tensor grid, row-major with the last
/// axis contiguous.
#[derive(Debug, Clone)]
pub struct GridField {
    pub shape: TorusShape,
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(shape: TorusShape, n: usize) -> Self {
        let len = n.pow(shape.dim() as u32);
        Self {
            shape,
            n,
            data: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn constant(shape: TorusShape, n: usize, c: Complex64) -> Self {
        let len = n.pow(shape.dim() as u32);
        Self {
            shape,
            n,
            data: vec![c; len],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn mean(&self) -> Complex64 {
        self.data.iter().sum::<Complex64>() / self.data.len() as f64
    }

    /// Mean of `|psi|^2`; with the normalization above this equals
    /// `sum_j |psi_j|^2`.
    pub fn mass(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.data.len() as f64
    }

    pub fn min_modulus(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Planned d-dimensional FFT of one grid size, with scratch reused across
/// calls. Each worker owns its engine; there is no shared mutable state.
pub struct FftNd {
    n: usize,
    d: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    line: Vec<Complex64>,
}

impl FftNd {
    pub fn new(n: usize, d: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Self {
            n,
            d,
            fwd,
            inv,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            line: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn transform_axes(&mut self, data: &mut [Complex64], forward: bool) {
        let n = self.n;
        let d = self.d;
        let total = data.len();
        debug_assert_eq!(total, n.pow(d as u32));
        for ax in 0..d {
            let stride = n.pow((d - 1 - ax) as u32);
            if stride == 1 {
                for chunk in data.chunks_exact_mut(n) {
                    if forward {
                        self.fwd.process_with_scratch(chunk, &mut self.scratch);
                    } else {
                        self.inv.process_with_scratch(chunk, &mut self.scratch);
                    }
                }
            } else {
                let block = stride * n;
                let mut base = 0;
                while base < total {
                    for off in 0..stride {
                        let start = base + off;
                        for i in 0..n {
                            self.line[i] = data[start + i * stride];
                        }
                        if forward {
                            self.fwd.process_with_scratch(&mut self.line, &mut self.scratch);
                        } else {
                            self.inv.process_with_scratch(&mut self.line, &mut self.scratch);
                        }
                        for i in 0..n {
                            data[start + i * stride] = self.line[i];
                        }
                    }
                    base += block;
                }
            }
        }
    }

    /// Grid values -> mean-normalized coefficients (in place, FFT layout).
    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.transform_axes(data, true);
        let scale = 1.0 / data.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    /// Mean-normalized coefficients -> grid values (in place).
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.transform_axes(data, false);
    }
}

/// `|j|^2_a` for every index of the spectral grid layout.
pub fn aniso_table(shape: &TorusShape, n: usize) -> Vec<f64> {
    let d = shape.dim();
    let total = n.pow(d as u32);
    let mut out = vec![0.0; total];
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut rem = idx;
        let mut acc = 0.0;
        for k in (0..d).rev() {
            let j = freq_of_index(rem % n, n) as f64;
            acc += shape.a()[k] * j * j;
            rem /= n;
        }
        *slot = acc;
    }
    out
}

/// Euclidean `|j|^2` for every index of the spectral grid layout.
pub fn euclid_table(d: usize, n: usize) -> Vec<f64> {
    let total = n.pow(d as u32);
    let mut out = vec![0.0; total];
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut rem = idx;
        let mut acc = 0.0;
        for _ in 0..d {
            let j = freq_of_index(rem % n, n) as f64;
            acc += j * j;
            rem /= n;
        }
        *slot = acc;
    }
    out
}

/// Sobolev weights `(1 + |j|^2)^s` in grid layout.
pub fn sobolev_table(d: usize, n: usize, s: f64) -> Vec<f64> {
    euclid_table(d, n)
        .into_iter()
        .map(|e| (1.0 + e).powf(s))
        .collect()
}

/// `sum_k w_k |c_k|^2` over a spectral-layout buffer.
pub fn weighted_norm_sq(coeffs: &[Complex64], weights: &[f64]) -> f64 {
    coeffs
        .iter()
        .zip(weights)
        .map(|(c, &w)| w * c.norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn freq_index_roundtrip() {
        for n in [8usize, 16, 24, 32] {
            for k in 0..n {
                let j = freq_of_index(k, n);
                assert_eq!(index_of_freq(j, n), k);
            }
            assert_eq!(freq_of_index(0, n), 0);
            assert_eq!(freq_of_index(n - 1, n), -1);
        }
    }

    #[test]
    fn fft_roundtrip_and_normalization() {
        let shape = TorusShape::isotropic(2);
        let n = 16;
        let mut engine = FftNd::new(n, 2);
        let mut field = GridField::zeros(shape, n);
        // u(x) = 3 + 2 e^{i(x1 - 2 x2)}
        for k1 in 0..n {
            for k2 in 0..n {
                let x1 = 2.0 * std::f64::consts::PI * k1 as f64 / n as f64;
                let x2 = 2.0 * std::f64::consts::PI * k2 as f64 / n as f64;
                field.data[k1 * n + k2] = Complex64::new(3.0, 0.0)
                    + 2.0 * Complex64::new(0.0, x1 - 2.0 * x2).exp();
            }
        }
        let original = field.data.clone();
        engine.forward(&mut field.data);
        let c0 = field.data[0];
        let c = field.data[index_of_freq(1, n) * n + index_of_freq(-2, n)];
        assert!((c0 - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        assert!((c - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        engine.inverse(&mut field.data);
        for (a, b) in field.data.iter().zip(&original) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn mass_equals_coefficient_sum() {
        let shape = TorusShape::isotropic(2);
        let n = 8;
        let mut engine = FftNd::new(n, 2);
        let mut field = GridField::zeros(shape.clone(), n);
        for (i, z) in field.data.iter_mut().enumerate() {
            *z = Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
        }
        let mass_grid = field.mass();
        engine.forward(&mut field.data);
        let mass_spec: f64 = field.data.iter().map(|c| c.norm_sqr()).sum();
        assert!((mass_grid - mass_spec).abs() < 1e-12);
    }

    #[test]
    fn tables_match_definitions() {
        let shape = TorusShape::relaxed(vec![1.5, 2.5]).unwrap();
        let n = 8;
        let at = aniso_table(&shape, n);
        let idx = index_of_freq(2, n) * n + index_of_freq(-1, n);
        assert!((at[idx] - (1.5 * 4.0 + 2.5 * 1.0)).abs() < 1e-14);
        let st = sobolev_table(2, n, 1.5);
        assert!((st[idx] - (1.0f64 + 5.0).powf(1.5)).abs() < 1e-12);
    }
}
