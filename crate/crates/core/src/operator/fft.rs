//! Separable multidimensional DFT and the continuum-normalized spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::field::SampledField;

/// In-place unnormalized DFT over every axis of a row-major array.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], direction: FftDirection) {
    let mut planner = FftPlanner::new();
    let total: usize = shape.iter().product();
    assert_eq!(total, data.len());
    let mut stride = 1;
    for axis in (0..shape.len()).rev() {
        let n = shape[axis];
        if n > 1 {
            let fft = planner.plan_fft(n, direction);
            transform_axis(data, n, stride, fft.as_ref());
        }
        stride *= n;
    }
}

fn transform_axis(data: &mut [Complex64], n: usize, stride: usize, fft: &dyn Fft<f64>) {
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    if stride == 1 {
        for line in data.chunks_exact_mut(n) {
            fft.process_with_scratch(line, &mut scratch);
        }
        return;
    }
    // gather groups of interleaved lines, transform, scatter back
    const GROUP: usize = 64;
    let block = n * stride;
    let mut lines = vec![Complex64::default(); n * GROUP.min(stride)];
    for chunk in data.chunks_exact_mut(block) {
        for j0 in (0..stride).step_by(GROUP) {
            let g = GROUP.min(stride - j0);
            for k in 0..n {
                let row = &chunk[k * stride + j0..k * stride + j0 + g];
                for (j, v) in row.iter().enumerate() {
                    lines[j * n + k] = *v;
                }
            }
            for line in lines[..g * n].chunks_exact_mut(n) {
                fft.process_with_scratch(line, &mut scratch);
            }
            for k in 0..n {
                let row = &mut chunk[k * stride + j0..k * stride + j0 + g];
                for (j, v) in row.iter_mut().enumerate() {
                    *v = lines[j * n + k];
                }
            }
        }
    }
}

/// Angular frequency of DFT bin `j` on an axis of `n` samples and length
/// `extent`; bins at and above `n/2` are negative.
pub fn bin_frequency(j: usize, n: usize, extent: f64) -> f64 {
    let m = if j < n.div_ceil(2) {
        j as f64
    } else {
        j as f64 - n as f64
    };
    2.0 * PI * m / extent
}

/// Frequencies of every bin along each axis.
pub fn axis_frequencies(field: &SampledField) -> Vec<Vec<f64>> {
    field
        .shape()
        .iter()
        .zip(field.extents())
        .map(|(&n, &e)| (0..n).map(|j| bin_frequency(j, n, e)).collect())
        .collect()
}

/// `f̂(ξ) ≈ (2π)^{-D/2} h^D Σ f(x) e^{-i⟨x-x0, ξ⟩}`, sampled at the DFT bins.
/// With the spectral cell `Π 2π/L_a` this satisfies discrete Parseval.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub shape: Vec<usize>,
    pub extents: Vec<f64>,
    pub data: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(field: &SampledField) -> Self {
        let mut data = field.data().to_vec();
        fft_nd(&mut data, field.shape(), FftDirection::Forward);
        let d = field.ndim() as i32;
        let scale = field.cell_volume() * (2.0 * PI).powf(-0.5 * d as f64);
        for z in &mut data {
            *z *= scale;
        }
        Self {
            shape: field.shape().to_vec(),
            extents: field.extents().to_vec(),
            data,
        }
    }

    pub fn cell_volume(&self) -> f64 {
        self.extents.iter().map(|e| 2.0 * PI / e).product()
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_volume()
    }

    /// Inverse of [`Spectrum::of`].
    pub fn to_field(&self, origin: &[f64]) -> crate::error::Result<SampledField> {
        let mut data = self.data.clone();
        fft_nd(&mut data, &self.shape, FftDirection::Inverse);
        let n: usize = self.shape.iter().product();
        let h: f64 = self
            .shape
            .iter()
            .zip(&self.extents)
            .map(|(&k, &e)| e / k as f64)
            .product();
        let d = self.shape.len() as f64;
        let scale = (2.0 * PI).powf(0.5 * d) / (h * n as f64);
        for z in &mut data {
            *z *= scale;
        }
        SampledField::from_data(&self.shape, &self.extents, origin, data)
    }
}
