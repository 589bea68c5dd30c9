//! Complex samples on a uniform box in `ℝ^D`, row-major with the last axis
//! fastest. For space-time fields the first `d` axes are `x` and the last
//! is `t`.

use num_complex::Complex64;

use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    shape: Vec<usize>,
    extents: Vec<f64>,
    origin: Vec<f64>,
    data: Vec<Complex64>,
}

impl SampledField {
    pub fn zeros(shape: &[usize], extents: &[f64], origin: &[f64]) -> Result<Self> {
        if shape.is_empty() || shape.len() != extents.len() || shape.len() != origin.len() {
            return Err(LabError::Shape(format!(
                "shape {shape:?}, extents {extents:?} and origin {origin:?} disagree"
            )));
        }
        if shape.contains(&0) {
            return Err(LabError::Shape(format!("empty axis in shape {shape:?}")));
        }
        if extents.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(LabError::Shape(format!("extents must be positive, got {extents:?}")));
        }
        let len = shape.iter().product();
        Ok(Self {
            shape: shape.to_vec(),
            extents: extents.to_vec(),
            origin: origin.to_vec(),
            data: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn from_data(shape: &[usize], extents: &[f64], origin: &[f64], data: Vec<Complex64>) -> Result<Self> {
        let mut f = Self::zeros(shape, extents, origin)?;
        if data.len() != f.data.len() {
            return Err(LabError::Shape(format!("{} samples for shape {shape:?}", data.len())));
        }
        f.data = data;
        Ok(f)
    }

    /// Samples `g` at the grid points.
    pub fn from_fn(
        shape: &[usize],
        extents: &[f64],
        origin: &[f64],
        mut g: impl FnMut(&[f64]) -> Complex64,
    ) -> Result<Self> {
        let mut f = Self::zeros(shape, extents, origin)?;
        let mut p = vec![0.0; shape.len()];
        for i in 0..f.data.len() {
            f.point_into(i, &mut p);
            f.data[i] = g(&p);
        }
        Ok(f)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extents[axis] / self.shape[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.ndim()).map(|a| self.spacing(a)).product()
    }

    /// Multi-index of flat position `i`.
    pub fn unravel(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.ndim()];
        for a in (0..self.ndim()).rev() {
            idx[a] = i % self.shape[a];
            i /= self.shape[a];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    fn point_into(&self, mut i: usize, out: &mut [f64]) {
        for a in (0..self.ndim()).rev() {
            let k = i % self.shape[a];
            i /= self.shape[a];
            out[a] = self.origin[a] + k as f64 * self.spacing(a);
        }
    }

    /// Physical coordinates of flat position `i`.
    pub fn point(&self, i: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.ndim()];
        self.point_into(i, &mut p);
        p
    }

    /// `(Σ |f|² · cell volume)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_volume()).sqrt()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.shape == other.shape && self.extents == other.extents && self.origin == other.origin
    }

    /// `a·self + b·other` on a shared grid.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(LabError::Shape("fields live on different grids".into()));
        }
        let mut out = self.clone();
        for (o, y) in out.data.iter_mut().zip(&other.data) {
            *o = a * *o + b * y;
        }
        Ok(out)
    }

    /// Periodic shift by whole cells: `out[i + s] = self[i]`.
    pub fn roll(&self, shift: &[isize]) -> Result<Self> {
        if shift.len() != self.ndim() {
            return Err(LabError::Shape(format!(
                "shift {shift:?} for a {}-d field",
                self.ndim()
            )));
        }
        let mut out = self.clone();
        for i in 0..self.data.len() {
            let idx = self.unravel(i);
            let moved: Vec<usize> = idx
                .iter()
                .zip(shift)
                .zip(&self.shape)
                .map(|((&k, &s), &n)| (k as isize + s).rem_euclid(n as isize) as usize)
                .collect();
            out.data[self.ravel(&moved)] = self.data[i];
        }
        Ok(out)
    }

    /// Zero-extends each axis by `factor` beyond the far end of the box,
    /// keeping the spacing and origin.
    pub fn padded(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(LabError::Input("padding factor must be at least 1".into()));
        }
        let shape: Vec<usize> = self.shape.iter().map(|n| n * factor).collect();
        let extents: Vec<f64> = self.extents.iter().map(|e| e * factor as f64).collect();
        let mut out = Self::zeros(&shape, &extents, &self.origin)?;
        for i in 0..self.data.len() {
            let idx = self.unravel(i);
            let j = out.ravel(&idx);
            out.data[j] = self.data[i];
        }
        Ok(out)
    }

    /// The leading `shape` block of a padded field, on `extents`.
    pub fn cropped(&self, shape: &[usize], extents: &[f64]) -> Result<Self> {
        if shape.len() != self.ndim() || shape.iter().zip(&self.shape).any(|(a, b)| a > b) {
            return Err(LabError::Shape(format!("cannot crop {:?} to {shape:?}", self.shape)));
        }
        let mut out = Self::zeros(shape, extents, &self.origin)?;
        for i in 0..out.data.len() {
            let idx = out.unravel(i);
            out.data[i] = self.data[self.ravel(&idx)];
        }
        Ok(out)
    }
}
