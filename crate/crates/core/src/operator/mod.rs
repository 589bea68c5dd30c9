//! The cone multiplier `T^δ` with symbol `(1 - ρ(ξ)/|τ|)_+^δ` and its
//! dyadic pieces `T^δ_l`, applied on periodic grids through the DFT.

pub mod fft;
pub mod field;
pub mod io;
pub mod selftest;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;

use crate::error::{LabError, Result};
use crate::geometry::DistanceFunction;
use crate::kernel::{make_windows, SmoothWindow};

pub use fft::{axis_frequencies, bin_frequency, fft_nd, Spectrum};
pub use field::SampledField;
pub use selftest::{operator_selftest, SelftestReport};

/// `δ(p) = d(1/p - 1/2) - 1/2`.
pub fn delta_critical(p: f64, d: usize) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(LabError::Domain(format!("p must lie in (0, 1), got {p}")));
    }
    if d < 2 {
        return Err(LabError::Domain(format!("dimension must be at least 2, got {d}")));
    }
    Ok(d as f64 * (1.0 / p - 0.5) - 0.5)
}

#[derive(Clone, Debug)]
pub struct ConeSymbol {
    pub delta: f64,
    pub level: Option<i32>,
    df: DistanceFunction,
    psi: SmoothWindow,
}

impl ConeSymbol {
    pub fn new(df: &DistanceFunction, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(LabError::Domain(format!("delta must be positive, got {delta}")));
        }
        Ok(Self {
            delta,
            level: None,
            df: df.clone(),
            psi: make_windows().0,
        })
    }

    pub fn with_level(mut self, l: i32) -> Self {
        self.level = Some(l);
        self
    }

    pub fn df(&self) -> &DistanceFunction {
        &self.df
    }

    fn from_rho(&self, rho: f64, tau: f64) -> f64 {
        let a = tau.abs();
        let base = if a == 0.0 {
            // continuity along rays through the origin
            if rho == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            let v = 1.0 - rho / a;
            if v > 0.0 {
                v.powf(self.delta)
            } else {
                0.0
            }
        };
        match self.level {
            Some(l) if base != 0.0 => base * self.psi.eval(2f64.powi(-l) * a),
            _ => base,
        }
    }

    pub fn eval(&self, xi: &[f64], tau: f64) -> Result<f64> {
        let rho = if xi.iter().all(|&v| v == 0.0) {
            0.0
        } else {
            self.df.rho(xi)?
        };
        Ok(self.from_rho(rho, tau))
    }
}

/// Multiplies the DFT of `f` by the symbol at the grid frequencies and
/// transforms back. The last axis is `t`.
pub fn apply_symbol(sym: &ConeSymbol, f: &SampledField) -> Result<SampledField> {
    let d = sym.df.dim();
    if f.ndim() != d + 1 {
        return Err(LabError::Shape(format!(
            "a {d}-dimensional gauge needs a {}-dimensional field, got {}",
            d + 1,
            f.ndim()
        )));
    }
    let shape = f.shape().to_vec();
    let freqs = axis_frequencies(f);
    let nt = shape[d];
    let mut data = f.data().to_vec();
    fft_nd(&mut data, &shape, FftDirection::Forward);
    let norm = 1.0 / data.len() as f64;
    let row_shape = &shape[..d];
    data.par_chunks_mut(nt)
        .enumerate()
        .try_for_each(|(row, chunk)| -> Result<()> {
            let mut rem = row;
            let mut xi = vec![0.0; d];
            for a in (0..d).rev() {
                xi[a] = freqs[a][rem % row_shape[a]];
                rem /= row_shape[a];
            }
            let rho = if xi.iter().all(|&v| v == 0.0) {
                0.0
            } else {
                sym.df.rho(&xi)?
            };
            for (z, &tau) in chunk.iter_mut().zip(&freqs[d]) {
                *z *= sym.from_rho(rho, tau) * norm;
            }
            Ok(())
        })?;
    fft_nd(&mut data, &shape, FftDirection::Inverse);
    SampledField::from_data(&shape, f.extents(), f.origin(), data)
}

/// `T^δ f` on the periodic grid of `f`.
pub fn apply_t(sym: &ConeSymbol, f: &SampledField) -> Result<SampledField> {
    let mut s = sym.clone();
    s.level = None;
    apply_symbol(&s, f)
}

/// `T^δ_l f`, the symbol times `ψ(2^{-l}|τ|)`.
pub fn apply_tl(sym: &ConeSymbol, l: i32, f: &SampledField) -> Result<SampledField> {
    apply_symbol(&sym.clone().with_level(l), f)
}

/// Applies the symbol on a grid zero-padded by `factor ≥ 2` in every axis
/// and returns the original box.
pub fn apply_padded(sym: &ConeSymbol, f: &SampledField, factor: usize) -> Result<SampledField> {
    if factor < 2 {
        return Err(LabError::Input(format!(
            "padding factor must be at least 2, got {factor}"
        )));
    }
    let big = apply_symbol(sym, &f.padded(factor)?)?;
    big.cropped(f.shape(), f.extents())
}

/// A single DFT mode `exp(i⟨k, x⟩)` with integer bin indices `bins`.
pub fn fourier_mode(shape: &[usize], extents: &[f64], origin: &[f64], bins: &[usize]) -> Result<SampledField> {
    let freqs: Vec<f64> = bins
        .iter()
        .zip(shape)
        .zip(extents)
        .map(|((&j, &n), &e)| bin_frequency(j, n, e))
        .collect();
    SampledField::from_fn(shape, extents, origin, |p| {
        let phase: f64 = p.iter().zip(origin).zip(&freqs).map(|((x, o), k)| (x - o) * k).sum();
        Complex64::from_polar(1.0, phase)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{KernelLab, Localization};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(shape: &[usize], extents: &[f64], seed: u64) -> SampledField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SampledField::from_fn(shape, extents, &vec![0.0; shape.len()], |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .unwrap()
    }

    #[test]
    fn critical_index() {
        assert_eq!(delta_critical(0.5, 2).unwrap(), 2.5);
        assert_eq!(delta_critical(2.0 / 3.0, 2).unwrap(), 1.5);
        assert!((delta_critical(1.0 - 1e-12, 3).unwrap() - 1.0).abs() < 1e-10);
        assert!(delta_critical(1.0, 2).is_err());
        assert!(delta_critical(0.5, 1).is_err());
    }

    #[test]
    fn symbol_values() {
        let df = DistanceFunction::lq(4, 2).unwrap();
        let s = ConeSymbol::new(&df, 2.0).unwrap();
        assert_eq!(s.eval(&[1.0, 0.0], 1.0).unwrap(), 0.0);
        assert_eq!(s.eval(&[0.0, 0.0], 1.0).unwrap(), 1.0);
        assert!((s.eval(&[0.5, 0.0], -1.0).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(s.eval(&[0.0, 0.0], 0.0).unwrap(), 1.0);
        assert_eq!(s.eval(&[0.1, 0.0], 0.0).unwrap(), 0.0);
        let sl = s.clone().with_level(0);
        assert_eq!(sl.eval(&[0.0, 0.0], 0.0).unwrap(), 0.0);
        assert!(sl.eval(&[0.0, 0.0], 4.0).unwrap() == 0.0);
    }

    #[test]
    fn single_mode_is_scaled_exactly() {
        let df = DistanceFunction::lq(4, 2).unwrap();
        let sym = ConeSymbol::new(&df, 1.5).unwrap();
        let (shape, ext) = ([16, 16, 32], [16.0, 16.0, 8.0]);
        for bins in [[1usize, 2, 3], [15, 0, 30], [3, 3, 5], [0, 0, 0]] {
            let f = fourier_mode(&shape, &ext, &[0.0; 3], &bins).unwrap();
            let xi: Vec<f64> = (0..2).map(|a| bin_frequency(bins[a], shape[a], ext[a])).collect();
            let m = sym.eval(&xi, bin_frequency(bins[2], 32, 8.0)).unwrap();
            let g = apply_t(&sym, &f).unwrap();
            for (a, b) in g.data().iter().zip(f.data()) {
                assert!((a - m * b).norm() < 1e-12, "bins {bins:?}");
            }
        }
    }

    #[test]
    fn linear_contractive_and_translation_equivariant() {
        let df = DistanceFunction::euclidean(2).unwrap();
        let sym = ConeSymbol::new(&df, 2.5).unwrap();
        let (shape, ext) = ([8, 8, 16], [4.0, 4.0, 8.0]);
        let f = random_field(&shape, &ext, 1);
        let g = random_field(&shape, &ext, 2);
        let (a, b) = (Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.5));
        let lhs = apply_t(&sym, &f.combine(a, &g, b).unwrap()).unwrap();
        let rhs = apply_t(&sym, &f)
            .unwrap()
            .combine(a, &apply_t(&sym, &g).unwrap(), b)
            .unwrap();
        for (x, y) in lhs.data().iter().zip(rhs.data()) {
            assert!((x - y).norm() < 1e-12);
        }
        let tf = apply_t(&sym, &f).unwrap();
        assert!(tf.l2_norm() <= f.l2_norm() * (1.0 + 1e-12));
        let shifted = apply_t(&sym, &f.roll(&[1, -2, 3]).unwrap()).unwrap();
        let expect = tf.roll(&[1, -2, 3]).unwrap();
        for (x, y) in shifted.data().iter().zip(expect.data()) {
            assert!((x - y).norm() < 1e-12);
        }
        let zero = SampledField::zeros(&shape, &ext, &[0.0; 3]).unwrap();
        assert!(apply_t(&sym, &zero).unwrap().data().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn dyadic_pieces_telescope() {
        let df = DistanceFunction::lq(4, 2).unwrap();
        let sym = ConeSymbol::new(&df, 1.5).unwrap();
        let (shape, ext) = ([8, 8, 64], [8.0, 8.0, 2.0 * std::f64::consts::PI * 8.0]);
        // τ bins j/8 for j in 2..=24 cover [1/4, 3] ⊂ [2^{-L+2}, 2^{L-2}] with L = 4
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut f = SampledField::zeros(&shape, &ext, &[0.0; 3]).unwrap();
        for _ in 0..12 {
            let j: usize = rng.gen_range(2..=24);
            let bins = [
                rng.gen_range(0..8),
                rng.gen_range(0..8),
                if rng.gen_bool(0.5) { j } else { 64 - j },
            ];
            let m = fourier_mode(&shape, &ext, &[0.0; 3], &bins).unwrap();
            f = f
                .combine(Complex64::new(1.0, 0.0), &m, Complex64::new(rng.gen(), rng.gen()))
                .unwrap();
        }
        let whole = apply_t(&sym, &f).unwrap();
        let mut sum = SampledField::zeros(&shape, &ext, &[0.0; 3]).unwrap();
        for l in -4..=4 {
            let piece = apply_tl(&sym, l, &f).unwrap();
            sum = sum
                .combine(Complex64::new(1.0, 0.0), &piece, Complex64::new(1.0, 0.0))
                .unwrap();
        }
        let scale = whole.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (x, y) in sum.data().iter().zip(whole.data()) {
            assert!((x - y).norm() <= 1e-8 * scale);
        }
        // a band in (1/2, 2) is invisible at level 5
        let band = fourier_mode(&shape, &ext, &[0.0; 3], &[1, 1, 8]).unwrap();
        assert!(apply_tl(&sym, 5, &band).unwrap().l2_norm() < 1e-14);
    }

    #[test]
    fn impulse_response_matches_kernel_quadrature() {
        let df = DistanceFunction::euclidean(2).unwrap();
        let sym = ConeSymbol::new(&df, 1.5).unwrap().with_level(0);
        let (shape, ext) = ([64, 64, 64], [64.0, 64.0, 64.0]);
        let origin = [-32.0, -32.0, -32.0];
        let mut f = SampledField::zeros(&shape, &ext, &origin).unwrap();
        let center = f.ravel(&[32, 32, 32]);
        f.data_mut()[center] = Complex64::new(1.0 / f.cell_volume(), 0.0);
        let g = apply_symbol(&sym, &f).unwrap();
        let lab = KernelLab::new(&df).unwrap();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for idx in [
            [32, 32, 32],
            [33, 32, 32],
            [32, 34, 33],
            [35, 32, 35],
            [32, 32, 36],
            [30, 33, 29],
        ] {
            let p = g.point(g.ravel(&idx));
            let k = lab.eval_level(1.5, 0, Localization::Full, &p[..2], p[2]).unwrap().value;
            let v = g.data()[g.ravel(&idx)];
            worst = worst.max((v - k).norm());
            scale = scale.max(k.norm());
        }
        assert!(worst <= 1e-3 * scale, "{worst} vs {scale}");
    }
}
