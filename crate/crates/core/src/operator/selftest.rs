//! Contract checks for the DFT operator on a cubic grid.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{apply_t, apply_tl, bin_frequency, fourier_mode, ConeSymbol, SampledField};
use crate::error::{LabError, Result};

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub grid: usize,
    /// `max |T e_k - m(k) e_k|` over the probed modes.
    pub mode_error: f64,
    /// `‖T f‖₂ / ‖f‖₂` for a random field.
    pub contraction: f64,
    /// `max |Σ_l T_l f - T f| / max |T f|` on a band-limited field.
    pub telescoping_error: f64,
    pub levels: (i32, i32),
}

/// `n` points in every axis. The spatial axes have extent `n` and the `t`
/// axis extent `16π`, so `τ` bin `j` sits at `j/8`.
pub fn operator_selftest(sym: &ConeSymbol, n: usize, seed: u64) -> Result<SelftestReport> {
    if n < 16 || !n.is_multiple_of(2) {
        return Err(LabError::Config(format!(
            "self-test grid must be even and at least 16, got {n}"
        )));
    }
    let dim = sym.df().dim() + 1;
    let mut ext = vec![n as f64; dim];
    ext[dim - 1] = 2.0 * std::f64::consts::PI * 8.0;
    let shape = vec![n; dim];
    let origin = vec![0.0; dim];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut mode_error: f64 = 0.0;
    for probe in 0..4 {
        let bins: Vec<usize> = if probe == 0 {
            vec![0; dim]
        } else {
            (0..dim).map(|_| rng.gen_range(0..n)).collect()
        };
        let f = fourier_mode(&shape, &ext, &origin, &bins)?;
        let xi: Vec<f64> = (0..dim - 1).map(|a| bin_frequency(bins[a], n, ext[a])).collect();
        let m = sym.eval(&xi, bin_frequency(bins[dim - 1], n, ext[dim - 1]))?;
        let g = apply_t(sym, &f)?;
        for (a, b) in g.data().iter().zip(f.data()) {
            mode_error = mode_error.max((a - m * b).norm());
        }
    }

    let f = SampledField::from_fn(&shape, &ext, &origin, |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })?;
    let contraction = apply_t(sym, &f)?.l2_norm() / f.l2_norm();

    // |τ| ∈ [1/4, 3], where ψ(2^{-l}·) for l ∈ [-4, 4] sums to 1
    let (lo, hi) = (2, 24.min(n / 2 - 1));
    let mut band = SampledField::zeros(&shape, &ext, &origin)?;
    for _ in 0..12 {
        let j = rng.gen_range(lo..=hi);
        // keep Σ|ξ_i| < |τ| so the mode is not annihilated by the symbol
        let reach = (j as f64 / 8.0 * n as f64 / (2.0 * std::f64::consts::PI * dim as f64)) as usize;
        let mut bins: Vec<usize> = (0..dim - 1)
            .map(|_| {
                let b = rng.gen_range(0..=reach);
                if b > 0 && rng.gen_bool(0.5) {
                    n - b
                } else {
                    b
                }
            })
            .collect();
        bins.push(if rng.gen_bool(0.5) { j } else { n - j });
        let m = fourier_mode(&shape, &ext, &origin, &bins)?;
        band = band.combine(Complex64::new(1.0, 0.0), &m, Complex64::new(rng.gen(), rng.gen()))?;
    }
    let whole = apply_t(sym, &band)?;
    let levels = (-4, 4);
    let mut sum = SampledField::zeros(&shape, &ext, &origin)?;
    for l in levels.0..=levels.1 {
        sum = sum.combine(
            Complex64::new(1.0, 0.0),
            &apply_tl(sym, l, &band)?,
            Complex64::new(1.0, 0.0),
        )?;
    }
    let scale = whole.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let telescoping_error = sum
        .data()
        .iter()
        .zip(whole.data())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale;
    Ok(SelftestReport {
        grid: n,
        mode_error,
        contraction,
        telescoping_error,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DistanceFunction;

    #[test]
    fn small_grid_passes() {
        let df = DistanceFunction::lq(4, 2).unwrap();
        let r = operator_selftest(&ConeSymbol::new(&df, 1.5).unwrap(), 32, 4).unwrap();
        assert!(
            r.mode_error < 1e-12 && r.contraction <= 1.0 + 1e-12 && r.telescoping_error < 1e-8,
            "{r:?}"
        );
        assert!(operator_selftest(&ConeSymbol::new(&df, 1.5).unwrap(), 15, 4).is_err());
    }
}
