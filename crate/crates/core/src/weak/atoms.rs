//! `(p, ν)`-atoms on sampled grids: a bump on the cube times a seeded random
//! polynomial, with every moment of order `≤ ν` projected out in the
//! bump-weighted inner product.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::linalg::solve_dense;
use crate::operator::SampledField;

/// Smallest admissible moment order `⌈D(1/p − 1)⌉` in `ℝ^D`.
pub fn min_moment_order(p: f64, dim: usize) -> Result<usize> {
    if !(p > 0.0 && p < 1.0) {
        return Err(LabError::Domain(format!("p must lie in (0, 1), got {p}")));
    }
    Ok((dim as f64 * (1.0 / p - 1.0) - 1e-9).ceil().max(0.0) as usize)
}

/// All multi-indices in `dim` variables with total degree `≤ max`.
pub fn multi_indices(dim: usize, max: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == dim {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(dim, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, max, &mut Vec::new(), &mut out);
    out.sort_by_key(|a| a.iter().sum::<usize>());
    out
}

fn monomial(u: &[f64], alpha: &[usize]) -> f64 {
    u.iter().zip(alpha).map(|(x, &k)| x.powi(k as i32)).product()
}

#[derive(Clone, Debug)]
pub struct Atom {
    pub p: f64,
    pub nu: usize,
    pub center: Vec<f64>,
    /// Side length of the cube `Q`.
    pub diameter: f64,
    pub values: SampledField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtomReport {
    /// `max |a| / |Q|^{-1/p}`.
    pub size_ratio: f64,
    /// Largest `|∫ a (x - x0)^α| / (|Q|^{-1/p + |α|/D} |Q|)` over `|α| ≤ ν`.
    pub moment_error: f64,
    pub l2_norm: f64,
    pub support_points: usize,
}

/// Grid index range strictly inside `(c - s/2, c + s/2)` along one axis.
fn inner_range(field: &SampledField, axis: usize, c: f64, s: f64) -> (usize, usize) {
    let h = field.spacing(axis);
    let o = field.origin()[axis];
    let n = field.shape()[axis];
    let lo = ((c - 0.5 * s - o) / h).floor() as i64 + 1;
    let hi = ((c + 0.5 * s - o) / h).ceil() as i64 - 1;
    let lo = lo.max(0) as usize;
    let hi = hi.min(n as i64 - 1);
    if hi < lo as i64 {
        (lo, lo)
    } else {
        (lo, hi as usize + 1)
    }
}

fn cube_points(field: &SampledField, center: &[f64], side: f64) -> Vec<usize> {
    let ranges: Vec<(usize, usize)> = (0..field.ndim())
        .map(|a| inner_range(field, a, center[a], side))
        .collect();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    if ranges.iter().any(|r| r.1 <= r.0) {
        return out;
    }
    loop {
        let i = field.ravel(&idx);
        let y = field.point(i);
        if y.iter().zip(center).all(|(v, c)| (v - c).abs() < 0.5 * side) {
            out.push(i);
        }
        let mut a = field.ndim();
        loop {
            if a == 0 {
                return out;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < ranges[a].1 {
                break;
            }
            idx[a] = ranges[a].0;
        }
    }
}

/// Builds an atom on the grid of `template`. The cube has side `diameter`
/// and center `center`; only grid points strictly inside it carry values.
pub fn make_atom(template: &SampledField, p: f64, nu: usize, center: &[f64], diameter: f64, seed: u64) -> Result<Atom> {
    let dim = template.ndim();
    let need = min_moment_order(p, dim)?;
    if nu < need {
        return Err(LabError::Domain(format!(
            "ν = {nu} is below (d+1)(1/p-1), need at least {need}"
        )));
    }
    if center.len() != dim || !(diameter > 0.0) {
        return Err(LabError::Input(format!(
            "bad cube: center {center:?}, diameter {diameter}"
        )));
    }
    let points = cube_points(template, center, diameter);
    let per_axis = (0..dim)
        .map(|a| {
            let (lo, hi) = inner_range(template, a, center[a], diameter);
            hi - lo
        })
        .min()
        .unwrap_or(0);
    if per_axis < nu + 1 {
        let h = (0..dim).map(|a| template.spacing(a)).fold(0.0, f64::max);
        return Err(LabError::Resolution {
            what: format!(
                "an atom of diameter {diameter} with {}-th order moments (grid spacing {h})",
                nu
            ),
            required: nu + 1,
            limit: per_axis,
        });
    }

    let basis = multi_indices(dim, nu);
    let poly = multi_indices(dim, nu + 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = poly.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();

    let us: Vec<Vec<f64>> = points
        .iter()
        .map(|&i| {
            template
                .point(i)
                .iter()
                .zip(center)
                .map(|(y, c)| 2.0 * (y - c) / diameter)
                .collect()
        })
        .collect();
    let weight: Vec<f64> = us
        .iter()
        .map(|u| u.iter().map(|x| (-1.0 / (1.0 - x * x)).exp()).product())
        .collect();
    let monos: Vec<Vec<f64>> = us
        .iter()
        .map(|u| basis.iter().map(|a| monomial(u, a)).collect())
        .collect();
    let raw: Vec<f64> = us
        .iter()
        .zip(&weight)
        .map(|(u, w)| w * poly.iter().zip(&coeffs).map(|(a, c)| c * monomial(u, a)).sum::<f64>())
        .collect();

    let m = basis.len();
    let mut gram = vec![0.0; m * m];
    for (mono, w) in monos.iter().zip(&weight) {
        for i in 0..m {
            for j in 0..m {
                gram[i * m + j] += w * mono[i] * mono[j];
            }
        }
    }
    let moments = |vals: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (mono, v) in monos.iter().zip(vals) {
            for (o, b) in out.iter_mut().zip(mono) {
                *o += v * b;
            }
        }
        out
    };
    let mut vals = raw.clone();
    // two sweeps: the second removes the rounding left by the first
    for _ in 0..2 {
        let c = solve_dense(gram.clone(), moments(&vals))
            .ok_or_else(|| LabError::Retry("singular weighted Gram matrix".into()))?;
        for ((v, mono), w) in vals.iter_mut().zip(&monos).zip(&weight) {
            *v -= w * mono.iter().zip(&c).map(|(b, k)| b * k).sum::<f64>();
        }
    }

    let peak = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let raw_peak = raw.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !(peak > 1e-8 * raw_peak) {
        return Err(LabError::Retry(format!("seed {seed} leaves a near-zero atom")));
    }
    let volume = diameter.powi(dim as i32);
    let scale = volume.powf(-1.0 / p) / peak;
    let mut field = SampledField::zeros(template.shape(), template.extents(), template.origin())?;
    for (&i, v) in points.iter().zip(&vals) {
        field.data_mut()[i] = Complex64::new(v * scale, 0.0);
    }
    Ok(Atom {
        p,
        nu,
        center: center.to_vec(),
        diameter,
        values: field,
    })
}

impl Atom {
    pub fn volume(&self) -> f64 {
        self.diameter.powi(self.values.ndim() as i32)
    }

    /// Size and moment conditions measured on the grid.
    pub fn check(&self) -> AtomReport {
        let dim = self.values.ndim();
        let vol = self.volume();
        let bound = vol.powf(-1.0 / self.p);
        let cell = self.values.cell_volume();
        let basis = multi_indices(dim, self.nu);
        let mut mom = vec![0.0; basis.len()];
        let mut peak = 0.0f64;
        let mut support = 0;
        for (i, z) in self.values.data().iter().enumerate() {
            if z.norm() == 0.0 {
                continue;
            }
            support += 1;
            peak = peak.max(z.norm());
            let y: Vec<f64> = self
                .values
                .point(i)
                .iter()
                .zip(&self.center)
                .map(|(a, c)| a - c)
                .collect();
            for (m, a) in mom.iter_mut().zip(&basis) {
                *m += z.re * monomial(&y, a) * cell;
            }
        }
        let moment_error = basis
            .iter()
            .zip(&mom)
            .map(|(a, m)| {
                let k = a.iter().sum::<usize>() as f64;
                m.abs() / (vol.powf(-1.0 / self.p + k / dim as f64) * vol)
            })
            .fold(0.0, f64::max);
        AtomReport {
            size_ratio: peak / bound,
            moment_error,
            l2_norm: self.values.l2_norm(),
            support_points: support,
        }
    }

    /// `b(y) = 𝔡^{D/p} a(x0 + 𝔡 y)`: the same samples on a grid shrunk by
    /// `𝔡` around the center, an atom on the unit cube at the origin.
    pub fn rescaled_to_unit(&self) -> Result<Atom> {
        let dim = self.values.ndim();
        let dd = self.diameter;
        let extents: Vec<f64> = self.values.extents().iter().map(|e| e / dd).collect();
        let origin: Vec<f64> = self
            .values
            .origin()
            .iter()
            .zip(&self.center)
            .map(|(o, c)| (o - c) / dd)
            .collect();
        let factor = dd.powf(dim as f64 / self.p);
        let data = self.values.data().iter().map(|z| z * factor).collect();
        Ok(Atom {
            p: self.p,
            nu: self.nu,
            center: vec![0.0; dim],
            diameter: 1.0,
            values: SampledField::from_data(self.values.shape(), &extents, &origin, data)?,
        })
    }
}
