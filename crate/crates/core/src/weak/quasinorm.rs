//! Distribution functions and weak-`L^p` quasinorms of sampled fields.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::linalg::norm;
use crate::operator::SampledField;

/// Where the level sets are measured.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Full,
    /// The dual cone `|t| ≥ γ|x|`, with `t` the last coordinate.
    Cone {
        gamma: f64,
    },
}

impl Region {
    pub fn contains(&self, point: &[f64]) -> bool {
        match *self {
            Region::Full => true,
            Region::Cone { gamma } => {
                let (x, t) = point.split_at(point.len() - 1);
                t[0].abs() >= gamma * norm(x)
            }
        }
    }
}

/// `|{|g| > λ}|` by cell counting.
pub fn distribution_function(g: &SampledField, lambda: f64) -> f64 {
    g.data().iter().filter(|z| z.norm() > lambda).count() as f64 * g.cell_volume()
}

/// `max · 2^{-k/per_octave}` for `k = 0..=octaves·per_octave`, decreasing.
pub fn lambda_grid(max: f64, octaves: usize, per_octave: usize) -> Vec<f64> {
    (0..=octaves * per_octave)
        .map(|k| max * 2f64.powf(-(k as f64) / per_octave as f64))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakLpReport {
    pub p: f64,
    pub lambdas: Vec<f64>,
    pub distribution: Vec<f64>,
    pub quasinorm: f64,
    pub lambda_argmax: f64,
    pub max_abs: f64,
}

/// Level-set measures of nonnegative samples, each cell of volume `cell`.
pub struct Magnitudes {
    sorted: Vec<f64>,
    cell: f64,
}

impl Magnitudes {
    pub fn new(mut values: Vec<f64>, cell: f64) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self { sorted: values, cell }
    }

    pub fn of_field(g: &SampledField, region: Region) -> Self {
        let vals = g
            .data()
            .iter()
            .enumerate()
            .filter(|(i, _)| region == Region::Full || region.contains(&g.point(*i)))
            .map(|(_, z)| z.norm())
            .collect();
        Self::new(vals, g.cell_volume())
    }

    pub fn max(&self) -> f64 {
        self.sorted.first().copied().unwrap_or(0.0)
    }

    pub fn measure_above(&self, lambda: f64) -> f64 {
        self.sorted.partition_point(|&v| v > lambda) as f64 * self.cell
    }

    /// `sup_λ λ |{g > λ}|^{1/p}` over `lambdas`, which must reach at least six
    /// octaves below the maximum.
    pub fn weak_quasinorm(&self, p: f64, lambdas: &[f64]) -> Result<WeakLpReport> {
        if !(p > 0.0 && p < 1.0) {
            return Err(LabError::Domain(format!("p must lie in (0, 1), got {p}")));
        }
        let max = self.max();
        let low = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
        if max > 0.0 && !(low <= max / 64.0) {
            return Err(LabError::Input(format!(
                "λ grid bottoms out at {low}, less than six octaves below max |g| = {max}"
            )));
        }
        let distribution: Vec<f64> = lambdas.iter().map(|&l| self.measure_above(l)).collect();
        let (mut quasinorm, mut lambda_argmax) = (0.0, lambdas.first().copied().unwrap_or(0.0));
        for (&l, &m) in lambdas.iter().zip(&distribution) {
            let v = l * m.powf(1.0 / p);
            if v > quasinorm {
                quasinorm = v;
                lambda_argmax = l;
            }
        }
        Ok(WeakLpReport {
            p,
            lambdas: lambdas.to_vec(),
            distribution,
            quasinorm,
            lambda_argmax,
            max_abs: max,
        })
    }
}

/// Quasinorm with the default λ grid: 12 octaves at 8 per octave below
/// `max |g|`.
pub fn weak_quasinorm(g: &SampledField, p: f64, region: Region) -> Result<WeakLpReport> {
    let m = Magnitudes::of_field(g, region);
    m.weak_quasinorm(p, &lambda_grid(m.max(), 12, 8))
}
