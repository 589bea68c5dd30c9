//! `T^δ` applied to atoms of shrinking diameter on a fixed periodic grid,
//! with weak quasinorms on the dual cone and on the whole window.

use serde::Serialize;

use super::atoms::{make_atom, min_moment_order};
use super::quasinorm::{lambda_grid, Magnitudes, Region};
use crate::error::{LabError, Result};
use crate::geometry::{gamma_sup, DistanceFunction};
use crate::operator::{apply_padded, ConeSymbol, SampledField};
use crate::regression::mann_kendall;

#[derive(Clone, Debug, Serialize)]
pub struct WeakTypeConfig {
    pub p: f64,
    pub delta: f64,
    pub scales: Vec<u32>,
    /// Points per axis of the periodic grid, padding included.
    pub grid: usize,
    pub pad: usize,
    /// Side of the measured window, centered at the origin.
    pub window: f64,
    /// Atom diameter at `j = 0`; scale `j` uses `diameter0 · 2^{-j}`.
    pub diameter0: f64,
    pub nu: Option<usize>,
    pub seed: u64,
    pub octaves: usize,
    pub per_octave: usize,
}

impl WeakTypeConfig {
    pub fn new(p: f64, delta: f64) -> Self {
        Self {
            p,
            delta,
            scales: (0..=5).collect(),
            grid: 256,
            pad: 2,
            window: 1.0,
            diameter0: 1.0,
            nu: None,
            seed: 20,
            octaves: 12,
            per_octave: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakTypeRow {
    pub p: f64,
    pub delta: f64,
    pub j: u32,
    pub diameter: f64,
    pub quasinorm_cone: f64,
    pub quasinorm_full: f64,
    /// λ attaining the full-window quasinorm.
    pub lambda_argmax: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakTypeReport {
    pub gamma: f64,
    pub nu: usize,
    pub rows: Vec<WeakTypeRow>,
    /// `max / min` over scales, full window and cone.
    pub ratio_full: f64,
    pub ratio_cone: f64,
    /// Last over first scale, full window.
    pub growth_full: f64,
    /// Every step non-decreasing, full window.
    pub monotone_full: bool,
    /// Mann–Kendall statistic and exact one-sided p-value over scales, full window.
    pub trend_s: i64,
    pub trend_p: f64,
}

fn spread(v: &[f64]) -> f64 {
    let hi = v.iter().copied().fold(0.0, f64::max);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

pub fn weak_type_experiment(df: &DistanceFunction, cfg: &WeakTypeConfig) -> Result<WeakTypeReport> {
    let d = df.dim();
    let dim = d + 1;
    if cfg.pad < 2 || !cfg.grid.is_multiple_of(cfg.pad) {
        return Err(LabError::Config(format!(
            "grid {} must be a multiple of a padding factor ≥ 2, got {}",
            cfg.grid, cfg.pad
        )));
    }
    if cfg.scales.is_empty() {
        return Err(LabError::Config("no atom scales requested".into()));
    }
    let nu = match cfg.nu {
        Some(n) => n,
        None => min_moment_order(cfg.p, dim)?,
    };
    let gamma = gamma_sup(df)?.gamma;
    let sym = ConeSymbol::new(df, cfg.delta)?;
    let m = cfg.grid / cfg.pad;
    let template = SampledField::zeros(&vec![m; dim], &vec![cfg.window; dim], &vec![-0.5 * cfg.window; dim])?;
    let lambdas_for = |max: f64| lambda_grid(max, cfg.octaves, cfg.per_octave);

    let mut rows = Vec::new();
    for &j in &cfg.scales {
        let diameter = cfg.diameter0 * 2f64.powi(-(j as i32));
        let atom = make_atom(&template, cfg.p, nu, &vec![0.0; dim], diameter, cfg.seed + j as u64)?;
        let g = apply_padded(&sym, &atom.values, cfg.pad)?;
        drop(atom);
        let full = Magnitudes::of_field(&g, Region::Full);
        let rf = full.weak_quasinorm(cfg.p, &lambdas_for(full.max()))?;
        drop(full);
        let cone = Magnitudes::of_field(&g, Region::Cone { gamma });
        let rc = cone.weak_quasinorm(cfg.p, &lambdas_for(cone.max()))?;
        rows.push(WeakTypeRow {
            p: cfg.p,
            delta: cfg.delta,
            j,
            diameter,
            quasinorm_cone: rc.quasinorm,
            quasinorm_full: rf.quasinorm,
            lambda_argmax: rf.lambda_argmax,
        });
    }
    let full: Vec<f64> = rows.iter().map(|r| r.quasinorm_full).collect();
    let cone: Vec<f64> = rows.iter().map(|r| r.quasinorm_cone).collect();
    let (trend_s, trend_p) = if full.len() >= 3 {
        let t = mann_kendall(&full)?;
        (t.s, t.p_increasing)
    } else {
        (0, 1.0)
    };
    Ok(WeakTypeReport {
        gamma,
        nu,
        ratio_full: spread(&full),
        ratio_cone: spread(&cone),
        growth_full: full[full.len() - 1] / full[0],
        monotone_full: full.windows(2).all(|w| w[1] >= w[0]),
        trend_s,
        trend_p,
        rows,
    })
}
