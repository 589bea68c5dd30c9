//! Numerical checks of the kernel estimates: the dual-cone inequality, the
//! Córdoba piece bounds near the origin and the on-cone decay law.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::eval::{KernelLab, Localization};
use crate::caps::{default_r_grid, phi, CapGeometry};
use crate::error::{LabError, Result};
use crate::geometry::{parametrize_sphere, DistanceFunction};
use crate::linalg::{dot, norm};
use crate::operator::delta_critical;
use crate::regression::{fit_power_law, linear_fit, log_space};

/// Values below this fraction of the largest sample are treated as
/// rounding noise in tail fits.
const NOISE_FLOOR: f64 = 1e-13;

#[derive(Clone, Debug, Serialize)]
pub struct Lemma31Report {
    pub samples: usize,
    pub ball_nodes: usize,
    pub violations: usize,
    /// Smallest `inf_ξ |t + ⟨x,ξ⟩| - (|t| - γ|x|)` seen.
    pub worst_margin: f64,
}

/// Random points with `|t| ≥ γ|x|`, a tenth of them exactly on the cone.
pub fn cone_samples(d: usize, gamma: f64, count: usize, radius: f64, seed: u64) -> Vec<(Vec<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-radius..radius)).collect();
            let gap = if i % 10 == 0 { 0.0 } else { rng.gen_range(0.0..radius) };
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let t = sign * (gamma * norm(&x) + gap);
            (x, t)
        })
        .collect()
}

/// Sphere nodes scaled by `radial_steps` equispaced values of `ρ` in `[0, 1]`.
pub fn ball_nodes(df: &DistanceFunction, sphere_resolution: usize, radial_steps: usize) -> Result<Vec<Vec<f64>>> {
    let sphere = parametrize_sphere(df, sphere_resolution)?;
    let mut out = Vec::with_capacity(sphere.len() * radial_steps);
    for k in 0..radial_steps {
        let s = if radial_steps == 1 {
            1.0
        } else {
            k as f64 / (radial_steps - 1) as f64
        };
        for p in &sphere {
            out.push(p.position.iter().map(|v| s * v).collect());
        }
    }
    Ok(out)
}

pub fn lemma31_check(gamma: f64, samples: &[(Vec<f64>, f64)], ball: &[Vec<f64>]) -> Lemma31Report {
    let margins: Vec<f64> = samples
        .par_iter()
        .map(|(x, t)| {
            let inf = ball
                .iter()
                .map(|xi| (t + dot(x, xi)).abs())
                .fold(f64::INFINITY, f64::min);
            inf - (t.abs() - gamma * norm(x))
        })
        .collect();
    Lemma31Report {
        samples: samples.len(),
        ball_nodes: ball.len(),
        violations: margins.iter().filter(|&&m| m < -1e-10).count(),
        worst_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

#[derive(Clone, Debug)]
pub struct Lemma32Config {
    pub delta: f64,
    pub l: i32,
    pub n_tail: u32,
    pub ks: Vec<u32>,
    pub tail_k: u32,
    /// Sample points `(x, t)` with `|x| ≤ 2^{2-l}/γ`.
    pub grid: Vec<(Vec<f64>, f64)>,
}

impl Lemma32Config {
    pub fn new(lab: &KernelLab, delta: f64, l: i32) -> Self {
        Self {
            delta,
            l,
            n_tail: 3,
            ks: (4..=10).collect(),
            tail_k: 4,
            grid: lemma32_grid(lab.df().dim(), lab.gamma(), l),
        }
    }
}

/// The origin plus points at `|x| ∈ {1/4, 1/2, 1}·2^{2-l}/γ` along the
/// coordinate axes and the first diagonal, each at `2^l t ∈ {0, 1/2, 1}`.
pub fn lemma32_grid(d: usize, gamma: f64, l: i32) -> Vec<(Vec<f64>, f64)> {
    let s = 2f64.powi(-l);
    let bound = 4.0 * s / gamma;
    let mut dirs: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    dirs.push(vec![1.0 / (d as f64).sqrt(); d]);
    let mut grid = Vec::new();
    for t in [0.0, 0.5 * s, s] {
        grid.push((vec![0.0; d], t));
        for dir in &dirs {
            for f in [0.25, 0.5, 1.0] {
                grid.push((dir.iter().map(|v| v * f * bound).collect(), t));
            }
        }
    }
    grid
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma32Report {
    pub delta: f64,
    pub l: i32,
    /// `(k, max |K_{k,l}|)` over the grid.
    pub per_k: Vec<(u32, f64)>,
    /// Slope of `log2 max|K_{k,l}|` against `k`.
    pub k_slope: f64,
    pub k_r_squared: f64,
    /// `max_k max|K_{k,l}| / (2^{(d+1)l} 2^{-k(δ+1)})`.
    pub constant: f64,
    /// `(2^l |t|, |K_{tail_k,l}(0,t)|)` above the noise floor.
    pub tail: Vec<(f64, f64)>,
    pub tail_slope: f64,
    /// `max |K| (2^{-k} 2^l |t|)^N / (2^{(d+1)l} 2^{-k(δ+1)})` over the tail.
    pub tail_constant: f64,
}

pub fn lemma32_fit(lab: &KernelLab, cfg: &Lemma32Config) -> Result<Lemma32Report> {
    let d = lab.df().dim();
    let s = 2f64.powi(cfg.l);
    let amp = 2f64.powi((d as i32 + 1) * cfg.l);
    let bound = 4.0 / (s * lab.gamma());
    if let Some((x, _)) = cfg.grid.iter().find(|(x, _)| norm(x) > bound * (1.0 + 1e-12)) {
        return Err(LabError::Domain(format!(
            "sample |x| = {} exceeds 2^(2-l)/γ = {bound}",
            norm(x)
        )));
    }
    if cfg.ks.len() < 3 || cfg.ks.iter().max().unwrap() - cfg.ks.iter().min().unwrap() < 2 {
        return Err(LabError::DynamicRange(format!(
            "k range {:?} spans fewer than 2 octaves",
            cfg.ks
        )));
    }
    // evaluate at level 0 on the rescaled grid, batched by t
    let mut by_t: Vec<(f64, Vec<Vec<f64>>)> = Vec::new();
    for (x, t) in &cfg.grid {
        let xs: Vec<f64> = x.iter().map(|v| s * v).collect();
        match by_t.iter_mut().find(|(tt, _)| *tt == s * t) {
            Some((_, v)) => v.push(xs),
            None => by_t.push((s * t, vec![xs])),
        }
    }
    let per_k: Vec<(u32, f64)> = cfg
        .ks
        .par_iter()
        .map(|&k| {
            let mut best = 0.0f64;
            for (t, xs) in &by_t {
                for smp in lab.eval_batch(cfg.delta, 0, Localization::Piece(k), xs, *t, None)? {
                    best = best.max(amp * smp.value.norm());
                }
            }
            Ok((k, best))
        })
        .collect::<Result<_>>()?;
    let ks: Vec<f64> = per_k.iter().map(|p| p.0 as f64).collect();
    let logs: Vec<f64> = per_k.iter().map(|p| p.1.log2()).collect();
    let fit = linear_fit(&ks, &logs)?;
    let decay = |k: u32| amp * 2f64.powf(-(k as f64) * (cfg.delta + 1.0));
    let constant = per_k.iter().map(|&(k, m)| m / decay(k)).fold(0.0, f64::max);

    let k = cfg.tail_k;
    let ts = log_space(2f64.powi(k as i32 + 2), 2f64.powi(k as i32 + 6), 9);
    let head = amp
        * lab
            .eval_level(cfg.delta, 0, Localization::Piece(k), &vec![0.0; d], 0.0)?
            .value
            .norm();
    let raw: Vec<(f64, f64)> = ts
        .par_iter()
        .map(|&t| {
            let v = lab.eval_level(cfg.delta, 0, Localization::Piece(k), &vec![0.0; d], t)?;
            Ok((t, amp * v.value.norm()))
        })
        .collect::<Result<_>>()?;
    let tail: Vec<(f64, f64)> = raw.into_iter().filter(|&(_, v)| v > NOISE_FLOOR * head).collect();
    if tail.len() < 3 || tail.last().unwrap().0 / tail[0].0 < 4.0 {
        return Err(LabError::DynamicRange(format!(
            "t-tail at k = {k} falls below the noise floor within two octaves"
        )));
    }
    let tfit = fit_power_law(
        &tail.iter().map(|p| p.0).collect::<Vec<_>>(),
        &tail.iter().map(|p| p.1).collect::<Vec<_>>(),
    )?;
    let n = cfg.n_tail as i32;
    let tail_constant = tail
        .iter()
        .map(|&(t, v)| v * (2f64.powi(-(k as i32)) * t).powi(n) / decay(k))
        .fold(0.0, f64::max);
    Ok(Lemma32Report {
        delta: cfg.delta,
        l: cfg.l,
        per_k,
        k_slope: fit.slope,
        k_r_squared: fit.r_squared,
        constant,
        tail,
        tail_slope: tfit.slope,
        tail_constant,
    })
}

#[derive(Clone, Debug)]
pub struct ConeDecayConfig {
    pub p: f64,
    pub n_tail: u32,
    /// Left ends `R` of the shells `[R, 2R]`.
    pub shells: Vec<f64>,
    pub radii_per_shell: usize,
    pub directions: usize,
    /// Gaps `|t| - γ|x|` sampled inside the cone band for the shell maxima.
    pub band: Vec<f64>,
    /// Off-cone gaps `|t| - γ|x|` for the tail fit.
    pub tail_gaps: Vec<f64>,
}

impl ConeDecayConfig {
    pub fn new(p: f64) -> Self {
        Self {
            p,
            n_tail: 3,
            shells: vec![8.0, 16.0, 32.0, 64.0],
            radii_per_shell: 4,
            directions: 16,
            band: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            tail_gaps: log_space(16.0, 256.0, 9),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeDecayRow {
    pub shell: f64,
    pub direction: usize,
    pub abs_x: f64,
    pub gap: f64,
    pub kernel_abs: f64,
    pub phi_value: f64,
    /// `|K| (1 + gap)^N / Φ`.
    pub normalized: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeDecayReport {
    pub gauge: String,
    pub delta: f64,
    pub target_slope: f64,
    pub rows: Vec<ConeDecayRow>,
    /// `(R, max normalized value on [R, 2R])`.
    pub shell_max: Vec<(f64, f64)>,
    pub slope: f64,
    pub r_squared: f64,
    /// Slope from the samples with `|t| = γ|x|` exactly.
    pub exact_cone_slope: f64,
    /// `max |K| (1+gap)^N (1+|x|)^{-target} / Φ` over all rows.
    pub constant: f64,
    /// Largest shell that was evaluated; later shells were refused.
    pub max_feasible_r: f64,
    pub tail_direction: usize,
    pub tail_abs_x: f64,
    /// `(1 + |t| - γ|x|, |K|)`.
    pub tail: Vec<(f64, f64)>,
    pub tail_slope: f64,
}

/// Equally spaced plane directions; in higher dimensions, the first
/// `count` nodes of the product sphere rule.
fn directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    if d == 2 {
        return (0..count)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    let res = (count as f64).sqrt().ceil() as usize * 2;
    crate::geometry::unit_sphere_rule(d, res)
        .into_iter()
        .map(|(w, _)| w)
        .take(count)
        .collect()
}

pub fn cone_decay_fit(lab: &KernelLab, cfg: &ConeDecayConfig) -> Result<ConeDecayReport> {
    let df = lab.df();
    let d = df.dim();
    let delta = delta_critical(cfg.p, d)?;
    let target = -(delta + 1.0 + 0.5 * (d as f64 - 1.0));
    let gamma = lab.gamma();
    let dirs = directions(d, cfg.directions);
    let geom = CapGeometry::new(df)?;
    let r_grid = default_r_grid();
    let phis: Vec<f64> = dirs
        .par_iter()
        .map(|w| Ok(phi(&geom, w, &r_grid)?.value))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut shell_max = Vec::new();
    let mut max_feasible_r = 0.0;
    'shells: for &big_r in &cfg.shells {
        let radii: Vec<f64> = (0..cfg.radii_per_shell)
            .map(|i| big_r * 2f64.powf(i as f64 / cfg.radii_per_shell as f64))
            .collect();
        let jobs: Vec<(f64, f64)> = radii
            .iter()
            .flat_map(|&r| cfg.band.iter().map(move |&g| (r, g)))
            .collect();
        let evaluated: Vec<Result<Vec<ConeDecayRow>>> = jobs
            .par_iter()
            .map(|&(r, gap)| {
                let xs: Vec<Vec<f64>> = dirs.iter().map(|w| w.iter().map(|v| r * v).collect()).collect();
                let vals = lab.eval_batch(delta, 0, Localization::Full, &xs, gamma * r + gap, None)?;
                let weight = (1.0 + gap).powi(cfg.n_tail as i32);
                Ok(vals
                    .iter()
                    .enumerate()
                    .map(|(i, s)| ConeDecayRow {
                        shell: big_r,
                        direction: i,
                        abs_x: r,
                        gap,
                        kernel_abs: s.value.norm(),
                        phi_value: phis[i],
                        normalized: s.value.norm() * weight / phis[i],
                    })
                    .collect())
            })
            .collect();
        let mut shell_rows = Vec::new();
        for e in evaluated {
            match e {
                Ok(v) => shell_rows.extend(v),
                Err(err) if err.is_refusal() => break 'shells,
                Err(err) => return Err(err),
            }
        }
        let best = shell_rows.iter().map(|r| r.normalized).fold(0.0, f64::max);
        shell_max.push((big_r, best));
        rows.extend(shell_rows);
        max_feasible_r = big_r;
    }
    if shell_max.len() < 3 {
        return Err(LabError::DynamicRange(format!(
            "only {} shells were feasible; a decay fit needs three",
            shell_max.len()
        )));
    }
    let fit = fit_power_law(
        &shell_max.iter().map(|s| s.0).collect::<Vec<_>>(),
        &shell_max.iter().map(|s| s.1).collect::<Vec<_>>(),
    )?;
    let exact: Vec<f64> = shell_max
        .iter()
        .map(|&(big_r, _)| {
            rows.iter()
                .filter(|r| r.shell == big_r && r.gap == 0.0)
                .map(|r| r.normalized)
                .fold(0.0, f64::max)
        })
        .collect();
    let exact_cone_slope = if exact.iter().all(|&v| v > 0.0) {
        fit_power_law(&shell_max.iter().map(|s| s.0).collect::<Vec<_>>(), &exact)?.slope
    } else {
        f64::NAN
    };
    let constant = rows
        .iter()
        .map(|r| r.normalized * (1.0 + r.abs_x).powf(-target))
        .fold(0.0, f64::max);

    // off-cone tail along the direction carrying the largest kernel on the first shell
    let tail_direction = rows
        .iter()
        .filter(|r| r.shell == cfg.shells[0])
        .max_by(|a, b| a.normalized.total_cmp(&b.normalized))
        .map(|r| r.direction)
        .unwrap_or(0);
    let tail_abs_x = cfg.shells[0];
    let x: Vec<f64> = dirs[tail_direction].iter().map(|v| tail_abs_x * v).collect();
    let tail: Vec<(f64, f64)> = cfg
        .tail_gaps
        .par_iter()
        .map(|&s| {
            let v = lab.eval_level(delta, 0, Localization::Full, &x, gamma * tail_abs_x + s)?;
            Ok((1.0 + s, v.value.norm()))
        })
        .collect::<Result<_>>()?;
    let tfit = fit_power_law(
        &tail.iter().map(|p| p.0).collect::<Vec<_>>(),
        &tail.iter().map(|p| p.1).collect::<Vec<_>>(),
    )?;
    Ok(ConeDecayReport {
        gauge: df.name(),
        delta,
        target_slope: target,
        rows,
        shell_max,
        slope: fit.slope,
        r_squared: fit.r_squared,
        exact_cone_slope,
        constant,
        max_feasible_r,
        tail_direction,
        tail_abs_x,
        tail,
        tail_slope: tfit.slope,
    })
}
