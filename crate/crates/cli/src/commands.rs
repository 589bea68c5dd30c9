//! One pipeline per command. Each fills an [`Outcome`]; nothing touches the
//! file system here.

use conelab_core::caps::{
    cap_samples, comparability_check, default_r_grid, doubling_check, fourier_cap_sweep, lemma22_check,
    lemma22_samples, lemma23_check, lemma23_samples, CapGeometry, CapQuery, PhiTable, SurfaceFourier,
};
use conelab_core::geometry::{default_probe_radii, gamma_sup, gauss_point, type_order};
use conelab_core::kernel::lemmas::{
    ball_nodes, cone_decay_fit, cone_samples, lemma31_check, lemma32_fit, ConeDecayConfig, Lemma32Config,
};
use conelab_core::kernel::{KernelLab, Localization};
use conelab_core::operator::{delta_critical, operator_selftest, ConeSymbol};
use conelab_core::regression::log_space;
use conelab_core::report::{cap_sweep_csv, decay_csv, lemma32_csv, phi_csv, weak_csv};
use conelab_core::special::bessel_j0;
use conelab_core::weak::{
    lambda_grid, lemma42_check, lemma43_measure_check, stw_power_law_check, suite_centers, weak_type_experiment, Case,
    CountingConfig, Family, WeakTypeConfig,
};
use conelab_core::{DistanceFunction, GaugeKind, LabError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::summary::Outcome;

pub const LEMMAS: &[&str] = &[
    "2.2",
    "2.3",
    "3.1",
    "3.2",
    "4.1",
    "4.2",
    "4.3",
    "cor2.1",
    "cor3.4",
    "scaling3.2",
];

fn common(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<DistanceFunction> {
    out.param("gauge", cfg.gauge.name());
    out.param("d", cfg.d);
    cfg.distance_function().map_err(|e| LabError::Config(e.0))
}

fn is_euclidean(df: &DistanceFunction) -> bool {
    matches!(df.kind(), GaugeKind::Euclidean)
}

fn phi_resolution(cfg: &ExperimentConfig, d: usize) -> usize {
    cfg.resolution.unwrap_or(if d == 2 { 64 } else { 12 })
}

fn variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

pub fn phi(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let df = common(cfg, out)?;
    let res = phi_resolution(cfg, df.dim());
    out.param("resolution", res);
    let table = PhiTable::build(&CapGeometry::new(&df)?, res, &default_r_grid())?;
    let lo = table.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = table.values.iter().copied().fold(0.0, f64::max);
    let var = variance(&table.values);
    out.constant("phi_min", lo);
    out.constant("phi_max", hi);
    out.constant("phi_variance", var);
    out.constant("phi_l2", table.lp_norm(2.0));
    if is_euclidean(&df) {
        out.at_most("phi_variance", var, cfg.tol("phi_variance", 1e-10));
    } else if df.dim() == 2 && res.is_multiple_of(4) {
        // the midpoint grid is closed under θ ↦ -θ and θ ↦ π/2 - θ
        let n = res;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let v = table.values[k];
            let reflected = table.values[n - 1 - k];
            let swapped = table.values[(n / 4 + n - 1 - k) % n];
            worst = worst.max((v - reflected).abs() / v).max((v - swapped).abs() / v);
        }
        out.constant("phi_symmetry_defect", worst);
        out.at_most("phi_symmetry", worst, cfg.tol("phi_symmetry", 1e-6));
    }
    out.table("phi.csv", phi_csv(&table)?);
    Ok(())
}

pub fn caps(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let df = common(cfg, out)?;
    if df.dim() != 2 {
        return Err(LabError::Config("the caps sweep runs on plane curves (d = 2)".into()));
    }
    let geom = CapGeometry::new(&df)?;
    let ndir = cfg.directions.unwrap_or(16);
    let heights = log_space(1e-3, 1.9, cfg.samples.unwrap_or(40));
    out.param("directions", ndir);
    out.param("heights", heights.len());
    let mut csv = String::from("direction,s,cap_measure\n");
    let (mut monotone_defect, mut arc_error): (f64, f64) = (0.0, 0.0);
    let mut bases = Vec::new();
    for i in 0..ndir {
        let a = std::f64::consts::PI * 2.0 * (i as f64 + 0.25) / ndir as f64;
        let base = gauss_point(&df, &[a.cos(), a.sin()])?;
        let mut prev: f64 = 0.0;
        for &s in &heights {
            let m = geom.cap_measure(&base, s)?;
            monotone_defect = monotone_defect.max(prev - m);
            prev = m;
            if is_euclidean(&df) {
                arc_error = arc_error.max((m - 2.0 * (1.0 - s).acos()).abs());
            }
            csv.push_str(&format!("{i},{s},{m}\n"));
        }
        bases.push(base);
    }
    out.at_most("cap_monotone", monotone_defect, 0.0);
    if is_euclidean(&df) {
        out.at_most("cap_arc_formula", arc_error, cfg.tol("cap_arc_formula", 1e-6));
    }
    let k = df.max_type().unwrap_or(2) as f64;
    let small: Vec<CapQuery> = bases
        .iter()
        .map(|b| CapQuery::new(b.clone(), 1e-3))
        .collect::<Result<_>>()?;
    let doubling = doubling_check(&geom, &small, &[1.0 / 16.0, 0.25, 1.0, 4.0, 16.0], k)?;
    out.constant("doubling_worst", doubling.worst_ratio);
    out.at_most("doubling", doubling.worst_ratio, cfg.tol("doubling", 8.0));
    let mut comparability: f64 = 1.0;
    for b in bases.iter().take(4) {
        let cap = CapQuery::new(b.clone(), 0.05)?;
        comparability = comparability.max(comparability_check(&geom, &cap, &cap_samples(&geom, &cap, 100)?)?);
    }
    out.constant("comparability_worst", comparability);
    out.at_most("comparability", comparability, cfg.tol("comparability", 10.0));
    if let GaugeKind::Lq(q) = df.kind() {
        let q = *q as f64;
        let radii = default_probe_radii();
        let axis = type_order(&df, &gauss_point(&df, &[1.0, 0.0])?, &radii)?;
        let diag = type_order(&df, &gauss_point(&df, &[1.0, 1.0])?, &radii)?;
        out.constant("type_order_axis", axis);
        out.constant("type_order_diagonal", diag);
        out.near("type_order_axis", axis, q, cfg.tol("type_order_axis", 0.1));
        out.near("type_order_diagonal", diag, 2.0, cfg.tol("type_order_diagonal", 0.05));
    }
    out.table("caps.csv", csv);
    Ok(())
}

fn plane_directions(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if d == 2 {
        return (0..count)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if n > 1e-3 && n <= 1.0 {
                break v.iter().map(|a| a / n).collect();
            }
        })
        .collect()
}

pub fn fourier_decay(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let df = common(cfg, out)?;
    let geom = CapGeometry::new(&df)?;
    let ndir = cfg.directions.unwrap_or(64);
    let radii = log_space(4.0, 256.0, cfg.radii.unwrap_or(13));
    out.param("directions", ndir);
    out.param("radii", radii.len());
    let dirs = plane_directions(df.dim(), ndir, cfg.seed);
    let rows = fourier_cap_sweep(&geom, &radii, &dirs)?;
    let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    out.constant("fourier_cap_ratio_max", worst);
    out.at_most("fourier_cap_bound", worst, cfg.tol("fourier_cap_bound", 16.0));
    let sf = SurfaceFourier::new(&df)?;
    let origin = sf.eval(&vec![0.0; df.dim()])?;
    let area = geom.surface_area();
    out.at_most(
        "zero_frequency_area",
        (origin.re - area).abs() / area,
        cfg.tol("zero_frequency_area", 1e-8),
    );
    if is_euclidean(&df) && df.dim() == 2 {
        let mut err: f64 = 0.0;
        for r in log_space(0.5, 32.0, 25) {
            let v = sf.eval(&[0.6 * r, 0.8 * r])?;
            err = err.max((v - 2.0 * std::f64::consts::PI * bessel_j0(r)).norm());
        }
        out.constant("bessel_error", err);
        out.at_most("bessel", err, cfg.tol("bessel", 1e-4));
    }
    out.table("fourier.csv", cap_sweep_csv(&rows)?);
    Ok(())
}

fn decay_run(df: &DistanceFunction, cfg: &ExperimentConfig, p: f64, out: &mut Outcome, tag: &str) -> Result<()> {
    let lab = KernelLab::new(df)?;
    let mut dc = ConeDecayConfig::new(p);
    if let Some(n) = cfg.directions {
        dc.directions = n;
    }
    let rep = cone_decay_fit(&lab, &dc)?;
    out.constant(&format!("{tag}slope"), rep.slope);
    out.constant(&format!("{tag}target_slope"), rep.target_slope);
    out.constant(&format!("{tag}r_squared"), rep.r_squared);
    out.constant(&format!("{tag}exact_cone_slope"), rep.exact_cone_slope);
    out.constant(&format!("{tag}tail_slope"), rep.tail_slope);
    out.constant(&format!("{tag}constant"), rep.constant);
    out.constant(&format!("{tag}delta"), rep.delta);
    out.near(
        &format!("{tag}decay_slope"),
        rep.slope,
        rep.target_slope,
        cfg.tol("decay_slope", 0.3),
    );
    out.table(&format!("{tag}decay.csv"), decay_csv(&rep)?);
    Ok(())
}

pub fn kernel_decay(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let df = common(cfg, out)?;
    out.param("p", cfg.p);
    decay_run(&df, cfg, cfg.p, out, "")
}

pub fn operator_selftest_cmd(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let df = common(cfg, out)?;
    let delta = cfg.resolved_delta();
    let n = cfg.grid.unwrap_or(if df.dim() == 2 { 64 } else { 16 });
    out.param("delta", delta);
    out.param("grid", n);
    let r = operator_selftest(&ConeSymbol::new(&df, delta)?, n, cfg.seed)?;
    out.constant("mode_error", r.mode_error);
    out.constant("contraction", r.contraction);
    out.constant("telescoping_error", r.telescoping_error);
    out.at_most("single_mode", r.mode_error, cfg.tol("single_mode", 1e-12));
    out.at_most("contraction", r.contraction, 1.0 + cfg.tol("contraction", 1e-12));
    out.at_most("telescoping", r.telescoping_error, cfg.tol("telescoping", 1e-8));
    Ok(())
}

pub fn weak_type(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let df = common(cfg, out)?;
    let delta = cfg.resolved_delta();
    let critical = delta_critical(cfg.p, df.dim())?;
    let mut wc = WeakTypeConfig::new(cfg.p, delta);
    wc.seed = cfg.seed;
    if let Some(g) = cfg.grid {
        wc.grid = g;
    }
    if let Some(pad) = cfg.pad {
        wc.pad = pad;
    }
    if let Some(s) = &cfg.scales {
        wc.scales = s.clone();
    }
    out.param("p", cfg.p);
    out.param("delta", delta);
    out.param("delta_critical", critical);
    out.param("grid", wc.grid);
    out.param("pad", wc.pad);
    out.param("scales", &wc.scales);
    out.param("seed", wc.seed);
    let rep = weak_type_experiment(&df, &wc)?;
    out.constant("gamma", rep.gamma);
    out.constant("nu", rep.nu as f64);
    out.constant("ratio_full", rep.ratio_full);
    out.constant("ratio_cone", rep.ratio_cone);
    out.constant("growth_full", rep.growth_full);
    out.constant("trend_s", rep.trend_s as f64);
    out.constant("trend_p", rep.trend_p);
    if delta >= critical - 1e-12 {
        out.at_most("ratio", rep.ratio_full, cfg.tol("ratio", 8.0));
    } else {
        out.at_least("growth", rep.growth_full, cfg.tol("growth", 2.0));
        out.at_most("increasing_trend", rep.trend_p, cfg.tol("increasing_trend", 0.05));
    }
    out.table("weak.csv", weak_csv(std::slice::from_ref(&rep))?);
    Ok(())
}

pub fn lemma_check(name: &str, cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    out.param("lemma", name);
    match name {
        "2.2" => {
            let df = common(cfg, out)?;
            let n = cfg.samples.unwrap_or(10_000);
            out.param("samples", n);
            let c = lemma22_check(&df, &lemma22_samples(df.dim(), n, cfg.seed))?;
            out.constant("C", c);
            let limit = if is_euclidean(&df) {
                cfg.tol("C", 8.0)
            } else {
                cfg.tol("C", f64::MAX)
            };
            out.at_most("C", c, limit);
        }
        "2.3" => {
            let df = common(cfg, out)?;
            let n = cfg.samples.unwrap_or(1000);
            out.param("samples", n);
            let c = lemma23_check(
                &CapGeometry::new(&df)?,
                &lemma23_samples(df.dim(), n, cfg.seed),
                &default_r_grid(),
            )?;
            out.constant("C", c);
            if is_euclidean(&df) {
                out.near("C", c, 1.0, cfg.tol("C", 1e-6));
            } else {
                out.at_most("C", c, cfg.tol("C", f64::MAX));
            }
        }
        "3.1" => {
            let df = common(cfg, out)?;
            let gamma = gamma_sup(&df)?.gamma;
            let n = cfg.samples.unwrap_or(10_000);
            let sphere = if df.dim() == 2 { 100 } else { 10 };
            let ball = ball_nodes(&df, sphere, 10)?;
            out.param("samples", n);
            out.param("ball_nodes", ball.len());
            let r = lemma31_check(gamma, &cone_samples(df.dim(), gamma, n, 4.0, cfg.seed), &ball);
            out.constant("gamma", gamma);
            out.constant("violations", r.violations as f64);
            out.constant("worst_margin", r.worst_margin);
            out.at_most("violations", r.violations as f64, 0.0);
        }
        "3.2" => {
            let df = common(cfg, out)?;
            let lab = KernelLab::new(&df)?;
            let deltas = cfg.deltas.clone().unwrap_or_else(|| vec![1.5, 2.5]);
            out.param("deltas", &deltas);
            for delta in deltas {
                let rep = lemma32_fit(&lab, &Lemma32Config::new(&lab, delta, 0))?;
                let tag = format!("delta{delta}");
                out.constant(&format!("{tag}_k_slope"), rep.k_slope);
                out.constant(&format!("{tag}_constant"), rep.constant);
                out.constant(&format!("{tag}_tail_slope"), rep.tail_slope);
                out.near(
                    &format!("{tag}_k_slope"),
                    rep.k_slope,
                    -(delta + 1.0),
                    cfg.tol("k_slope", 0.3),
                );
                out.table(&format!("lemma32_{tag}.csv"), lemma32_csv(&rep)?);
            }
        }
        "4.1" | "4.2" => {
            let ps = cfg.ps.clone().unwrap_or_else(|| vec![1.0 / 3.0, 0.5, 2.0 / 3.0]);
            let n = cfg.samples.unwrap_or(32);
            out.param("ps", &ps);
            out.param("pieces", n);
            let centers = suite_centers(n);
            let lambdas: Vec<f64> = lambda_grid(1e6, 40, 8);
            for p in ps {
                if name == "4.1" {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
                    let r = stw_power_law_check(p, &centers, &weights, &lambdas)?;
                    out.constant(&format!("p{p:.4}_worst_ratio"), r.worst_ratio);
                    out.at_most(&format!("p{p:.4}_bound"), r.worst_ratio, 1.0);
                } else {
                    let r = lemma42_check(p, 1.0, &centers, &lambdas)?;
                    out.constant(&format!("p{p:.4}_empirical"), r.empirical_constant);
                    out.constant(&format!("p{p:.4}_stw_bound"), r.stw_bound);
                    out.at_most(&format!("p{p:.4}_bound"), r.empirical_constant / r.stw_bound, 1.0);
                }
            }
        }
        "4.3" => {
            let df = common(cfg, out)?;
            out.param("p", cfg.p);
            let gamma = gamma_sup(&df)?.gamma;
            let table = PhiTable::build(
                &CapGeometry::new(&df)?,
                phi_resolution(cfg, df.dim()),
                &default_r_grid(),
            )?;
            let levels = cfg.levels.clone().unwrap_or_else(|| (-2..=2).collect());
            out.param("levels", &levels);
            let delta = delta_critical(cfg.p, df.dim())?;
            let counting = CountingConfig {
                nr: cfg.grid.unwrap_or(1024),
                nt: cfg.grid.unwrap_or(1024),
                ..CountingConfig::default()
            };
            for case in [Case::I, Case::II] {
                for family in [Family::A, Family::C, Family::E { j: 1 }] {
                    let r = lemma43_measure_check(family, case, cfg.p, gamma, &table, &levels, &counting)?;
                    let tag = format!("{}_{:?}", family.name(), case);
                    let consts: Vec<f64> = r.rows.iter().map(|w| w.constant).collect();
                    let mut sorted = consts.clone();
                    sorted.sort_by(f64::total_cmp);
                    let median = sorted[sorted.len() / 2];
                    let drift = consts.iter().map(|c| (c / median - 1.0).abs()).fold(0.0, f64::max);
                    out.constant(&format!("{tag}_constant_drift"), drift);
                    out.at_most(&format!("{tag}_constant_drift"), drift, cfg.tol("constant_drift", 0.2));
                    let want = if family == Family::A {
                        -1.0 / (delta + 1.0)
                    } else {
                        -cfg.p
                    };
                    for w in &r.rows {
                        out.near(&format!("{tag}_l{}_slope", w.l), w.slope, want, cfg.tol("slope", 0.1));
                    }
                }
            }
        }
        "cor2.1" => {
            let df = common(cfg, out)?;
            let geom = CapGeometry::new(&df)?;
            let res = phi_resolution(cfg, df.dim());
            let r = default_r_grid();
            let coarse = PhiTable::build(&geom, res, &r)?;
            let fine = PhiTable::build(&geom, 2 * res, &r)?;
            out.param("resolution", res);
            for q in [1.0, 2.0] {
                let (a, b) = (coarse.lp_norm(q), fine.lp_norm(q));
                out.constant(&format!("phi_l{q}"), b);
                out.at_most(
                    &format!("phi_l{q}_refinement"),
                    (b - a).abs() / b,
                    cfg.tol("refinement", 0.05),
                );
            }
        }
        "cor3.4" => {
            let df = common(cfg, out)?;
            let ps = cfg.ps.clone().unwrap_or_else(|| vec![2.0 / 3.0, 0.5]);
            out.param("ps", &ps);
            for p in ps {
                decay_run(&df, cfg, p, out, &format!("p{p:.4}_"))?;
            }
        }
        "scaling3.2" => {
            let df = common(cfg, out)?;
            let lab = KernelLab::new(&df)?;
            let delta = cfg.resolved_delta();
            let levels = cfg.levels.clone().unwrap_or_else(|| vec![-2, 1, 3]);
            let n = cfg.samples.unwrap_or(10);
            out.param("delta", delta);
            out.param("levels", &levels);
            out.param("samples", n);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut worst: f64 = 0.0;
            for &l in &levels {
                let s = 2f64.powi(-l);
                for _ in 0..n {
                    let x: Vec<f64> = (0..df.dim()).map(|_| s * rng.gen_range(-1.5..1.5)).collect();
                    let t = s * rng.gen_range(-1.5..1.5);
                    let fast = lab.eval_scaled(delta, l, Localization::Full, &x, t)?.value;
                    let direct = lab.eval_direct(delta, l, Localization::Full, &x, t)?.value;
                    worst = worst.max((fast - direct).norm() / direct.norm());
                }
            }
            out.constant("relative_error", worst);
            out.at_most("scaling", worst, cfg.tol("scaling", 1e-6));
        }
        other => {
            return Err(LabError::Config(format!(
                "unknown lemma '{other}'; choose one of {}",
                LEMMAS.join(", ")
            )))
        }
    }
    Ok(())
}
