//! Acceptance run: one line per criterion, with the measured quantities and
//! the wall time against its budget.
//!
//! Every criterion is evaluated and printed. The process fails when a
//! criterion fails that is not listed in `KNOWN_FAILURES`; a listed one that
//! starts passing is reported too, so the list cannot go stale silently.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use conelab_core::caps::{default_r_grid, fourier_cap_sweep, CapGeometry, PhiTable, SurfaceFourier};
use conelab_core::geometry::{default_probe_radii, gamma_sup, gauss_point, type_order};
use conelab_core::kernel::lemmas::{
    ball_nodes, cone_decay_fit, cone_samples, lemma31_check, lemma32_fit, ConeDecayConfig, Lemma32Config,
};
use conelab_core::kernel::{KernelLab, Localization};
use conelab_core::operator::{apply_t, apply_tl, bin_frequency, delta_critical, fourier_mode};
use conelab_core::report::{decay_csv, phi_csv, weak_csv};
use conelab_core::weak::{
    lambda_grid, lemma42_check, lemma43_measure_check, stw_constant, stw_power_law_check, suite_centers,
    weak_type_experiment, Case, CountingConfig, Family, PowerLawSum, WeakTypeConfig,
};
use conelab_core::{ConeSymbol, DistanceFunction, SampledField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that fail at desk scale, with the reason kept next to the number.
const KNOWN_FAILURES: &[(u32, &str)] = &[(
    7,
    "lq4 at p = 1/2: the shell maxima over |x| in [8, 128] are not yet in the power-law regime",
)];

struct Verdict {
    pass: bool,
    detail: String,
}

fn euclid() -> DistanceFunction {
    DistanceFunction::euclidean(2).unwrap()
}

fn lq4() -> DistanceFunction {
    DistanceFunction::lq(4, 2).unwrap()
}

fn gauges() -> [(&'static str, DistanceFunction); 2] {
    [("euclid", euclid()), ("lq4", lq4())]
}

/// Least-squares slope of `y` against `x`.
fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `J_0(x) = (1/π) ∫_0^π cos(x sin θ) dθ`; the integrand is smooth and
/// periodic, so the midpoint rule converges geometrically.
fn j0_integral(x: f64) -> f64 {
    let n = 2048;
    let h = PI / n as f64;
    (0..n).map(|k| (x * ((k as f64 + 0.5) * h).sin()).cos()).sum::<f64>() * h / PI
}

fn c1_geometry() -> Verdict {
    let geom = CapGeometry::new(&euclid()).unwrap();
    let base = gauss_point(geom.df(), &[0.6, -0.8]).unwrap();
    let mut err: f64 = 0.0;
    for s in log_points(1e-3, 1.9, 60) {
        err = err.max((geom.cap_measure(&base, s).unwrap() - 2.0 * (1.0 - s).acos()).abs());
    }
    let df = lq4();
    let radii = default_probe_radii();
    let axis = type_order(&df, &gauss_point(&df, &[1.0, 0.0]).unwrap(), &radii).unwrap();
    let diag = type_order(&df, &gauss_point(&df, &[1.0, 1.0]).unwrap(), &radii).unwrap();
    Verdict {
        pass: err <= 1e-6 && (axis - 4.0).abs() <= 0.1 && (diag - 2.0).abs() <= 0.05,
        detail: format!("arc error {err:.2e} (≤1e-6), type order axis {axis:.4} (4±0.1), diagonal {diag:.4} (2±0.05)"),
    }
}

fn c2_phi() -> Verdict {
    let r = default_r_grid();
    let e = PhiTable::build(&CapGeometry::new(&euclid()).unwrap(), 64, &r).unwrap();
    let m = e.values.iter().sum::<f64>() / e.values.len() as f64;
    let var = e.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / e.values.len() as f64;
    let geom = CapGeometry::new(&lq4()).unwrap();
    let sq = |n: usize| {
        let t = PhiTable::build(&geom, n, &r).unwrap();
        t.values.iter().zip(t.weights()).map(|(v, w)| v * v * w).sum::<f64>()
    };
    let (a, b) = (sq(128), sq(256));
    let change = (b - a).abs() / b;
    Verdict {
        pass: var < 1e-10 && a.is_finite() && b.is_finite() && change <= 0.05,
        detail: format!(
            "euclid variance {var:.2e} (<1e-10), lq4 ∫Φ² {a:.4} → {b:.4} change {:.2}% (≤5%)",
            100.0 * change
        ),
    }
}

fn c3_fourier() -> Verdict {
    let radii = log_points(4.0, 256.0, 13);
    let dirs: Vec<Vec<f64>> = (0..64)
        .map(|i| {
            let a = 2.0 * PI * (i as f64 + 0.5) / 64.0;
            vec![a.cos(), a.sin()]
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, df) in gauges() {
        let rows = fourier_cap_sweep(&CapGeometry::new(&df).unwrap(), &radii, &dirs).unwrap();
        let w = rows.iter().map(|r| r.fourier_abs / r.cap_bound).fold(0.0, f64::max);
        parts.push(format!("{name} max ratio {w:.3}"));
        worst = worst.max(w);
    }
    let sf = SurfaceFourier::new(&euclid()).unwrap();
    let mut err: f64 = 0.0;
    for r in log_points(0.25, 32.0, 40) {
        let v = sf.eval(&[r * 0.28, r * 0.96]).unwrap();
        err = err.max((v - Complex64::new(2.0 * PI * j0_integral(r), 0.0)).norm());
    }
    Verdict {
        pass: worst <= 16.0 && err <= 1e-4,
        detail: format!("{} (≤16), euclid vs 2πJ0 max error {err:.2e} (≤1e-4)", parts.join(", ")),
    }
}

fn c4_scaling() -> Verdict {
    let mut worst: f64 = 0.0;
    for (_, df) in gauges() {
        let lab = KernelLab::new(&df).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for l in [-2, 1, 3] {
            let s = 2f64.powi(-l);
            for _ in 0..10 {
                let x = [s * rng.gen_range(-1.5..1.5), s * rng.gen_range(-1.5..1.5)];
                let t = s * rng.gen_range(-1.5..1.5);
                let fast = lab.eval_scaled(1.5, l, Localization::Full, &x, t).unwrap().value;
                let direct = lab.eval_direct(1.5, l, Localization::Full, &x, t).unwrap().value;
                worst = worst.max((fast - direct).norm() / direct.norm());
            }
        }
    }
    Verdict {
        pass: worst <= 1e-6,
        detail: format!("max relative error {worst:.2e} over 10 points × l ∈ {{-2,1,3}}, both gauges (≤1e-6)"),
    }
}

fn c5_lemma31() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, df) in gauges() {
        let gamma = gamma_sup(&df).unwrap().gamma;
        let samples = cone_samples(2, gamma, 10_000, 4.0, 5);
        let ball = ball_nodes(&df, 100, 10).unwrap();
        // brute force: inf over the ball of |t + ⟨x, ξ⟩| against |t| - γ|x|
        let mut brute = 0;
        for (x, t) in &samples {
            let inf = ball
                .iter()
                .map(|b| (t + x[0] * b[0] + x[1] * b[1]).abs())
                .fold(f64::INFINITY, f64::min);
            if inf < t.abs() - gamma * x[0].hypot(x[1]) - 1e-10 {
                brute += 1;
            }
        }
        let rep = lemma31_check(gamma, &samples, &ball);
        pass &= brute == 0 && rep.violations == 0 && ball.len() >= 1000;
        parts.push(format!(
            "{name} {} × {} nodes: {brute} violations",
            samples.len(),
            ball.len()
        ));
    }
    Verdict {
        pass,
        detail: parts.join(", "),
    }
}

fn c6_lemma32() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, df) in gauges() {
        let lab = KernelLab::new(&df).unwrap();
        for delta in [1.5, 2.5] {
            let rep = lemma32_fit(&lab, &Lemma32Config::new(&lab, delta, 0)).unwrap();
            let ks: Vec<f64> = rep.per_k.iter().map(|(k, _)| *k as f64).collect();
            let lv: Vec<f64> = rep.per_k.iter().map(|(_, v)| v.log2()).collect();
            let slope = ols_slope(&ks, &lv);
            pass &= (slope + delta + 1.0).abs() <= 0.3 && ks == (4..=10).map(f64::from).collect::<Vec<_>>();
            parts.push(format!("{name} δ={delta}: {slope:.3} (target {:.1})", -(delta + 1.0)));
        }
    }
    Verdict {
        pass,
        detail: parts.join(", "),
    }
}

fn c7_cone_decay() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, df) in gauges() {
        let lab = KernelLab::new(&df).unwrap();
        for p in [2.0 / 3.0, 0.5] {
            let rep = cone_decay_fit(&lab, &ConeDecayConfig::new(p)).unwrap();
            let target = -(delta_critical(p, 2).unwrap() + 1.0 + 0.5);
            let shells: Vec<f64> = {
                let mut s: Vec<f64> = rep.rows.iter().map(|r| r.shell).collect();
                s.dedup();
                s
            };
            let maxima: Vec<f64> = shells
                .iter()
                .map(|&r| {
                    rep.rows
                        .iter()
                        .filter(|w| w.shell == r)
                        .map(|w| w.normalized)
                        .fold(0.0, f64::max)
                })
                .collect();
            let lx: Vec<f64> = shells.iter().map(|r| r.ln()).collect();
            let ly: Vec<f64> = maxima.iter().map(|m| m.ln()).collect();
            let slope = ols_slope(&lx, &ly);
            let covers = shells.first() == Some(&8.0) && shells.last().map(|r| 2.0 * r) == Some(128.0);
            let ok = (slope - target).abs() <= 0.3 && covers;
            pass &= ok;
            parts.push(format!(
                "{name} p={p:.3}: {slope:.2} (target {target:.1}){}",
                if ok { "" } else { " ✗" }
            ));
        }
    }
    Verdict {
        pass,
        detail: parts.join(", "),
    }
}

fn c8_operator() -> Verdict {
    let n = 128;
    let df = euclid();
    let sym = ConeSymbol::new(&df, 1.5).unwrap();
    let shape = [n, n, n];
    let ext = [n as f64, n as f64, 16.0 * PI];
    let origin = [0.0; 3];
    let mut mode_err: f64 = 0.0;
    for bins in [[0usize, 0, 0], [3, 5, 7], [1, 127, 2], [64, 10, 120]] {
        let f = fourier_mode(&shape, &ext, &origin, &bins).unwrap();
        let xi = [bin_frequency(bins[0], n, ext[0]), bin_frequency(bins[1], n, ext[1])];
        let tau = bin_frequency(bins[2], n, ext[2]);
        let rho = xi[0].hypot(xi[1]);
        // the symbol written out by hand
        let m = if tau == 0.0 {
            if rho == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            (1.0 - rho / tau.abs()).max(0.0).powf(1.5)
        };
        let g = apply_t(&sym, &f).unwrap();
        for (a, b) in g.data().iter().zip(f.data()) {
            mode_err = mode_err.max((a - m * b).norm());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let f = SampledField::from_fn(&shape, &ext, &origin, |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
    .unwrap();
    let excess = apply_t(&sym, &f).unwrap().l2_norm() / f.l2_norm() - 1.0;
    drop(f);
    // τ bins 2..=24 sit at |τ| ∈ [1/4, 3], inside the span where levels -4..=4 sum to one
    let mut band = SampledField::zeros(&shape, &ext, &origin).unwrap();
    for _ in 0..10 {
        let j: usize = rng.gen_range(2..=24);
        // spatial bins with |ξ_1| + |ξ_2| < |τ|, where the symbol is nonzero
        let reach = (j as f64 / 8.0 * n as f64 / (4.0 * PI)) as usize;
        let mut spatial = || {
            let b = rng.gen_range(0..=reach);
            if b > 0 && rng.gen_bool(0.5) {
                n - b
            } else {
                b
            }
        };
        let bins = [spatial(), spatial(), if rng.gen_bool(0.5) { j } else { n - j }];
        let m = fourier_mode(&shape, &ext, &origin, &bins).unwrap();
        band = band
            .combine(Complex64::new(1.0, 0.0), &m, Complex64::new(rng.gen(), rng.gen()))
            .unwrap();
    }
    let whole = apply_t(&sym, &band).unwrap();
    let mut sum = SampledField::zeros(&shape, &ext, &origin).unwrap();
    for l in -4..=4 {
        let piece = apply_tl(&sym, l, &band).unwrap();
        sum = sum
            .combine(Complex64::new(1.0, 0.0), &piece, Complex64::new(1.0, 0.0))
            .unwrap();
    }
    let scale = whole.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tele = sum
        .data()
        .iter()
        .zip(whole.data())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale;
    Verdict {
        pass: mode_err <= 1e-12 && excess <= 1e-12 && tele <= 1e-8,
        detail: format!(
            "128³: mode error {mode_err:.1e} (≤1e-12), ‖Tf‖/‖f‖-1 = {excess:.2e} (≤1e-12), Σ T_l vs T {tele:.1e} (≤1e-8)"
        ),
    }
}

fn c9_summation() -> Verdict {
    let centers = suite_centers(24);
    let lambdas = lambda_grid(1e6, 40, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let weights: Vec<f64> = (0..24).map(|_| rng.gen_range(0.01..1.0)).collect();
    let mut parts = Vec::new();
    let mut pass = true;
    for p in [1.0 / 3.0, 0.5, 2.0 / 3.0] {
        let c = (2.0 - p) / (1.0 - p);
        assert!((c - stw_constant(p)).abs() < 1e-15);
        let mass: f64 = weights.iter().map(|w| w.powf(p)).sum();
        let s = stw_power_law_check(p, &centers, &weights, &lambdas).unwrap();
        let worst41 = s
            .lambdas
            .iter()
            .zip(&s.measured)
            .map(|(l, m)| m / (c * mass * 2.0 * l.powf(-p)))
            .fold(0.0, f64::max);
        // cross-check a few exact measures by counting on a fine grid
        let f = PowerLawSum::new(&centers, &weights, 1.0 / p).unwrap();
        // each of the at most 2·(pieces + 1) crossings costs one cell
        let (lo, hi, n) = (-2.0, 6.0, 1_000_000);
        let h = (hi - lo) / n as f64;
        let mut count_ok = true;
        for &lam in &[50.0, 200.0, 1000.0] {
            let counted = (0..n).filter(|&i| f.eval(lo + (i as f64 + 0.5) * h) > lam).count() as f64 * h;
            count_ok &= (counted - f.measure_above(lam)).abs() <= 2.0 * 25.0 * h;
        }
        let decay: Vec<f64> = (1..=24).map(|l| 2f64.powf(-(l as f64))).collect();
        let r42 = lemma42_check(p, 1.0, &centers, &lambdas).unwrap();
        let bound42 = c * 2.0 * decay.iter().map(|w| w.powf(p)).sum::<f64>();
        pass &= worst41 <= 1.0 && r42.empirical_constant <= bound42 && count_ok;
        parts.push(format!(
            "p={p:.3}: 4.1 worst {worst41:.3}, 4.2 {:.3}/{bound42:.3}",
            r42.empirical_constant
        ));
    }
    Verdict {
        pass,
        detail: parts.join(", "),
    }
}

fn c10_lemma43() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    let p = 2.0 / 3.0;
    let delta = delta_critical(p, 2).unwrap();
    for (name, df) in gauges() {
        let gamma = gamma_sup(&df).unwrap().gamma;
        let table = PhiTable::build(&CapGeometry::new(&df).unwrap(), 64, &default_r_grid()).unwrap();
        let cfg = CountingConfig::default();
        let (mut drift_max, mut slope_dev): (f64, f64) = (0.0, 0.0);
        for case in [Case::I, Case::II] {
            for family in [Family::A, Family::C, Family::E { j: 1 }] {
                let r = lemma43_measure_check(family, case, p, gamma, &table, &[-2, -1, 0, 1, 2], &cfg).unwrap();
                let mut c: Vec<f64> = r.rows.iter().map(|w| w.constant).collect();
                c.sort_by(f64::total_cmp);
                let median = c[c.len() / 2];
                drift_max = drift_max.max(c.iter().map(|v| (v / median - 1.0).abs()).fold(0.0, f64::max));
                let want = if family == Family::A { -1.0 / (delta + 1.0) } else { -p };
                slope_dev = slope_dev.max(r.rows.iter().map(|w| (w.slope - want).abs()).fold(0.0, f64::max));
            }
        }
        pass &= drift_max <= 0.2 && slope_dev <= 0.1;
        parts.push(format!(
            "{name}: constant drift {:.1}% (≤20%), slope deviation {slope_dev:.3} (≤0.1)",
            100.0 * drift_max
        ));
    }
    Verdict {
        pass,
        detail: parts.join(", "),
    }
}

/// Exact one-sided p-value of Kendall's S for an increasing trend, by
/// enumerating every ordering.
fn kendall_p(values: &[f64]) -> (i64, f64) {
    fn s_of(v: &[f64]) -> i64 {
        let mut s = 0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                s += (v[j] - v[i]).signum() as i64;
            }
        }
        s
    }
    fn permute(items: &mut Vec<f64>, k: usize, out: &mut Vec<i64>) {
        if k == items.len() {
            out.push(s_of(items));
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, out);
            items.swap(k, i);
        }
    }
    let s = s_of(values);
    let mut all = Vec::new();
    permute(
        &mut (0..values.len()).map(|i| i as f64).collect::<Vec<f64>>(),
        0,
        &mut all,
    );
    (s, all.iter().filter(|&&x| x >= s).count() as f64 / all.len() as f64)
}

fn c11_weak_type() -> Verdict {
    let df = euclid();
    let p = 2.0 / 3.0;
    let crit = delta_critical(p, 2).unwrap();
    let run = |delta: f64| {
        let rep = weak_type_experiment(&df, &WeakTypeConfig::new(p, delta)).unwrap();
        assert_eq!(
            rep.rows.iter().map(|r| r.j).collect::<Vec<_>>(),
            (0..=5).collect::<Vec<_>>()
        );
        rep.rows.iter().map(|r| r.quasinorm_full).collect::<Vec<f64>>()
    };
    let at = run(crit);
    let ratio = at.iter().copied().fold(0.0, f64::max) / at.iter().copied().fold(f64::INFINITY, f64::min);
    let below = run(crit - 0.3);
    let growth = below[5] / below[0];
    let (s, pv) = kendall_p(&below);
    let above = run(crit + 2.0);
    let ratio_above = above.iter().copied().fold(0.0, f64::max) / above.iter().copied().fold(f64::INFINITY, f64::min);
    Verdict {
        pass: ratio <= 8.0 && growth >= 2.0 && pv <= 0.05,
        detail: format!(
            "δ(p): max/min {ratio:.2} (≤8); δ(p)-0.3: growth {growth:.2} (≥2), Kendall S={s} p={pv:.4} (≤0.05); δ(p)+2: max/min {ratio_above:.2}"
        ),
    }
}

fn c12_determinism() -> Verdict {
    let produce = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let df = lq4();
            let mut cfg = WeakTypeConfig::new(2.0 / 3.0, 1.5);
            cfg.grid = 32;
            cfg.scales = vec![0, 1];
            let weak = weak_csv(&[weak_type_experiment(&df, &cfg).unwrap()]).unwrap();
            let phi =
                phi_csv(&PhiTable::build(&CapGeometry::new(&df).unwrap(), 16, &default_r_grid()).unwrap()).unwrap();
            let lab = KernelLab::new(&df).unwrap();
            let mut dc = ConeDecayConfig::new(2.0 / 3.0);
            dc.shells = vec![2.0, 4.0, 8.0];
            dc.directions = 4;
            dc.radii_per_shell = 2;
            dc.tail_gaps = vec![16.0, 32.0];
            let decay = decay_csv(&cone_decay_fit(&lab, &dc).unwrap()).unwrap();
            (weak, phi, decay)
        })
    };
    let a = produce(1);
    let b = produce(1);
    let c = produce(3);
    let same = a == b && a == c;
    Verdict {
        pass: same && !a.0.is_empty(),
        detail: format!(
            "weak/phi/decay CSVs ({} + {} + {} bytes) identical across repeats and 1 vs 3 threads: {same}",
            a.0.len(),
            a.1.len(),
            a.2.len()
        ),
    }
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Verdict); 12] = [
        (1, "geometry oracles", 10, c1_geometry),
        (2, "Φ direction independence and L² stability", 120, c2_phi),
        (3, "surface Fourier transform bound", 300, c3_fourier),
        (4, "kernel scaling", 120, c4_scaling),
        (5, "cone separation", 60, c5_lemma31),
        (6, "Córdoba piece decay in k", 600, c6_lemma32),
        (7, "on-cone decay slope", 1800, c7_cone_decay),
        (8, "operator contract", 60, c8_operator),
        (9, "weak-type summation bounds", 60, c9_summation),
        (10, "envelope level-set measures", 600, c10_lemma43),
        (11, "weak-type experiment", 3600, c11_weak_type),
        (12, "determinism", 600, c12_determinism),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut unexpected = Vec::new();
    for (id, name, budget, check) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(budget);
        let pass = v.pass && in_time;
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id);
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.1}s / {budget}s]{}",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64(),
            match (pass, known) {
                (false, Some((_, why))) => format!(" (known: {why})"),
                (true, Some(_)) => " (listed as a known failure but passed)".to_string(),
                _ => String::new(),
            }
        );
        if pass == known.is_some() {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
