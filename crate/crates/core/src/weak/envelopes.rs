//! The envelope functions `𝒜, ℬ, 𝒞, 𝒟, ℰ` on the regions around the dual
//! cone and the measures of their level sets, counted on a polar grid.

use serde::Serialize;

use crate::caps::PhiTable;
use crate::error::{LabError, Result};
use crate::kernel::regions::in_region_polar;
use crate::kernel::RegionLabel;
use crate::linalg::norm;
use crate::operator::delta_critical;
use crate::regression::fit_power_law;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E {
        j: u32,
    },
    /// `Σ_{j ≥ 1} ℰ_{jl}`.
    ESum,
}

impl Family {
    pub fn name(&self) -> String {
        match self {
            Family::A => "A".into(),
            Family::B => "B".into(),
            Family::C => "C".into(),
            Family::D => "D".into(),
            Family::E { j } => format!("E{j}"),
            Family::ESum => "E".into(),
        }
    }

    pub fn uses_phi(&self) -> bool {
        !matches!(self, Family::A)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Case {
    I,
    II,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Exponents {
    pub h: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub n: u32,
}

/// The integer `N` with `N - 1 ≤ max{(d+1)(1/p-1), 1/p} < N`.
pub fn default_order(d: usize, p: f64) -> u32 {
    let m = ((d + 1) as f64 * (1.0 / p - 1.0)).max(1.0 / p);
    m.floor() as u32 + 1
}

pub fn lemma43_exponents(d: usize, p: f64, case: Case, n: u32) -> Result<Exponents> {
    let delta = delta_critical(p, d)?;
    let (d1, nf, dp) = ((d + 1) as f64, n as f64, d as f64 / p);
    Ok(match case {
        Case::I => Exponents {
            h: d1 * (p - 1.0),
            a: d1 - dp,
            b: d1 - dp - nf,
            c: d as f64 - delta,
            n,
        },
        Case::II => Exponents {
            h: (d1 + nf) * p - d1,
            a: d1 + nf - dp,
            b: d1 - dp,
            c: d as f64 + nf - delta,
            n,
        },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    pub family: Family,
    pub case: Case,
    pub l: i32,
    pub d: usize,
    pub p: f64,
    pub delta: f64,
    pub gamma: f64,
    pub exps: Exponents,
}

impl Envelope {
    pub fn new(family: Family, case: Case, l: i32, d: usize, p: f64, gamma: f64) -> Result<Self> {
        Self::with_order(family, case, l, d, p, gamma, default_order(d, p))
    }

    pub fn with_order(family: Family, case: Case, l: i32, d: usize, p: f64, gamma: f64, n: u32) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(LabError::Domain(format!("γ must be positive, got {gamma}")));
        }
        if let Family::E { j: 0 } = family {
            return Err(LabError::Domain("ℰ_{jl} needs j ≥ 1".into()));
        }
        Ok(Self {
            family,
            case,
            l,
            d,
            p,
            delta: delta_critical(p, d)?,
            gamma,
            exps: lemma43_exponents(d, p, case, n)?,
        })
    }

    fn s(&self) -> f64 {
        2f64.powi(self.l)
    }

    fn e_index(&self, r: f64, t: f64) -> Option<u32> {
        let gap = (t.abs() - self.gamma * r).abs() * self.s();
        if !(gap > 1.0) || !gap.is_finite() {
            return None;
        }
        let j = gap.log2().ceil().max(1.0) as u32;
        (j.saturating_sub(1).max(1)..=j + 1)
            .find(|&j| in_region_polar(RegionLabel::E { j, l: self.l }, r, t, self.gamma))
    }

    /// The envelope at `|x| = r` with the `Φ` factor left out.
    pub fn radial(&self, r: f64, t: f64) -> f64 {
        let (l, g) = (self.l, self.gamma);
        let e = &self.exps;
        let s = self.s();
        let dp = self.d as f64 / self.p;
        let nf = e.n as f64;
        let at = t.abs();
        match self.family {
            Family::A => {
                if in_region_polar(RegionLabel::A { l }, r, t, g) {
                    s.powf(e.c) * at.powf(-self.delta - 1.0)
                } else {
                    0.0
                }
            }
            Family::B => {
                if in_region_polar(RegionLabel::B { l }, r, t, g) {
                    s.powf(e.b) * r.powf(-dp - nf)
                } else {
                    0.0
                }
            }
            Family::C => {
                if in_region_polar(RegionLabel::C { l }, r, t, g) {
                    s.powf(e.a) * r.powf(-dp)
                } else {
                    0.0
                }
            }
            Family::D => {
                if in_region_polar(RegionLabel::D { l }, r, t, g) {
                    s.powf(e.b) * r.powf(-dp) * at.powf(-nf)
                } else {
                    0.0
                }
            }
            Family::E { j } => {
                if in_region_polar(RegionLabel::E { j, l }, r, t, g) {
                    s.powf(e.a) * 2f64.powf(-(j as f64) * nf) * r.powf(-dp)
                } else {
                    0.0
                }
            }
            Family::ESum => match self.e_index(r, t) {
                Some(j) => s.powf(e.a) * 2f64.powf(-(j as f64) * nf) * r.powf(-dp),
                None => 0.0,
            },
        }
    }

    /// The envelope at `(x, t)` given `Φ(x/|x|)`.
    pub fn eval(&self, x: &[f64], t: f64, phi: f64) -> f64 {
        let v = self.radial(norm(x), t);
        if self.family.uses_phi() && v != 0.0 {
            v * phi
        } else {
            v
        }
    }

    pub fn eval_with(&self, x: &[f64], t: f64, table: &PhiTable) -> f64 {
        self.eval(x, t, if self.family.uses_phi() { table.lookup(x) } else { 1.0 })
    }

    /// The bound's scale: `2^{lh}`, times `2^{-j(Np-1)}` for a single `ℰ_{jl}`.
    pub fn bound_scale(&self) -> f64 {
        let base = 2f64.powf(self.l as f64 * self.exps.h);
        match self.family {
            Family::E { j } => base * 2f64.powf(-(j as f64) * (self.exps.n as f64 * self.p - 1.0)),
            _ => base,
        }
    }

    /// `(r, |t|)` box outside which the envelope stays below `lambda`.
    pub fn effective_box(&self, lambda: f64, phi_max: f64) -> (f64, f64) {
        let s = self.s();
        let g = self.gamma;
        let e = &self.exps;
        let dp = self.d as f64 / self.p;
        let nf = e.n as f64;
        let r0 = 4.0 / (s * g);
        let t0 = 2.0 / s;
        match self.family {
            Family::A => (r0, (s.powf(e.c) / lambda).powf(1.0 / (self.delta + 1.0)).max(t0)),
            Family::B => ((s.powf(e.b) * phi_max / lambda).powf(1.0 / (dp + nf)).max(r0), t0),
            Family::C => {
                let r = (s.powf(e.a) * phi_max / lambda).powf(1.0 / dp).max(r0);
                (r, g * r + 1.0 / s)
            }
            Family::D => {
                let r = (s.powf(e.b) * phi_max * t0.powf(-nf) / lambda).powf(1.0 / dp).max(r0);
                let t = (s.powf(e.b) * phi_max * r0.powf(-dp) / lambda).powf(1.0 / nf).max(t0);
                (r, t)
            }
            Family::E { j } => {
                let r = (s.powf(e.a) * 2f64.powf(-(j as f64) * nf) * phi_max / lambda)
                    .powf(1.0 / dp)
                    .max(r0);
                (r, 2.0 * g * r)
            }
            Family::ESum => {
                let r = (s.powf(e.a) * 2f64.powf(-nf) * phi_max / lambda).powf(1.0 / dp).max(r0);
                (r, 2.0 * g * r)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CountingConfig {
    /// λ spans this many octaves below the envelope maximum.
    pub octaves: usize,
    pub per_octave: usize,
    /// Slope fitted over the lowest `fit_octaves`.
    pub fit_octaves: usize,
    pub nr: usize,
    pub nt: usize,
    /// Explicit `(r_max, t_max)`; the default encloses the level set at the
    /// smallest λ.
    pub box_override: Option<(f64, f64)>,
}

impl Default for CountingConfig {
    fn default() -> Self {
        Self {
            octaves: 16,
            per_octave: 8,
            fit_octaves: 8,
            nr: 2048,
            nt: 2048,
            box_override: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeMeasure {
    pub lambdas: Vec<f64>,
    pub measures: Vec<f64>,
    /// `sup_λ λ^p |{env > λ}| / bound_scale`.
    pub constant: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub boundary_fraction: f64,
    pub r_max: f64,
    pub t_max: f64,
}

/// `|{env > λ}|` in polar coordinates: a cell-centered `(r, |t|)` grid with
/// weight `2 r^{d-1} Δr Δt`, and a sum over the directions of `table`
/// (`{Φ F > λ} = {F > λ/Φ}` direction by direction).
pub fn envelope_measure(env: &Envelope, table: &PhiTable, cfg: &CountingConfig) -> Result<EnvelopeMeasure> {
    let phi_max = if env.family.uses_phi() {
        table.values.iter().copied().fold(0.0, f64::max)
    } else {
        1.0
    };
    // probe the maximum on a coarse pass of the default box at a high level
    let (r_max, t_max) = match cfg.box_override {
        Some(b) => b,
        None => {
            let top = envelope_peak(env, phi_max);
            let low = top * 2f64.powi(-(cfg.octaves as i32));
            let (r, t) = env.effective_box(low, phi_max);
            (1.05 * r, 1.05 * t)
        }
    };
    let dr = r_max / cfg.nr as f64;
    let dt = t_max / cfg.nt as f64;
    let dm1 = env.d as i32 - 1;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut edge: Vec<f64> = Vec::new();
    for i in 0..cfg.nr {
        let r = (i as f64 + 0.5) * dr;
        let w = 2.0 * r.powi(dm1) * dr * dt;
        for k in 0..cfg.nt {
            let t = (k as f64 + 0.5) * dt;
            let v = env.radial(r, t);
            if v > 0.0 {
                cells.push((v, w));
                if i + 1 == cfg.nr || k + 1 == cfg.nt {
                    edge.push(v);
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(LabError::BoxTooSmall(format!(
            "no cell of the {r_max} × {t_max} box meets the {} region",
            env.family.name()
        )));
    }
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let values: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let mut cum = Vec::with_capacity(cells.len());
    let mut acc = 0.0;
    for c in &cells {
        acc += c.1;
        cum.push(acc);
    }
    let above = |level: f64| -> f64 {
        let k = values.partition_point(|&v| v > level);
        if k == 0 {
            0.0
        } else {
            cum[k - 1]
        }
    };

    let top = values[0] * phi_max;
    let lambdas: Vec<f64> = (1..=cfg.octaves * cfg.per_octave)
        .map(|k| top * 2f64.powf(-(k as f64) / cfg.per_octave as f64))
        .collect();
    let lambda_min = *lambdas.last().unwrap();
    let counted = values.partition_point(|&v| v * phi_max > lambda_min);
    let on_edge = edge.iter().filter(|&&v| v * phi_max > lambda_min).count();
    let boundary_fraction = on_edge as f64 / counted.max(1) as f64;
    if boundary_fraction > 0.01 {
        return Err(LabError::BoxTooSmall(format!(
            "{:.1}% of the counted cells of {} touch the box edge; enlarge (r_max, t_max) = ({r_max}, {t_max}) to at least ({}, {})",
            100.0 * boundary_fraction,
            env.family.name(),
            2.0 * r_max,
            2.0 * t_max
        )));
    }

    let sphere: f64 = table.weights().iter().sum();
    let measures: Vec<f64> = lambdas
        .iter()
        .map(|&lam| {
            if env.family.uses_phi() {
                table
                    .values
                    .iter()
                    .zip(table.weights())
                    .map(|(phi, w)| if *phi > 0.0 { w * above(lam / phi) } else { 0.0 })
                    .sum()
            } else {
                sphere * above(lam)
            }
        })
        .collect();

    let scale = env.bound_scale();
    let constant = lambdas
        .iter()
        .zip(&measures)
        .map(|(l, m)| l.powf(env.p) * m / scale)
        .fold(0.0, f64::max);
    let fit_floor = lambda_min * 2f64.powi(cfg.fit_octaves as i32);
    let (fx, fy): (Vec<f64>, Vec<f64>) = lambdas
        .iter()
        .zip(&measures)
        .filter(|(l, m)| **l <= fit_floor * (1.0 + 1e-12) && **m > 0.0)
        .map(|(l, m)| (*l, *m))
        .unzip();
    let fit = fit_power_law(&fx, &fy)?;
    Ok(EnvelopeMeasure {
        lambdas,
        measures,
        constant,
        slope: fit.slope,
        r_squared: fit.r_squared,
        boundary_fraction,
        r_max,
        t_max,
    })
}

/// Supremum of the envelope, reached at the inner corner of its region.
fn envelope_peak(env: &Envelope, phi_max: f64) -> f64 {
    let s = 2f64.powi(env.l);
    let r0 = 4.0 / (s * env.gamma);
    let t0 = 2.0 / s;
    let e = &env.exps;
    let dp = env.d as f64 / env.p;
    let nf = e.n as f64;
    let v = match env.family {
        Family::A => s.powf(e.c) * t0.powf(-env.delta - 1.0),
        Family::B => s.powf(e.b) * r0.powf(-dp - nf),
        Family::C => s.powf(e.a) * r0.powf(-dp),
        Family::D => s.powf(e.b) * r0.powf(-dp) * t0.powf(-nf),
        Family::E { j } => s.powf(e.a) * 2f64.powf(-(j as f64) * nf) * r0.powf(-dp),
        Family::ESum => s.powf(e.a) * 2f64.powf(-nf) * r0.powf(-dp),
    };
    v * phi_max
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma43Row {
    pub l: i32,
    pub constant: f64,
    pub slope: f64,
    pub r_squared: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma43Report {
    pub family: Family,
    pub case: Case,
    pub p: f64,
    pub d: usize,
    pub exps: Exponents,
    pub rows: Vec<Lemma43Row>,
    /// `max / min` of the constants over the levels.
    pub constant_spread: f64,
    /// `N > max{(d+1)(1/p-1), 1/p}`, the condition for summing `ℰ_{jl}` over `j`.
    pub j_summable: bool,
}

pub fn lemma43_measure_check(
    family: Family,
    case: Case,
    p: f64,
    gamma: f64,
    table: &PhiTable,
    levels: &[i32],
    cfg: &CountingConfig,
) -> Result<Lemma43Report> {
    let d = table.directions().first().map(|v| v.len()).unwrap_or(2);
    let mut rows = Vec::new();
    let mut exps = None;
    for &l in levels {
        let env = Envelope::new(family, case, l, d, p, gamma)?;
        exps = Some(env.exps);
        let m = envelope_measure(&env, table, cfg)?;
        rows.push(Lemma43Row {
            l,
            constant: m.constant,
            slope: m.slope,
            r_squared: m.r_squared,
        });
    }
    let exps = exps.ok_or_else(|| LabError::Input("no levels requested".into()))?;
    let hi = rows.iter().map(|r| r.constant).fold(0.0, f64::max);
    let lo = rows.iter().map(|r| r.constant).fold(f64::INFINITY, f64::min);
    let bound = ((d + 1) as f64 * (1.0 / p - 1.0)).max(1.0 / p);
    Ok(Lemma43Report {
        family,
        case,
        p,
        d,
        exps,
        rows,
        constant_spread: hi / lo,
        j_summable: exps.n as f64 > bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caps::{default_r_grid, CapGeometry};
    use crate::geometry::DistanceFunction;
    use std::f64::consts::PI;

    fn euclid_table() -> PhiTable {
        let df = DistanceFunction::euclidean(2).unwrap();
        PhiTable::build(&CapGeometry::new(&df).unwrap(), 16, &default_r_grid()).unwrap()
    }

    #[test]
    fn exponents_and_order() {
        assert_eq!(default_order(2, 2.0 / 3.0), 2);
        assert_eq!(default_order(2, 0.5), 4);
        let e = lemma43_exponents(2, 2.0 / 3.0, Case::I, 2).unwrap();
        assert!((e.h + 1.0).abs() < 1e-12 && (e.a - 0.0).abs() < 1e-12 && (e.c - 0.5).abs() < 1e-12);
        let e = lemma43_exponents(2, 2.0 / 3.0, Case::II, 2).unwrap();
        assert!((e.h - (5.0 * 2.0 / 3.0 - 3.0)).abs() < 1e-12 && (e.b - 0.0).abs() < 1e-12);
    }

    #[test]
    fn a_envelope_value() {
        let env = Envelope::new(Family::A, Case::I, 0, 2, 2.0 / 3.0, 1.0).unwrap();
        assert!((env.eval(&[0.0, 0.0], 4.0, 7.0) - 0.03125).abs() < 1e-15);
        assert_eq!(env.eval(&[5.0, 0.0], 4.0, 1.0), 0.0);
        assert_eq!(env.eval(&[0.0, 0.0], 1.0, 1.0), 0.0);
    }

    #[test]
    fn e_pieces_drop_by_two_to_the_n() {
        let p = 2.0 / 3.0;
        let e1 = Envelope::new(Family::E { j: 1 }, Case::I, 0, 2, p, 1.0).unwrap();
        let e2 = Envelope::new(Family::E { j: 2 }, Case::I, 0, 2, p, 1.0).unwrap();
        let sum = Envelope::new(Family::ESum, Case::I, 0, 2, p, 1.0).unwrap();
        // gap 1.5 lies in the j = 1 shell, gap 3 in the j = 2 shell, same |x|
        let (v1, v2) = (e1.radial(10.0, 11.5), e2.radial(10.0, 13.0));
        assert!((v2 / v1 - 0.25).abs() < 1e-14);
        assert_eq!(sum.radial(10.0, 11.5), v1);
        assert_eq!(sum.radial(10.0, 13.0), v2);
    }

    #[test]
    fn a_measure_matches_closed_form() {
        let table = euclid_table();
        let p = 2.0 / 3.0;
        for l in [-1, 0, 2] {
            let env = Envelope::new(Family::A, Case::I, l, 2, p, 1.0).unwrap();
            let m = envelope_measure(&env, &table, &CountingConfig::default()).unwrap();
            let s = 2f64.powi(l);
            let ra = 4.0 / s;
            let (dr, dt) = (m.r_max / 2048.0, m.t_max / 2048.0);
            for (lam, got) in m.lambdas.iter().zip(&m.measures).step_by(8) {
                let tmax = (s.powf(env.exps.c) / lam).powf(1.0 / (env.delta + 1.0));
                let want = PI * ra * ra * 2.0 * (tmax - 2.0 / s).max(0.0);
                // at most one cell column or row misplaced on each edge
                let slack = PI * ra * ra * 2.0 * 2.0 * dt + want * 4.0 * dr / ra;
                assert!((got - want).abs() <= slack, "l={l} λ={lam}: {got} vs {want}");
            }
            assert!((m.slope + 1.0 / (env.delta + 1.0)).abs() < 0.1, "{}", m.slope);
        }
    }

    #[test]
    fn c_measure_matches_closed_form() {
        let table = euclid_table();
        let p = 2.0 / 3.0;
        let env = Envelope::new(Family::C, Case::I, 1, 2, p, 1.0).unwrap();
        let m = envelope_measure(&env, &table, &CountingConfig::default()).unwrap();
        let s: f64 = 2.0;
        let r0 = 4.0 / s;
        let phi = table.values[0];
        for (lam, got) in m.lambdas.iter().zip(&m.measures).step_by(8) {
            let r = (s.powf(env.exps.a) * phi / lam).powf(p / 2.0);
            if r < 2.0 * r0 {
                continue;
            }
            let want = 4.0 / s * 2.0 * PI * (r * r - r0 * r0) / 2.0;
            assert!((got - want).abs() <= 3e-2 * want, "λ={lam}: {got} vs {want}");
        }
        assert!((m.slope + p).abs() < 0.1, "{}", m.slope);
    }

    #[test]
    fn constants_do_not_drift_with_level() {
        let table = euclid_table();
        let cfg = CountingConfig {
            nr: 512,
            nt: 512,
            ..CountingConfig::default()
        };
        for case in [Case::I, Case::II] {
            for fam in [Family::A, Family::B, Family::C, Family::D, Family::ESum] {
                let r = lemma43_measure_check(fam, case, 2.0 / 3.0, 1.0, &table, &[-2, 0, 2], &cfg).unwrap();
                assert!(r.constant_spread < 1.2, "{fam:?} {case:?}: {:?}", r.rows);
            }
        }
    }

    #[test]
    fn small_box_is_refused() {
        let table = euclid_table();
        let env = Envelope::new(Family::C, Case::I, 0, 2, 2.0 / 3.0, 1.0).unwrap();
        let cfg = CountingConfig {
            box_override: Some((5.0, 9.0)),
            nr: 256,
            nt: 256,
            ..CountingConfig::default()
        };
        let e = envelope_measure(&env, &table, &cfg).unwrap_err();
        assert!(e.is_refusal(), "{e}");
    }
}
