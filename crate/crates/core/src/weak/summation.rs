//! Summing weak-type pieces: the Stein–Taibleson–Weiss bound and its
//! dyadically weighted variant, checked on synthetic suites.

use serde::Serialize;

use super::quasinorm::Magnitudes;
use crate::error::{LabError, Result};

/// `(2 - p)/(1 - p)`.
pub fn stw_constant(p: f64) -> f64 {
    (2.0 - p) / (1.0 - p)
}

fn lp_mass(weights: &[f64], p: f64) -> f64 {
    weights.iter().map(|a| a.powf(p)).sum()
}

/// `f(x) = Σ_k w_k |x - c_k|^{-e}` on the line, with exact level-set
/// measures: `f` is monotone outside the outermost centers and convex
/// between neighbouring ones.
#[derive(Clone, Debug)]
pub struct PowerLawSum {
    centers: Vec<f64>,
    weights: Vec<f64>,
    exponent: f64,
}

impl PowerLawSum {
    pub fn new(centers: &[f64], weights: &[f64], exponent: f64) -> Result<Self> {
        if centers.len() != weights.len() || centers.is_empty() {
            return Err(LabError::Input("need one positive weight per center".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || !(exponent > 0.0) {
            return Err(LabError::Input(
                "weights must be nonnegative and the exponent positive".into(),
            ));
        }
        let mut pairs: Vec<(f64, f64)> = centers
            .iter()
            .copied()
            .zip(weights.iter().copied())
            .filter(|p| p.1 > 0.0)
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (c, w) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += w,
                _ => merged.push((c, w)),
            }
        }
        if merged.is_empty() {
            return Err(LabError::Input("all weights vanish".into()));
        }
        let (centers, weights) = merged.into_iter().unzip();
        Ok(Self {
            centers,
            weights,
            exponent,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * (x - c).abs().powf(-self.exponent))
            .sum()
    }

    /// Point in `[lo, hi]` where the monotone `f` crosses `level`.
    fn crossing(&self, mut lo: f64, mut hi: f64, level: f64, increasing: bool) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.eval(mid) > level) == increasing {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn argmin(&self, mut a: f64, mut b: f64) -> f64 {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
        let (mut f1, mut f2) = (self.eval(x1), self.eval(x2));
        for _ in 0..200 {
            if b - a <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
                break;
            }
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = self.eval(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = self.eval(x2);
            }
        }
        if f1 < f2 {
            x1
        } else {
            x2
        }
    }

    /// `|{x ∈ ℝ : f(x) > λ}|`.
    pub fn measure_above(&self, lambda: f64) -> f64 {
        let c = &self.centers;
        let n = c.len();
        let mut total = 0.0;
        // left tail: f increases towards c[0]
        let mut step = 1.0;
        while self.eval(c[0] - step) > lambda {
            step *= 2.0;
        }
        total += c[0] - self.crossing(c[0] - step, c[0], lambda, true);
        let mut step = 1.0;
        while self.eval(c[n - 1] + step) > lambda {
            step *= 2.0;
        }
        total += self.crossing(c[n - 1], c[n - 1] + step, lambda, false) - c[n - 1];
        for w in c.windows(2) {
            let (a, b) = (w[0], w[1]);
            let m = self.argmin(a, b);
            if self.eval(m) > lambda {
                total += b - a;
            } else {
                total += self.crossing(a, m, lambda, false) - a;
                total += b - self.crossing(m, b, lambda, true);
            }
        }
        total
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SumCheck {
    pub p: f64,
    pub lambdas: Vec<f64>,
    pub measured: Vec<f64>,
    pub bound: Vec<f64>,
    /// `max_λ measured / bound`; the lemma asserts `≤ 1`.
    pub worst_ratio: f64,
}

fn finish(p: f64, lambdas: &[f64], measured: Vec<f64>, scale: f64) -> SumCheck {
    let bound: Vec<f64> = lambdas.iter().map(|l| scale * l.powf(-p)).collect();
    let worst_ratio = measured.iter().zip(&bound).map(|(m, b)| m / b).fold(0.0, f64::max);
    SumCheck {
        p,
        lambdas: lambdas.to_vec(),
        measured,
        bound,
        worst_ratio,
    }
}

/// Sampled pieces `h_k ≥ 0` on a shared grid with cell volume `cell`, each
/// obeying `|{h_k > λ}| ≤ A λ^{-p}` on `lambdas`.
pub fn stw_sum_check(
    p: f64,
    pieces: &[Vec<f64>],
    cell: f64,
    a_const: f64,
    weights: &[f64],
    lambdas: &[f64],
) -> Result<SumCheck> {
    if !(p > 0.0 && p < 1.0) {
        return Err(LabError::Domain(format!("p must lie in (0, 1), got {p}")));
    }
    if pieces.len() != weights.len() || pieces.is_empty() {
        return Err(LabError::Input("one weight per piece".into()));
    }
    let len = pieces[0].len();
    for (k, piece) in pieces.iter().enumerate() {
        if piece.len() != len {
            return Err(LabError::Shape(format!(
                "piece {k} has {} samples, expected {len}",
                piece.len()
            )));
        }
        let m = Magnitudes::new(piece.clone(), cell);
        for &l in lambdas {
            if m.measure_above(l) > a_const * l.powf(-p) * (1.0 + 1e-12) {
                return Err(LabError::Input(format!("piece {k} violates its weak bound at λ = {l}")));
            }
        }
    }
    let mut sum = vec![0.0; len];
    for (piece, &a) in pieces.iter().zip(weights) {
        for (s, v) in sum.iter_mut().zip(piece) {
            *s += a * v;
        }
    }
    let m = Magnitudes::new(sum, cell);
    let measured = lambdas.iter().map(|&l| m.measure_above(l)).collect();
    Ok(finish(
        p,
        lambdas,
        measured,
        stw_constant(p) * lp_mass(weights, p) * a_const,
    ))
}

/// Pieces `h_k(x) = |x - c_k|^{-1/p}` on the line, for which
/// `|{h_k > λ}| = 2 λ^{-p}` exactly.
pub fn stw_power_law_check(p: f64, centers: &[f64], weights: &[f64], lambdas: &[f64]) -> Result<SumCheck> {
    if !(p > 0.0 && p < 1.0) {
        return Err(LabError::Domain(format!("p must lie in (0, 1), got {p}")));
    }
    let f = PowerLawSum::new(centers, weights, 1.0 / p)?;
    let measured = lambdas.iter().map(|&l| f.measure_above(l)).collect();
    Ok(finish(
        p,
        lambdas,
        measured,
        stw_constant(p) * lp_mass(weights, p) * 2.0,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma42Report {
    pub p: f64,
    pub a: f64,
    pub levels: usize,
    /// `sup_λ λ^p |{Σ_l |g_l| > λ}|`.
    pub empirical_constant: f64,
    /// Constant of a single piece, `2` for these power laws.
    pub piece_constant: f64,
    /// What the Stein–Taibleson–Weiss bound gives for the whole family.
    pub stw_bound: f64,
}

/// Pieces `g_l(x) = 2^{-al} |x - c_l|^{-1/p}` for `l = 1..=levels`, so
/// `|{|g_l| > λ}| = 2 · 2^{-alp} λ^{-p}`.
pub fn lemma42_check(p: f64, a: f64, centers: &[f64], lambdas: &[f64]) -> Result<Lemma42Report> {
    if !(p > 0.0 && p < 1.0) || !(a >= 0.0) {
        return Err(LabError::Domain(format!(
            "need 0 < p < 1 and a ≥ 0, got p = {p}, a = {a}"
        )));
    }
    let weights: Vec<f64> = (1..=centers.len()).map(|l| 2f64.powf(-a * l as f64)).collect();
    let f = PowerLawSum::new(centers, &weights, 1.0 / p)?;
    let empirical_constant = lambdas
        .iter()
        .map(|&l| l.powf(p) * f.measure_above(l))
        .fold(0.0, f64::max);
    Ok(Lemma42Report {
        p,
        a,
        levels: centers.len(),
        empirical_constant,
        piece_constant: 2.0,
        stw_bound: stw_constant(p) * 2.0 * lp_mass(&weights, p),
    })
}

/// Deterministic spread-out centers in `[0, 4)`.
pub fn suite_centers(count: usize) -> Vec<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    (1..=count).map(|k| 4.0 * (k as f64 * g).fract()).collect()
}
