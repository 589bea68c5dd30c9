//! Least-squares power-law fits in log-log coordinates.

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    /// Exponent `k` in `y ≈ c · x^k`.
    pub slope: f64,
    /// `ln c`.
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl PowerLawFit {
    pub fn constant(&self) -> f64 {
        self.intercept.exp()
    }

    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

/// Ordinary least squares on `(ln x, ln y)`. Non-positive samples are
/// rejected.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(LabError::Input(format!(
            "fit_power_law: {} abscissae vs {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(LabError::DegenerateFit("need at least two points".into()));
    }
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(LabError::DegenerateFit(format!(
                "log-log fit needs positive finite samples, got ({x}, {y})"
            )));
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    linear_fit(&lx, &ly)
}

/// Ordinary least squares `y ≈ intercept + slope · x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx <= f64::EPSILON * n * (1.0 + mx * mx) {
        return Err(LabError::DegenerateFit("abscissa variance is zero".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(PowerLawFit {
        slope,
        intercept,
        r_squared,
        points: xs.len(),
    })
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > 0.0 && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Mann–Kendall trend statistic of a sequence in index order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendTest {
    /// Concordant minus discordant pairs.
    pub s: i64,
    /// Exact one-sided p-value for an increasing trend, `P(S ≥ s)` under
    /// exchangeability. Ties count as neither.
    pub p_increasing: f64,
}

/// Exact Mann–Kendall test via the distribution of inversion counts.
pub fn mann_kendall(values: &[f64]) -> Result<TrendTest> {
    let n = values.len();
    if !(3..=64).contains(&n) {
        return Err(LabError::Input(format!("trend test needs 3..=64 values, got {n}")));
    }
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            if values[j] > values[i] {
                s += 1;
            } else if values[j] < values[i] {
                s -= 1;
            }
        }
    }
    // counts[k]: permutations of the current length with k inversions
    let mut counts = vec![1.0f64];
    for m in 1..n {
        let mut next = vec![0.0; counts.len() + m];
        for (k, &c) in counts.iter().enumerate() {
            for slot in &mut next[k..=k + m] {
                *slot += c;
            }
        }
        counts = next;
    }
    let total: f64 = counts.iter().sum();
    let pairs = (n * (n - 1) / 2) as i64;
    // S = pairs - 2·inversions
    let tail: f64 = counts
        .iter()
        .enumerate()
        .filter(|(inv, _)| pairs - 2 * *inv as i64 >= s)
        .map(|(_, c)| c)
        .sum();
    Ok(TrendTest {
        s,
        p_increasing: tail / total,
    })
}
