//! Smooth angular partition of unity on `Σ_ρ` with cutoffs `Ξ_ℓ` equal to
//! one on the cap `B(ζ_ℓ, ε) ∩ Σ_ρ` and supported in `B(ζ_ℓ, 2ε)`,
//! `ε = 2^{-M/2}`, extended to `ℝ^d \ {0}` by `Π_ℓ(ξ) = Ξ_ℓ(ξ/ρ(ξ))`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::caps::CapGeometry;
use crate::error::{LabError, Result};
use crate::geometry::{parametrize_sphere, DistanceFunction};
use crate::linalg::{norm, sub};

/// Plane centers are spaced this many `ε` apart in arclength.
const PLANE_SPACING: f64 = 3.3;
/// Minimum separation, in units of `ε`, of the greedy net used for `d ≥ 3`.
const NET_SEPARATION: f64 = 1.8;

fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// 1 on `[0, 1]`, 0 on `[2, ∞)`, smooth in between.
fn plateau(u: f64) -> f64 {
    let a = smooth_step(2.0 - u);
    let b = smooth_step(u - 1.0);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

#[derive(Clone, Debug)]
pub struct SpherePartition {
    df: DistanceFunction,
    m: u32,
    eps: f64,
    centers: Vec<Vec<f64>>,
}

impl SpherePartition {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    fn raw(&self, i: usize, zeta: &[f64]) -> f64 {
        plateau(norm(&sub(zeta, &self.centers[i])) / self.eps)
    }

    /// Nonzero `(ℓ, Ξ_ℓ(ζ))` at a sphere point.
    pub fn weights_at(&self, zeta: &[f64]) -> Vec<(usize, f64)> {
        let raw: Vec<(usize, f64)> = (0..self.centers.len())
            .map(|i| (i, self.raw(i, zeta)))
            .filter(|&(_, v)| v > 0.0)
            .collect();
        let total: f64 = raw.iter().map(|p| p.1).sum();
        if total == 0.0 {
            return Vec::new();
        }
        raw.into_iter().map(|(i, v)| (i, v / total)).collect()
    }

    /// `Ξ_ℓ(ζ)` for `ζ ∈ Σ_ρ`.
    pub fn xi(&self, l: usize, zeta: &[f64]) -> f64 {
        if self.raw(l, zeta) == 0.0 {
            return 0.0;
        }
        self.weights_at(zeta)
            .into_iter()
            .find(|p| p.0 == l)
            .map_or(0.0, |p| p.1)
    }

    /// `Π_ℓ(ξ) = Ξ_ℓ(ξ/ρ(ξ))`.
    pub fn pi(&self, l: usize, xi: &[f64]) -> Result<f64> {
        Ok(self.xi(l, &self.df.project(xi)?))
    }

    /// `Ξ_ℓ` as a weight on sphere nodes, for angular kernel pieces.
    pub fn angular_weight(&self, l: usize) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
        move |zeta: &[f64]| self.xi(l, zeta)
    }

    /// Property checks on sample sphere points.
    pub fn report(&self, samples: &[Vec<f64>]) -> Result<PartitionReport> {
        let d = self.df.dim();
        let mut min_sep = f64::INFINITY;
        for (i, a) in self.centers.iter().enumerate() {
            for b in &self.centers[i + 1..] {
                min_sep = min_sep.min(norm(&sub(a, b)));
            }
        }
        let mut covering = 0.0f64;
        let mut sum_error = 0.0f64;
        let mut plateau_misses = 0;
        let mut support_misses = 0;
        let mut grad = 0.0f64;
        let h = 1e-6;
        for z in samples {
            let nearest = self
                .centers
                .iter()
                .map(|c| norm(&sub(z, c)))
                .fold(f64::INFINITY, f64::min);
            covering = covering.max(nearest);
            let w = self.weights_at(z);
            sum_error = sum_error.max((w.iter().map(|p| p.1).sum::<f64>() - 1.0).abs());
            for (i, c) in self.centers.iter().enumerate() {
                let dist = norm(&sub(z, c));
                let v = w.iter().find(|p| p.0 == i).map_or(0.0, |p| p.1);
                if dist >= 2.0 * self.eps && v != 0.0 {
                    support_misses += 1;
                }
                if dist < self.eps && (v - 1.0).abs() > 1e-12 {
                    plateau_misses += 1;
                }
            }
            // first derivatives of Π_ℓ on 1/2 ≤ ρ ≤ 2
            for &(l, _) in &w {
                for s in [0.5, 1.0, 2.0] {
                    for k in 0..d {
                        let mut p: Vec<f64> = z.iter().map(|v| s * v).collect();
                        let mut q = p.clone();
                        p[k] += h;
                        q[k] -= h;
                        let g = (self.pi(l, &p)? - self.pi(l, &q)?) / (2.0 * h);
                        grad = grad.max(g.abs());
                    }
                }
            }
        }
        Ok(PartitionReport {
            count: self.centers.len(),
            count_ratio: self.centers.len() as f64 / 2f64.powf((d as f64 - 1.0) * self.m as f64 / 2.0),
            min_separation: min_sep / self.eps,
            covering_radius: covering / self.eps,
            max_sum_error: sum_error,
            plateau_misses,
            support_misses,
            derivative_constant: grad / 2f64.powf(self.m as f64 / 2.0),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub count: usize,
    /// `N_0 / 2^{(d-1)M/2}`.
    pub count_ratio: f64,
    /// Smallest center distance over `ε`.
    pub min_separation: f64,
    /// Largest sample-to-center distance over `ε`.
    pub covering_radius: f64,
    pub max_sum_error: f64,
    /// Samples within `ε` of a center where `Ξ_ℓ ≠ 1`.
    pub plateau_misses: usize,
    /// Samples at distance `≥ 2ε` where `Ξ_ℓ ≠ 0`.
    pub support_misses: usize,
    /// `max |∇Π_ℓ| / 2^{M/2}` over `1/2 ≤ ρ ≤ 2`.
    pub derivative_constant: f64,
}

/// Plane centers sit at equal arclength `≈ 3.3ε`, so neighbouring
/// supports overlap while every plateau cap meets no other support.
/// For `d ≥ 3` the centers are a greedy net of separation `1.8ε`, which
/// covers `Σ_ρ` by the supports but lets plateau caps overlap.
pub fn partition_sphere(df: &DistanceFunction, m: u32) -> Result<SpherePartition> {
    if m < 4 || !m.is_multiple_of(2) {
        return Err(LabError::Domain(format!("M must be an even integer ≥ 4, got {m}")));
    }
    let eps = 2f64.powf(-(m as f64) / 2.0);
    let d = df.dim();
    let centers = if d == 2 {
        let geom = CapGeometry::new(df)?;
        let total = geom.surface_area();
        let n = ((total / (PLANE_SPACING * eps)).floor() as usize).max(3);
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let target = total * k as f64 / n as f64;
            let (mut lo, mut hi) = (0.0, 2.0 * PI);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if geom.arclength(0.0, mid)? < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(geom.point_at(0.5 * (lo + hi))?);
        }
        out
    } else {
        let res = ((16.0 * PI / eps).ceil() as usize).next_multiple_of(2);
        let mut out: Vec<Vec<f64>> = Vec::new();
        for p in parametrize_sphere(df, res)? {
            if out.iter().all(|c| norm(&sub(c, &p.position)) >= NET_SEPARATION * eps) {
                out.push(p.position);
            }
        }
        out
    };
    Ok(SpherePartition {
        df: df.clone(),
        m,
        eps,
        centers,
    })
}
