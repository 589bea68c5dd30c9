//! Quadrature for the kernels
//! `K(x,t) = (2π)^{-(d+1)} ∫∫ e^{i⟨x,ξ⟩+itτ} S(1-ρ(ξ)/|τ|) ψ(2^{-l}|τ|) dξ dτ`.
//!
//! With `ξ = rζ`, `dξ = r^{d-1}⟨ζ,n(ζ)⟩ dr dσ(ζ)` the integral becomes
//! `∫_0^{2^{l+1}} r^{d-1} G(t,r) F(rx) dr` where
//! `G(t,r) = 2∫_{τ>r} cos(tτ) S(1-r/τ) ψ(2^{-l}τ) dτ` and
//! `F(y) = ∫ e^{i⟨y,ζ⟩} ⟨ζ,n⟩ dσ(ζ)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::windows::{make_windows_with, Bump, SmoothWindow};
use crate::caps::angular_speed_bound;
use crate::error::{LabError, Result};
use crate::geometry::{gamma_sup, unit_sphere_rule, DistanceFunction};
use crate::linalg::{dot, norm};
use crate::quadrature::{composite_panel_count, push_composite, push_graded, GaussLegendre, Resolution};

/// Which part of the Córdoba splitting of `(1 - ρ/|τ|)_+^δ` to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Localization {
    /// The whole symbol.
    Full,
    /// `φ(2^{k+1} v) v^δ`, `k ≥ 1`.
    Piece(u32),
    /// `(1 - Σ_{k≥1} φ(2^{k+1} v)) v^δ`, the smooth part away from the edge.
    Remainder,
    /// `Σ_{k≥1} φ(2^{k+1} v) v^δ`.
    Localized,
}

#[derive(Clone, Debug)]
pub struct KernelRequest {
    pub delta: f64,
    pub l: i32,
    pub k: Option<u32>,
    pub x: Vec<f64>,
    pub t: f64,
    pub resolution: Resolution,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSample {
    pub value: Complex64,
    pub r_nodes: usize,
    pub tau_nodes: usize,
    pub sphere_nodes: usize,
}

pub type AngularWeight<'a> = dyn Fn(&[f64]) -> f64 + Sync + 'a;

/// Shared quadrature state for kernel evaluations on one gauge.
#[derive(Clone, Debug)]
pub struct KernelLab {
    df: DistanceFunction,
    gamma: f64,
    speed: f64,
    psi: SmoothWindow,
    phi: SmoothWindow,
    rule: GaussLegendre,
    check_rule: GaussLegendre,
    pub resolution: Resolution,
    pub max_sphere_nodes: usize,
}

impl KernelLab {
    pub fn new(df: &DistanceFunction) -> Result<Self> {
        Self::with_bump(df, Bump::Standard)
    }

    pub fn with_bump(df: &DistanceFunction, bump: Bump) -> Result<Self> {
        let (psi, phi) = make_windows_with(bump);
        Ok(Self {
            df: df.clone(),
            gamma: gamma_sup(df)?.gamma,
            speed: angular_speed_bound(df)?,
            psi,
            phi,
            rule: GaussLegendre::new(16),
            check_rule: GaussLegendre::new(24),
            resolution: Resolution::default(),
            max_sphere_nodes: 1 << 17,
        })
    }

    pub fn df(&self) -> &DistanceFunction {
        &self.df
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn windows(&self) -> (SmoothWindow, SmoothWindow) {
        (self.psi, self.phi)
    }

    fn shape(&self, loc: Localization, delta: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let base = v.powf(delta);
        match loc {
            Localization::Full => base,
            Localization::Piece(k) => base * self.phi.eval(2f64.powi(k as i32 + 1) * v),
            Localization::Remainder => base * (1.0 - self.phi.tail_sum(v)),
            Localization::Localized => base * self.phi.tail_sum(v),
        }
    }

    /// `τ` interval carrying the symbol at radius `r`, and whether the
    /// `v^δ` edge at `τ = r` lies on it.
    fn tau_range(&self, loc: Localization, l: i32, r: f64) -> Option<(f64, f64, bool)> {
        let a = 2f64.powi(l);
        let (lo, hi) = (0.5 * a, 2.0 * a);
        let (mut s_lo, mut s_hi) = match loc {
            Localization::Full => (r, f64::INFINITY),
            Localization::Piece(k) => {
                let k = k as i32;
                (r / (1.0 - 2f64.powi(-k - 2)), r / (1.0 - 2f64.powi(-k)))
            }
            // v > 1/4
            Localization::Remainder => (4.0 * r / 3.0, f64::INFINITY),
            // v < 1/2
            Localization::Localized => (r, 2.0 * r),
        };
        let singular = matches!(loc, Localization::Full | Localization::Localized) && s_lo > lo;
        s_lo = s_lo.max(lo);
        s_hi = s_hi.min(hi);
        if s_hi <= s_lo {
            return None;
        }
        Some((s_lo, s_hi, singular))
    }

    /// `G(t, r)` together with the number of τ nodes used.
    #[allow(clippy::too_many_arguments)]
    fn g_factor(
        &self,
        rule: &GaussLegendre,
        loc: Localization,
        delta: f64,
        l: i32,
        t: f64,
        r: f64,
        buf: &mut Vec<(f64, f64)>,
    ) -> (f64, usize) {
        let Some((lo, hi, singular)) = self.tau_range(loc, l, r) else {
            return (0.0, 0);
        };
        buf.clear();
        if singular {
            push_graded(rule, lo, hi, t.abs(), &self.resolution, buf);
        } else {
            push_composite(rule, lo, hi, t.abs(), &self.resolution, buf);
        }
        let a_inv = 2f64.powi(-l);
        let mut acc = 0.0;
        for &(tau, w) in buf.iter() {
            let v = (tau - r) / tau;
            let s = self.shape(loc, delta, v);
            if s == 0.0 {
                continue;
            }
            acc += w * (t * tau).cos() * s * self.psi.eval(a_inv * tau);
        }
        (2.0 * acc, buf.len())
    }

    fn sphere_nodes_for(&self, l: i32, max_abs_x: f64, per_period: f64) -> Result<(usize, Vec<(Vec<f64>, f64)>)> {
        let d = self.df.dim();
        let r_max = 2f64.powi(l + 1);
        let need = ((per_period * r_max * max_abs_x * self.speed).ceil() as usize)
            .max(64)
            .next_multiple_of(8);
        let count = if d == 2 {
            need
        } else {
            need.pow(d as u32 - 1) / 2usize.pow(d as u32 - 2)
        };
        if count > self.max_sphere_nodes {
            return Err(LabError::Resolution {
                what: format!("sphere quadrature at |x| = {max_abs_x:.3}, l = {l}"),
                required: count,
                limit: self.max_sphere_nodes,
            });
        }
        let mut nodes = Vec::new();
        for (omega, w) in unit_sphere_rule(d, need) {
            let rho = self.df.rho(&omega)?;
            let zeta: Vec<f64> = omega.iter().map(|v| v / rho).collect();
            // ⟨ζ, n⟩ dσ = ρ(ω)^{-d} dω
            nodes.push((zeta, w * rho.powi(-(d as i32))));
        }
        Ok((need, nodes))
    }

    /// Quadrature at level `l` for several `x` sharing one `t`.
    pub fn eval_batch(
        &self,
        delta: f64,
        l: i32,
        loc: Localization,
        xs: &[Vec<f64>],
        t: f64,
        angular: Option<&AngularWeight<'_>>,
    ) -> Result<Vec<KernelSample>> {
        self.eval_with(&self.rule, 16.0, delta, l, loc, xs, t, angular)
    }

    #[allow(clippy::too_many_arguments)]
    fn eval_with(
        &self,
        rule: &GaussLegendre,
        sphere_per_period: f64,
        delta: f64,
        l: i32,
        loc: Localization,
        xs: &[Vec<f64>],
        t: f64,
        angular: Option<&AngularWeight<'_>>,
    ) -> Result<Vec<KernelSample>> {
        if !(delta > 0.0) {
            return Err(LabError::Domain(format!("delta must be positive, got {delta}")));
        }
        if let Localization::Piece(0) = loc {
            return Err(LabError::Domain("Córdoba pieces start at k = 1".into()));
        }
        let d = self.df.dim();
        for x in xs {
            if x.len() != d {
                return Err(LabError::Domain(format!("expected a {d}-vector")));
            }
        }
        let max_abs_x = xs.iter().map(|x| norm(x)).fold(0.0, f64::max);
        let (_, nodes) = self.sphere_nodes_for(l, max_abs_x, sphere_per_period)?;
        let r_max = 2f64.powi(l + 1);
        let omega_r = t.abs() + self.gamma * max_abs_x;
        let panels = composite_panel_count(rule, 0.0, r_max, omega_r, &self.resolution);
        if panels * rule.len() > self.resolution.max_nodes {
            return Err(LabError::Resolution {
                what: format!("radial quadrature at |t| + γ|x| = {omega_r:.3}"),
                required: panels * rule.len(),
                limit: self.resolution.max_nodes,
            });
        }
        let mut r_nodes = Vec::new();
        push_composite(rule, 0.0, r_max, omega_r, &self.resolution, &mut r_nodes);

        let mut buf = Vec::new();
        let mut tau_nodes = 0;
        let radial: Vec<(f64, f64)> = r_nodes
            .iter()
            .map(|&(r, w)| {
                let (g, n) = self.g_factor(rule, loc, delta, l, t, r, &mut buf);
                tau_nodes += n;
                (r, w * r.powi(d as i32 - 1) * g)
            })
            .filter(|&(_, w)| w != 0.0)
            .collect();

        let norm_const = (2.0 * PI).powi(-(d as i32 + 1));
        let mut out = Vec::with_capacity(xs.len());
        for x in xs {
            let weights: Vec<f64> = nodes
                .iter()
                .map(|(z, w)| match angular {
                    Some(f) => w * f(z),
                    None => *w,
                })
                .collect();
            let phases: Vec<f64> = nodes.iter().map(|(z, _)| dot(x, z)).collect();
            let mut acc = Complex64::new(0.0, 0.0);
            for &(r, wr) in &radial {
                let mut f = Complex64::new(0.0, 0.0);
                for (p, w) in phases.iter().zip(&weights) {
                    if *w == 0.0 {
                        continue;
                    }
                    let (s, c) = (r * p).sin_cos();
                    f.re += w * c;
                    f.im += w * s;
                }
                acc += wr * f;
            }
            out.push(KernelSample {
                value: norm_const * acc,
                r_nodes: r_nodes.len(),
                tau_nodes,
                sphere_nodes: nodes.len(),
            });
        }
        Ok(out)
    }

    pub fn eval_level(&self, delta: f64, l: i32, loc: Localization, x: &[f64], t: f64) -> Result<KernelSample> {
        Ok(self.eval_batch(delta, l, loc, &[x.to_vec()], t, None)?[0])
    }

    /// Independent quadrature of the level-`l` kernel in unscaled variables,
    /// with a 24-point rule and a denser sphere rule, for validating the
    /// scaling path.
    pub fn eval_direct(&self, delta: f64, l: i32, loc: Localization, x: &[f64], t: f64) -> Result<KernelSample> {
        Ok(self.eval_with(&self.check_rule, 20.0, delta, l, loc, &[x.to_vec()], t, None)?[0])
    }

    /// `2^{(d+1)l} K_0(2^l x, 2^l t)`.
    pub fn eval_scaled(&self, delta: f64, l: i32, loc: Localization, x: &[f64], t: f64) -> Result<KernelSample> {
        let s = 2f64.powi(l);
        let xs: Vec<f64> = x.iter().map(|v| s * v).collect();
        let mut sample = self.eval_level(delta, 0, loc, &xs, s * t)?;
        sample.value *= 2f64.powi((self.df.dim() as i32 + 1) * l);
        Ok(sample)
    }

    pub fn request(&self, req: &KernelRequest) -> Result<KernelSample> {
        let mut lab = self.clone();
        lab.resolution = req.resolution;
        let loc = match req.k {
            Some(k) => Localization::Piece(k),
            None => Localization::Full,
        };
        lab.eval_scaled(req.delta, req.l, loc, &req.x, req.t)
    }
}

pub fn kernel_k0(lab: &KernelLab, delta: f64, x: &[f64], t: f64) -> Result<Complex64> {
    Ok(lab.eval_level(delta, 0, Localization::Full, x, t)?.value)
}

pub fn kernel_kl(lab: &KernelLab, delta: f64, l: i32, x: &[f64], t: f64) -> Result<Complex64> {
    Ok(lab.eval_scaled(delta, l, Localization::Full, x, t)?.value)
}

pub fn kernel_kkl(lab: &KernelLab, delta: f64, k: u32, l: i32, x: &[f64], t: f64) -> Result<Complex64> {
    Ok(lab.eval_scaled(delta, l, Localization::Piece(k), x, t)?.value)
}
