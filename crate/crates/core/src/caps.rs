//! Spherical caps `B(ξ0, s)`, the decay-normalizing function `Φ`, and the
//! Fourier transform of surface measure.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::geometry::{gauss_point, parametrize_sphere, unit_sphere_rule, DistanceFunction, SpherePoint};
use crate::linalg::{dot, norm};
use crate::quadrature::GaussLegendre;
use crate::regression::log_space;

#[derive(Clone, Debug)]
pub struct CapQuery {
    pub base: SpherePoint,
    pub height: f64,
}

impl CapQuery {
    pub fn new(base: SpherePoint, height: f64) -> Result<Self> {
        if !(height > 0.0) {
            return Err(LabError::Domain(format!("cap height must be positive, got {height}")));
        }
        Ok(Self { base, height })
    }
}

/// Angular extent of a planar cap around its base angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CapArc {
    Full,
    Arc { lo: f64, hi: f64 },
}

/// Cap measures on `Σ_ρ`. In the plane the cap is an arc whose endpoints
/// are located by bisection and whose length is integrated exactly; in
/// higher dimension quadrature weights of member nodes are summed.
#[derive(Clone, Debug)]
pub struct CapGeometry {
    df: DistanceFunction,
    nodes: Vec<SpherePoint>,
    area: f64,
    arc_rule: GaussLegendre,
}

impl CapGeometry {
    pub fn new(df: &DistanceFunction) -> Result<Self> {
        let res = if df.dim() == 2 { 64 } else { 96 };
        Self::with_resolution(df, res)
    }

    /// `resolution` is the sphere node count for `d ≥ 3`; ignored in the plane.
    pub fn with_resolution(df: &DistanceFunction, resolution: usize) -> Result<Self> {
        let mut geom = Self {
            df: df.clone(),
            nodes: Vec::new(),
            area: 0.0,
            arc_rule: GaussLegendre::new(16),
        };
        if df.dim() == 2 {
            geom.area = geom.arclength(0.0, 2.0 * PI)?;
        } else {
            geom.nodes = parametrize_sphere(df, resolution)?;
            geom.area = geom.nodes.iter().map(|n| n.weight).sum();
        }
        Ok(geom)
    }

    pub fn df(&self) -> &DistanceFunction {
        &self.df
    }

    pub fn surface_area(&self) -> f64 {
        self.area
    }

    /// Sphere point at polar angle `theta` (plane only).
    pub fn point_at(&self, theta: f64) -> Result<Vec<f64>> {
        self.df.project(&[theta.cos(), theta.sin()])
    }

    /// Arclength density `|dζ/dθ|` of `θ ↦ ω(θ)/ρ(ω(θ))`.
    pub fn speed(&self, theta: f64) -> Result<f64> {
        let omega = [theta.cos(), theta.sin()];
        let r = self.df.rho(&omega)?;
        let n = self.df.normal(&omega)?;
        Ok(1.0 / (r * dot(&omega, &n)))
    }

    pub fn arclength(&self, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let panels = (((b - a) / (2.0 * PI)) * 64.0).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for i in 0..panels {
            let lo = a + i as f64 * h;
            let mid = lo + 0.5 * h;
            for (x, w) in self.arc_rule.nodes().iter().zip(self.arc_rule.weights()) {
                total += 0.5 * h * w * self.speed(mid + 0.5 * h * x)?;
            }
        }
        Ok(total)
    }

    fn tangent_gap(&self, base: &SpherePoint, theta: f64) -> Result<f64> {
        let z = self.point_at(theta)?;
        Ok(base
            .position
            .iter()
            .zip(&z)
            .zip(&base.normal)
            .map(|((a, b), n)| (a - b) * n)
            .sum())
    }

    /// Endpoints of the planar cap `{θ : gap(θ) < s}`.
    pub fn cap_arc(&self, base: &SpherePoint, s: f64) -> Result<CapArc> {
        if self.df.dim() != 2 {
            return Err(LabError::Domain("cap arcs exist only in the plane".into()));
        }
        let theta0 = base.position[1].atan2(base.position[0]);
        let minus_n: Vec<f64> = base.normal.iter().map(|v| -v).collect();
        let anti = gauss_point(&self.df, &minus_n)?;
        let theta_a = anti.position[1].atan2(anti.position[0]);
        let gap_max = self.tangent_gap(base, theta_a)?;
        if gap_max < s {
            return Ok(CapArc::Full);
        }
        let span_plus = (theta_a - theta0).rem_euclid(2.0 * PI);
        let span_minus = 2.0 * PI - span_plus;
        let hi = theta0 + self.bisect(base, s, theta0, span_plus)?;
        let lo = theta0 - self.bisect(base, s, theta0, -span_minus)?;
        Ok(CapArc::Arc { lo, hi })
    }

    /// Distance `u ∈ (0, |span|)` from `theta0` in the direction of `span`
    /// where the tangent gap reaches `s`.
    fn bisect(&self, base: &SpherePoint, s: f64, theta0: f64, span: f64) -> Result<f64> {
        let dir = span.signum();
        let mut a = 0.0;
        let mut b = span.abs();
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.tangent_gap(base, theta0 + dir * m)? < s {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }

    pub fn cap_measure(&self, base: &SpherePoint, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(LabError::Domain(format!("cap height must be positive, got {s}")));
        }
        if self.df.dim() == 2 {
            return match self.cap_arc(base, s)? {
                CapArc::Full => Ok(self.area),
                CapArc::Arc { lo, hi } => self.arclength(lo, hi),
            };
        }
        Ok(self
            .nodes
            .iter()
            .filter(|n| {
                let gap: f64 = base
                    .position
                    .iter()
                    .zip(&n.position)
                    .zip(&base.normal)
                    .map(|((a, b), nn)| (a - b) * nn)
                    .sum();
                gap < s
            })
            .map(|n| n.weight)
            .sum())
    }
}

pub fn cap_measure(df: &DistanceFunction, q: &CapQuery) -> Result<f64> {
    CapGeometry::new(df)?.cap_measure(&q.base, q.height)
}

/// The radius grid `[2^{-10}, 2^{14}]` with eight points per octave.
pub fn default_r_grid() -> Vec<f64> {
    log_space(2f64.powi(-10), 2f64.powi(14), 24 * 8 + 1)
}

#[derive(Clone, Debug)]
pub struct PhiProfile {
    pub direction: Vec<f64>,
    pub value: f64,
    pub r_grid: Vec<f64>,
    pub argmax_r: f64,
}

/// `Φ(θ) = sup_r σ[B(ξ(rθ), 1/r)] (1+r)^{(d-1)/2}` over a discrete r grid.
pub fn phi(geom: &CapGeometry, theta: &[f64], r_grid: &[f64]) -> Result<PhiProfile> {
    let d = geom.df().dim() as f64;
    let base = gauss_point(geom.df(), theta)?;
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for &r in r_grid {
        let v = geom.cap_measure(&base, 1.0 / r)? * (1.0 + r).powf(0.5 * (d - 1.0));
        if v > best.0 {
            best = (v, r);
        }
    }
    Ok(PhiProfile {
        direction: theta.iter().map(|v| v / norm(theta)).collect(),
        value: best.0,
        r_grid: r_grid.to_vec(),
        argmax_r: best.1,
    })
}

/// Tabulated `Φ` for repeated lookups. Plane tables use the midpoint angle
/// grid `θ_k = (k + 1/2)·2π/n`; higher-dimensional tables use the nodes of
/// `unit_sphere_rule`.
#[derive(Clone, Debug)]
pub struct PhiTable {
    dim: usize,
    directions: Vec<Vec<f64>>,
    weights: Vec<f64>,
    pub values: Vec<f64>,
    pub argmax_r: Vec<f64>,
}

impl PhiTable {
    pub fn build(geom: &CapGeometry, resolution: usize, r_grid: &[f64]) -> Result<Self> {
        let d = geom.df().dim();
        let (directions, weights): (Vec<Vec<f64>>, Vec<f64>) = if d == 2 {
            let h = 2.0 * PI / resolution as f64;
            (0..resolution)
                .map(|k| {
                    let t = (k as f64 + 0.5) * h;
                    (vec![t.cos(), t.sin()], h)
                })
                .unzip()
        } else {
            unit_sphere_rule(d, resolution).into_iter().unzip()
        };
        let profiles: Vec<PhiProfile> = directions
            .par_iter()
            .map(|dir| phi(geom, dir, r_grid))
            .collect::<Result<_>>()?;
        Ok(Self {
            dim: d,
            weights,
            values: profiles.iter().map(|p| p.value).collect(),
            argmax_r: profiles.iter().map(|p| p.argmax_r).collect(),
            directions,
        })
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Value at the table direction nearest to `x / |x|`.
    pub fn lookup(&self, x: &[f64]) -> f64 {
        if self.dim == 2 {
            let n = self.values.len();
            let t = x[1].atan2(x[0]).rem_euclid(2.0 * PI);
            let k = ((t / (2.0 * PI)) * n as f64 - 0.5).round() as i64;
            return self.values[k.rem_euclid(n as i64) as usize];
        }
        let best = self
            .directions
            .iter()
            .enumerate()
            .max_by(|a, b| dot(a.1, x).total_cmp(&dot(b.1, x)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.values[best]
    }

    /// Discrete `(∫ Φ^p)^{1/p}` over the table's angular rule.
    pub fn lp_norm(&self, p: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * v.powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

pub fn phi_lp_norm(geom: &CapGeometry, p: f64, resolution: usize) -> Result<f64> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(LabError::Domain(format!("p must lie in (0, 2], got {p}")));
    }
    Ok(PhiTable::build(geom, resolution, &default_r_grid())?.lp_norm(p))
}

/// Upper bound on `|∇_θ ⟨x, ζ(θ)⟩| / |x|` used to size the quadrature.
pub fn angular_speed_bound(df: &DistanceFunction) -> Result<f64> {
    let nodes = parametrize_sphere(df, if df.dim() == 2 { 1024 } else { 32 })?;
    let mut m: f64 = 0.0;
    for node in &nodes {
        // |dζ/dω| ≤ |ζ| / ⟨ζ̂, n⟩ for radial projections
        let r = norm(&node.position);
        m = m.max(r / (dot(&node.position, &node.normal) / r));
    }
    Ok(1.1 * m)
}

/// `∫_{Σ_ρ} e^{-i⟨x, ζ⟩} dσ(ζ)` with at least 16 nodes per oscillation.
#[derive(Clone, Debug)]
pub struct SurfaceFourier {
    df: DistanceFunction,
    speed: f64,
    pub max_nodes: usize,
}

impl SurfaceFourier {
    pub fn new(df: &DistanceFunction) -> Result<Self> {
        let max_nodes = if df.dim() == 2 { 1 << 22 } else { 1 << 11 };
        Ok(Self {
            df: df.clone(),
            speed: angular_speed_bound(df)?,
            max_nodes,
        })
    }

    /// Node count (azimuthal count for `d ≥ 3`) required at frequency `|x|`.
    pub fn required_resolution(&self, abs_x: f64) -> usize {
        let n = (16.0 * abs_x * self.speed).ceil() as usize;
        n.max(64).next_multiple_of(8)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        let need = self.required_resolution(norm(x));
        if need > self.max_nodes {
            return Err(LabError::Resolution {
                what: format!("surface Fourier transform at |x| = {:.3}", norm(x)),
                required: need,
                limit: self.max_nodes,
            });
        }
        let d = self.df.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for (omega, w) in unit_sphere_rule(d, need) {
            let r = self.df.rho(&omega)?;
            let n = self.df.normal(&omega)?;
            let weight = w * r.powi(-(d as i32 - 1)) / dot(&omega, &n);
            let phase = -dot(x, &omega) / r;
            acc += Complex64::from_polar(weight, phase);
        }
        Ok(acc)
    }
}

pub fn surface_fourier(df: &DistanceFunction, x: &[f64]) -> Result<Complex64> {
    SurfaceFourier::new(df)?.eval(x)
}

#[derive(Clone, Debug, Serialize)]
pub struct CapSweepRow {
    pub direction: usize,
    pub abs_x: f64,
    pub fourier_abs: f64,
    /// `σ[B(ξ(x), 1/|x|)]`.
    pub cap_bound: f64,
    pub ratio: f64,
}

/// `|σ̂(x)|` against the cap measure at the Gauss point of `x`, for every
/// radius along every direction.
pub fn fourier_cap_sweep(geom: &CapGeometry, radii: &[f64], directions: &[Vec<f64>]) -> Result<Vec<CapSweepRow>> {
    let sf = SurfaceFourier::new(geom.df())?;
    let jobs: Vec<(usize, f64)> = directions
        .iter()
        .enumerate()
        .flat_map(|(i, _)| radii.iter().map(move |&r| (i, r)))
        .collect();
    jobs.par_iter()
        .map(|&(i, r)| {
            let w = &directions[i];
            let x: Vec<f64> = w.iter().map(|v| r * v / norm(w)).collect();
            let fourier_abs = sf.eval(&x)?.norm();
            let cap_bound = geom.cap_measure(&gauss_point(geom.df(), &x)?, 1.0 / r)?;
            Ok(CapSweepRow {
                direction: i,
                abs_x: r,
                fourier_abs,
                cap_bound,
                ratio: fourier_abs / cap_bound,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct DoublingEntry {
    pub base: Vec<f64>,
    pub height: f64,
    pub factor: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct DoublingReport {
    pub entries: Vec<DoublingEntry>,
    pub worst_ratio: f64,
}

/// Ratios `σ[B(ξ0, γs)] / (γ^e σ[B(ξ0, s)])` with `e = (d-1)/2` for
/// `γ ≥ 1` and `e = (d-1)/k` for `γ < 1`.
pub fn doubling_check(geom: &CapGeometry, caps: &[CapQuery], factors: &[f64], k: f64) -> Result<DoublingReport> {
    let d = geom.df().dim() as f64;
    let mut entries = Vec::new();
    for cap in caps {
        let base_measure = geom.cap_measure(&cap.base, cap.height)?;
        for &g in factors {
            let e = if g >= 1.0 { 0.5 * (d - 1.0) } else { (d - 1.0) / k };
            let ratio = if g == 1.0 {
                1.0
            } else {
                geom.cap_measure(&cap.base, g * cap.height)? / (g.powf(e) * base_measure)
            };
            entries.push(DoublingEntry {
                base: cap.base.position.clone(),
                height: cap.height,
                factor: g,
                ratio,
            });
        }
    }
    let worst_ratio = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    Ok(DoublingReport { entries, worst_ratio })
}

/// Worst two-sided ratio between `σ[B(ξ0, s)]` and `σ[B(ξ, s)]` for `ξ` in
/// the cap.
pub fn comparability_check(geom: &CapGeometry, cap: &CapQuery, samples: &[SpherePoint]) -> Result<f64> {
    let m0 = geom.cap_measure(&cap.base, cap.height)?;
    let mut worst: f64 = 1.0;
    for xi in samples {
        let m = geom.cap_measure(xi, cap.height)?;
        worst = worst.max(m0 / m).max(m / m0);
    }
    Ok(worst)
}

/// Points spread uniformly in angle across a planar cap.
pub fn cap_samples(geom: &CapGeometry, cap: &CapQuery, count: usize) -> Result<Vec<SpherePoint>> {
    let (lo, hi) = match geom.cap_arc(&cap.base, cap.height)? {
        CapArc::Full => (0.0, 2.0 * PI),
        CapArc::Arc { lo, hi } => (lo, hi),
    };
    (0..count)
        .map(|i| {
            let t = lo + (hi - lo) * (i as f64 + 0.5) / count as f64;
            let z = geom.point_at(t)?;
            geom.df().sphere_point(z, 0.0)
        })
        .collect()
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.iter().map(|a| a / n).collect();
        }
    }
}

/// Pairs `(x, y)` with `|y| < s ≤ 1` and `|x| ≥ 2s`, `|x|` log-uniform over
/// eight octaves above `2s`.
pub fn lemma22_samples(d: usize, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let s: f64 = 1.0 - rng.gen_range(0.0..1.0);
            let ry = s * rng.gen_range(0.0f64..1.0).powf(1.0 / d as f64);
            let rx = 2.0 * s * 2f64.powf(rng.gen_range(0.0..8.0));
            let y = random_unit(&mut rng, d).iter().map(|v| ry * v).collect();
            let x = random_unit(&mut rng, d).iter().map(|v| rx * v).collect();
            (x, y)
        })
        .collect()
}

/// Pairs `(x, y)` with `|x| > 2|y| > 0`, `|x|/|y|` log-uniform in `(2, 128)`.
pub fn lemma23_samples(d: usize, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let ry = 2f64.powf(rng.gen_range(-4.0..4.0));
            let rx = 2.0 * ry * 2f64.powf(rng.gen_range(1e-9..6.0));
            let y = random_unit(&mut rng, d).iter().map(|v| ry * v).collect();
            let x = random_unit(&mut rng, d).iter().map(|v| rx * v).collect();
            (x, y)
        })
        .collect()
}

/// Smallest `C` with `d(ξ(x-y), T_{ξ(x)}) ≤ C/|x|` over the sample pairs.
pub fn lemma22_check(df: &DistanceFunction, samples: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (x, y) in samples {
        let base = gauss_point(df, x)?;
        if y.iter().all(|&v| v == 0.0) {
            continue;
        }
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let moved = gauss_point(df, &diff)?;
        let gap: f64 = base
            .position
            .iter()
            .zip(&moved.position)
            .zip(&base.normal)
            .map(|((a, b), n)| (a - b) * n)
            .sum();
        worst = worst.max(gap.max(0.0) * norm(x));
    }
    Ok(worst)
}

/// Smallest `C` with `Φ((x-y)/|x-y|) ≤ C Φ(x/|x|)` over the sample pairs.
pub fn lemma23_check(geom: &CapGeometry, samples: &[(Vec<f64>, Vec<f64>)], r_grid: &[f64]) -> Result<f64> {
    let ratios: Vec<f64> = samples
        .par_iter()
        .map(|(x, y)| {
            let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            Ok(phi(geom, &diff, r_grid)?.value / phi(geom, x, r_grid)?.value)
        })
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_j0;

    fn circle() -> CapGeometry {
        CapGeometry::new(&DistanceFunction::euclidean(2).unwrap()).unwrap()
    }

    fn lq4() -> CapGeometry {
        CapGeometry::new(&DistanceFunction::lq(4, 2).unwrap()).unwrap()
    }

    fn point(g: &CapGeometry, x: &[f64]) -> SpherePoint {
        gauss_point(g.df(), x).unwrap()
    }

    #[test]
    fn circle_caps_match_arc_formula() {
        let g = circle();
        let base = point(&g, &[0.3, 0.8]);
        for s in log_space(1e-3, 1.9, 40) {
            let m = g.cap_measure(&base, s).unwrap();
            assert!((m - 2.0 * (1.0 - s).acos()).abs() < 1e-9, "s = {s}");
        }
        assert!((g.cap_measure(&base, 2.5).unwrap() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn flat_axis_cap_follows_quartic_contact() {
        let g = lq4();
        let s: f64 = 1e-3;
        let m = g.cap_measure(&point(&g, &[1.0, 0.0]), s).unwrap();
        let lead = 2.0 * (4.0 * s).powf(0.25);
        assert!((m / lead - 1.0).abs() < 0.05);
    }

    #[test]
    fn caps_are_monotone() {
        let g = lq4();
        let base = point(&g, &[0.7, 0.2]);
        let mut prev = 0.0;
        for s in log_space(1e-4, 3.0, 50) {
            let m = g.cap_measure(&base, s).unwrap();
            assert!(m >= prev);
            prev = m;
        }
    }

    #[test]
    fn node_sum_caps_in_three_dimensions() {
        let df = DistanceFunction::euclidean(3).unwrap();
        let g = CapGeometry::with_resolution(&df, 256).unwrap();
        let base = gauss_point(&df, &[0.0, 0.0, 1.0]).unwrap();
        // spherical cap area 2π s
        let m = g.cap_measure(&base, 0.5).unwrap();
        assert!((m / (PI) - 1.0).abs() < 0.02, "{m}");
    }

    // J_0 by Miller's backward recurrence normalized with
    // J_0 + 2 Σ J_{2k} = 1.
    #[test]
    fn circle_fourier_transform_is_bessel() {
        let df = DistanceFunction::euclidean(2).unwrap();
        let sf = SurfaceFourier::new(&df).unwrap();
        for r in [0.5, 4.0, 10.0, 17.3, 32.0] {
            let v = sf.eval(&[r * 0.6, r * 0.8]).unwrap();
            assert!((v.re - 2.0 * PI * bessel_j0(r)).abs() < 1e-10);
            assert!(v.im.abs() < 1e-10);
        }
        let area = sf.eval(&[0.0, 0.0]).unwrap();
        assert!((area.re - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn fourier_conjugate_symmetry_and_refusal() {
        let df = DistanceFunction::lq(4, 2).unwrap();
        let mut sf = SurfaceFourier::new(&df).unwrap();
        let a = sf.eval(&[3.0, -7.0]).unwrap();
        let b = sf.eval(&[-3.0, 7.0]).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
        sf.max_nodes = 1000;
        assert!(sf.eval(&[300.0, 0.0]).unwrap_err().is_refusal());
    }

    #[test]
    fn phi_is_constant_for_the_circle() {
        let g = circle();
        let grid = default_r_grid();
        let a = phi(&g, &[1.0, 0.0], &grid).unwrap().value;
        let b = phi(&g, &[0.6, -0.8], &grid).unwrap().value;
        assert!((a - b).abs() < 1e-6);
        // finer r grid changes the discrete sup only slightly
        let fine = log_space(2f64.powi(-10), 2f64.powi(14), 24 * 80 + 1);
        let c = phi(&g, &[1.0, 0.0], &fine).unwrap().value;
        assert!((a / c - 1.0).abs() < 0.02);
    }

    #[test]
    fn phi_larger_at_flat_points() {
        let g = lq4();
        let grid = default_r_grid();
        let axis = phi(&g, &[1.0, 0.0], &grid).unwrap().value;
        let diag = phi(&g, &[1.0, 1.0], &grid).unwrap().value;
        assert!(axis > diag);
        // discrete symmetries of the quartic gauge
        for dir in [[0.9, 0.2], [-0.9, 0.2], [0.2, 0.9], [0.9, -0.2]] {
            let v = phi(&g, &dir, &grid).unwrap().value;
            let v0 = phi(&g, &[0.9, 0.2], &grid).unwrap().value;
            assert!((v - v0).abs() < 1e-6 * v0);
        }
    }

    #[test]
    fn lemma_samples_respect_their_constraints() {
        for (x, y) in lemma22_samples(3, 500, 1) {
            assert!(norm(&y) < 1.0 && norm(&x) >= 2.0 * norm(&y));
        }
        for (x, y) in lemma23_samples(2, 500, 2) {
            assert!(norm(&y) > 0.0 && norm(&x) > 2.0 * norm(&y));
        }
        let c = lemma22_check(&DistanceFunction::euclidean(2).unwrap(), &lemma22_samples(2, 2000, 3)).unwrap();
        assert!(c > 0.0 && c <= 8.0, "{c}");
    }

    #[test]
    fn doubling_ratios() {
        let c = circle();
        let cap = CapQuery::new(point(&c, &[1.0, 0.0]), 1e-3).unwrap();
        let r = doubling_check(&c, std::slice::from_ref(&cap), &[4.0, 1.0], 2.0).unwrap();
        assert!((r.entries[0].ratio - 1.0).abs() < 0.2);
        assert_eq!(r.entries[1].ratio, 1.0);

        let g = lq4();
        let cap = CapQuery::new(point(&g, &[1.0, 0.0]), 1e-2).unwrap();
        let r = doubling_check(&g, &[cap], &[1.0 / 16.0], 4.0).unwrap();
        assert!(r.worst_ratio <= 4.0);
    }

    #[test]
    fn comparability_constants() {
        for g in [circle(), lq4()] {
            let cap = CapQuery::new(point(&g, &[1.0, 0.0]), 0.05).unwrap();
            let samples = cap_samples(&g, &cap, 100).unwrap();
            let c = comparability_check(&g, &cap, &samples).unwrap();
            assert!(c <= 10.0, "{c}");
            let own = comparability_check(&g, &cap, std::slice::from_ref(&cap.base)).unwrap();
            assert!((own - 1.0).abs() < 1e-12);
        }
    }
}
