//! Homogeneous distance functions and the geometry of their unit spheres.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::linalg::{dot, norm, normalized, solve_dense};
use crate::quadrature::GaussLegendre;
use crate::regression::{fit_power_law, log_space};

/// Membership tolerance for points on the unit sphere.
pub const SPHERE_TOL: f64 = 1e-10;

/// A user supplied gauge. Implementations must be positive, homogeneous of
/// degree one, smooth away from the origin and have a convex unit ball.
pub trait CustomGauge: Send + Sync + fmt::Debug {
    fn value(&self, xi: &[f64]) -> f64;
    fn gradient(&self, xi: &[f64]) -> Vec<f64>;
}

#[derive(Clone, Debug)]
pub enum GaugeKind {
    Euclidean,
    /// `(Σ |ξ_i|^q)^{1/q}` for even `q ≥ 4`.
    Lq(u32),
    Custom(Arc<dyn CustomGauge>),
}

#[derive(Clone, Debug)]
pub struct DistanceFunction {
    kind: GaugeKind,
    dim: usize,
}

impl DistanceFunction {
    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(GaugeKind::Euclidean, dim)
    }

    pub fn lq(q: u32, dim: usize) -> Result<Self> {
        Self::new(GaugeKind::Lq(q), dim)
    }

    pub fn custom(gauge: Arc<dyn CustomGauge>, dim: usize) -> Result<Self> {
        Self::new(GaugeKind::Custom(gauge), dim)
    }

    pub fn new(kind: GaugeKind, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(LabError::Domain(format!("dimension must be at least 2, got {dim}")));
        }
        if let GaugeKind::Lq(q) = kind {
            if q < 4 || q % 2 != 0 {
                return Err(LabError::Domain(format!("lq gauge needs an even q >= 4, got {q}")));
            }
        }
        Ok(Self { kind, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &GaugeKind {
        &self.kind
    }

    pub fn name(&self) -> String {
        match self.kind {
            GaugeKind::Euclidean => "euclidean".to_string(),
            GaugeKind::Lq(q) => format!("lq:{q}"),
            GaugeKind::Custom(_) => "custom".to_string(),
        }
    }

    /// Largest contact order of the unit sphere when known in closed form.
    pub fn max_type(&self) -> Option<u32> {
        match self.kind {
            GaugeKind::Euclidean => Some(2),
            GaugeKind::Lq(q) => Some(q),
            GaugeKind::Custom(_) => None,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.kind, GaugeKind::Euclidean)
    }

    fn check_dim(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim {
            return Err(LabError::Domain(format!(
                "expected a {}-vector, got length {}",
                self.dim,
                xi.len()
            )));
        }
        Ok(())
    }

    /// `ρ(ξ)`, with `ρ(0) = 0`.
    pub fn rho(&self, xi: &[f64]) -> Result<f64> {
        self.check_dim(xi)?;
        match &self.kind {
            GaugeKind::Euclidean => Ok(norm(xi)),
            GaugeKind::Lq(q) => Ok(lq_value(*q, xi)),
            GaugeKind::Custom(g) => {
                if xi.iter().all(|&v| v == 0.0) {
                    return Ok(0.0);
                }
                let v = g.value(xi);
                if !v.is_finite() || v < 0.0 {
                    return Err(LabError::Evaluation(format!("custom gauge returned {v}")));
                }
                Ok(v)
            }
        }
    }

    pub fn gradient(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(xi)?;
        if xi.iter().all(|&v| v == 0.0) {
            return Err(LabError::Domain("gradient of the gauge at the origin".into()));
        }
        match &self.kind {
            GaugeKind::Euclidean => Ok(normalized(xi)),
            GaugeKind::Lq(q) => {
                let r = lq_value(*q, xi);
                Ok(xi
                    .iter()
                    .map(|&v| v.signum() * (v.abs() / r).powi(*q as i32 - 1))
                    .collect())
            }
            GaugeKind::Custom(g) => {
                let grad = g.gradient(xi);
                if grad.len() != self.dim || grad.iter().any(|v| !v.is_finite()) {
                    return Err(LabError::Evaluation(
                        "custom gauge gradient is not a finite d-vector".into(),
                    ));
                }
                Ok(grad)
            }
        }
    }

    /// Outer unit normal of the level set through `xi`.
    pub fn normal(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let g = self.gradient(xi)?;
        let n = norm(&g);
        if n == 0.0 {
            return Err(LabError::Evaluation("vanishing gauge gradient".into()));
        }
        Ok(g.into_iter().map(|v| v / n).collect())
    }

    /// Radial projection `ω / ρ(ω)` onto the unit sphere.
    pub fn project(&self, omega: &[f64]) -> Result<Vec<f64>> {
        let r = self.rho(omega)?;
        if r == 0.0 {
            return Err(LabError::Domain("cannot project the origin".into()));
        }
        Ok(omega.iter().map(|v| v / r).collect())
    }

    /// Builds a sphere point from a position on the sphere.
    pub fn sphere_point(&self, position: Vec<f64>, weight: f64) -> Result<SpherePoint> {
        let r = self.rho(&position)?;
        if (r - 1.0).abs() > SPHERE_TOL {
            return Err(LabError::Domain(format!("point is off the unit sphere (rho = {r})")));
        }
        let normal = self.normal(&position)?;
        Ok(SpherePoint {
            position,
            normal,
            weight,
        })
    }
}

fn lq_value(q: u32, xi: &[f64]) -> f64 {
    let m = xi.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = xi.iter().map(|v| (v.abs() / m).powi(q as i32)).sum();
    m * s.powf(1.0 / q as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpherePoint {
    pub position: Vec<f64>,
    pub normal: Vec<f64>,
    /// Surface measure carried by this node; zero for isolated points.
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct UnitBallData {
    pub gamma: f64,
    pub nodes: Vec<SpherePoint>,
}

impl UnitBallData {
    pub fn surface_area(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }
}

pub fn rho_eval(df: &DistanceFunction, xi: &[f64]) -> Result<f64> {
    df.rho(xi)
}

pub fn rho_gradient(df: &DistanceFunction, xi: &[f64]) -> Result<Vec<f64>> {
    df.gradient(xi)
}

/// Quadrature on the Euclidean unit sphere `S^{d-1}`: periodic trapezoid for
/// `d = 2`, and for `d ≥ 3` Gauss–Legendre in the polar angles (with their
/// sine Jacobians) times a trapezoid in the azimuth. `resolution` is the
/// azimuthal node count.
pub fn unit_sphere_rule(d: usize, resolution: usize) -> Vec<(Vec<f64>, f64)> {
    let h = 2.0 * PI / resolution as f64;
    let azimuth: Vec<(f64, f64)> = (0..resolution).map(|k| (k as f64 * h, h)).collect();
    if d == 2 {
        return azimuth.into_iter().map(|(t, w)| (vec![t.cos(), t.sin()], w)).collect();
    }
    let polar_rule = GaussLegendre::new((resolution / 2).max(4));
    let mut polar = Vec::new();
    polar_rule.push_mapped(0.0, PI, &mut polar);

    // angles φ_1..φ_{d-2} in [0, π], φ_{d-1} azimuthal
    let mut out = Vec::new();
    let mut idx = vec![0usize; d - 2];
    loop {
        let mut weight_polar = 1.0;
        for (i, &j) in idx.iter().enumerate() {
            let (phi, w) = polar[j];
            weight_polar *= w * phi.sin().powi((d - 2 - i) as i32);
        }
        for &(theta, wa) in &azimuth {
            let mut omega = vec![0.0; d];
            let mut sin_prod = 1.0;
            for (i, &j) in idx.iter().enumerate() {
                let phi = polar[j].0;
                omega[i] = sin_prod * phi.cos();
                sin_prod *= phi.sin();
            }
            omega[d - 2] = sin_prod * theta.cos();
            omega[d - 1] = sin_prod * theta.sin();
            out.push((omega, weight_polar * wa));
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < polar.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Surface quadrature on `Σ_ρ` by radial projection of a rule on `S^{d-1}`:
/// `dσ(ζ) = ρ(ω)^{-(d-1)} / ⟨ω, n(ζ)⟩ dω` with `ζ = ω / ρ(ω)`.
pub fn parametrize_sphere(df: &DistanceFunction, resolution: usize) -> Result<Vec<SpherePoint>> {
    if resolution < 8 {
        return Err(LabError::Domain(format!(
            "sphere resolution must be at least 8, got {resolution}"
        )));
    }
    let d = df.dim();
    unit_sphere_rule(d, resolution)
        .into_iter()
        .map(|(omega, w)| {
            let r = df.rho(&omega)?;
            let zeta: Vec<f64> = omega.iter().map(|v| v / r).collect();
            let normal = df.normal(&zeta)?;
            let weight = w * r.powi(-(d as i32 - 1)) / dot(&omega, &normal);
            Ok(SpherePoint {
                position: zeta,
                normal,
                weight,
            })
        })
        .collect()
}

/// Default node count used when a caller needs "the" sphere quadrature.
pub fn default_resolution(d: usize) -> usize {
    if d == 2 {
        2048
    } else {
        64
    }
}

/// Point of `Σ_ρ` whose outer normal points along `x`.
pub fn gauss_point(df: &DistanceFunction, x: &[f64]) -> Result<SpherePoint> {
    df.check_dim(x)?;
    let nx = norm(x);
    if nx == 0.0 {
        return Err(LabError::Domain("gauss point of the zero vector".into()));
    }
    let position = match df.kind() {
        GaugeKind::Euclidean => x.iter().map(|v| v / nx).collect(),
        GaugeKind::Lq(q) => {
            let e = 1.0 / (*q as f64 - 1.0);
            let raw: Vec<f64> = x.iter().map(|v| v.signum() * (v.abs() / nx).powf(e)).collect();
            df.project(&raw)?
        }
        GaugeKind::Custom(_) => return gauss_point_newton(df, x, 60),
    };
    let normal = df.normal(&position)?;
    Ok(SpherePoint {
        position,
        normal,
        weight: 0.0,
    })
}

/// Newton on `∇ρ(ζ) = μ x̂`, `ρ(ζ) = 1`, seeded by the best sphere node.
pub fn gauss_point_newton(df: &DistanceFunction, x: &[f64], max_iter: usize) -> Result<SpherePoint> {
    let d = df.dim();
    let xhat = normalized(x);
    let seed_res = if d == 2 { 512 } else { 24 };
    let nodes = parametrize_sphere(df, seed_res)?;
    let best = nodes
        .iter()
        .max_by(|a, b| dot(&a.position, &xhat).total_cmp(&dot(&b.position, &xhat)))
        .expect("sphere rule is never empty");
    let mut zeta = best.position.clone();
    let mut mu = dot(&df.gradient(&zeta)?, &xhat);

    let residual = |zeta: &[f64], mu: f64| -> Result<(Vec<f64>, f64)> {
        let g = df.gradient(zeta)?;
        let mut f: Vec<f64> = g.iter().zip(&xhat).map(|(gi, xi)| gi - mu * xi).collect();
        f.push(df.rho(zeta)? - 1.0);
        let r = norm(&f);
        Ok((f, r))
    };

    let (mut f, mut res) = residual(&zeta, mu)?;
    for _ in 0..max_iter {
        if res < 1e-13 {
            break;
        }
        // bordered Jacobian with a finite-difference Hessian
        let n = d + 1;
        let mut jac = vec![0.0; n * n];
        let h = 1e-6;
        for j in 0..d {
            let mut zp = zeta.clone();
            let mut zm = zeta.clone();
            zp[j] += h;
            zm[j] -= h;
            let gp = df.gradient(&zp)?;
            let gm = df.gradient(&zm)?;
            for i in 0..d {
                jac[i * n + j] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let g = df.gradient(&zeta)?;
        for i in 0..d {
            jac[i * n + d] = -xhat[i];
            jac[d * n + i] = g[i];
        }
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let Some(step) = solve_dense(jac, rhs) else {
            break;
        };
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let zt: Vec<f64> = zeta.iter().zip(&step).map(|(z, s)| z + alpha * s).collect();
            let mt = mu + alpha * step[d];
            if let Ok((ft, rt)) = residual(&zt, mt) {
                if rt < res {
                    zeta = zt;
                    mu = mt;
                    f = ft;
                    res = rt;
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let position = df.project(&zeta)?;
    let normal = df.normal(&position)?;
    let mismatch = norm(&normal.iter().zip(&xhat).map(|(a, b)| a - b).collect::<Vec<_>>());
    if mismatch > 1e-9 {
        return Err(LabError::Solver {
            iterations: max_iter,
            residual: res.max(mismatch),
        });
    }
    Ok(SpherePoint {
        position,
        normal,
        weight: 0.0,
    })
}

/// Support function `h(x) = sup_{ρ(ξ)≤1} ⟨x, ξ⟩ = ⟨x, ξ(x)⟩`.
pub fn support_function(df: &DistanceFunction, x: &[f64]) -> Result<f64> {
    if x.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    Ok(dot(x, &gauss_point(df, x)?.position))
}

/// Distance from `xi` to the tangent plane of `Σ_ρ` at `xi0`.
pub fn tangent_distance(df: &DistanceFunction, xi: &[f64], xi0: &SpherePoint) -> Result<f64> {
    let r = df.rho(xi)?;
    let r0 = df.rho(&xi0.position)?;
    if (r - 1.0).abs() > SPHERE_TOL || (r0 - 1.0).abs() > SPHERE_TOL {
        return Err(LabError::Domain(
            "tangent distance needs points on the unit sphere".into(),
        ));
    }
    let v: f64 = xi0
        .position
        .iter()
        .zip(xi)
        .zip(&xi0.normal)
        .map(|((a, b), n)| (a - b) * n)
        .sum();
    Ok(v.max(0.0))
}

/// `γ = sup_{ρ(ξ)≤1} |ξ|`: best quadrature node, then Riemannian gradient
/// ascent of `1/ρ(ω)` over unit directions.
pub fn gamma_sup(df: &DistanceFunction) -> Result<UnitBallData> {
    gamma_sup_with(df, default_resolution(df.dim()))
}

pub fn gamma_sup_with(df: &DistanceFunction, resolution: usize) -> Result<UnitBallData> {
    let nodes = parametrize_sphere(df, resolution)?;
    let best = nodes
        .iter()
        .max_by(|a, b| norm(&a.position).total_cmp(&norm(&b.position)))
        .expect("sphere rule is never empty");
    let mut omega = normalized(&best.position);
    let mut value = 1.0 / df.rho(&omega)?;
    let mut step = 0.1;
    for _ in 0..500 {
        let r = df.rho(&omega)?;
        let g = df.gradient(&omega)?;
        // gradient of 1/ρ, projected onto the tangent space of S^{d-1}
        let grad: Vec<f64> = g.iter().map(|v| -v / (r * r)).collect();
        let radial = dot(&grad, &omega);
        let tang: Vec<f64> = grad.iter().zip(&omega).map(|(a, o)| a - radial * o).collect();
        let gn = norm(&tang);
        if gn < 1e-15 {
            break;
        }
        let mut accepted = false;
        while step > 1e-16 {
            let trial: Vec<f64> = omega.iter().zip(&tang).map(|(o, t)| o + step * t).collect();
            let trial = normalized(&trial);
            let tv = 1.0 / df.rho(&trial)?;
            if tv > value {
                omega = trial;
                value = tv;
                accepted = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let node_max = nodes.iter().map(|n| norm(&n.position)).fold(0.0, f64::max);
    Ok(UnitBallData {
        gamma: value.max(node_max),
        nodes,
    })
}

/// Unit tangent vector at a sphere point: the coordinate axis least aligned
/// with the normal, projected onto the tangent plane.
pub fn tangent_vector(normal: &[f64]) -> Vec<f64> {
    let d = normal.len();
    if d == 2 {
        return vec![-normal[1], normal[0]];
    }
    let axis = (0..d)
        .min_by(|&a, &b| normal[a].abs().total_cmp(&normal[b].abs()))
        .unwrap_or(0);
    let mut e = vec![0.0; d];
    e[axis] = 1.0;
    let c = normal[axis];
    for (ei, ni) in e.iter_mut().zip(normal) {
        *ei -= c * ni;
    }
    normalized(&e)
}

pub fn default_probe_radii() -> Vec<f64> {
    log_space(1e-3, 1e-1, 9)
}

/// Contact order at `zeta`: slope of tangent distance against chord length
/// along the tangent direction `tangent_vector(n)`, averaged over both sides.
pub fn type_order(df: &DistanceFunction, zeta: &SpherePoint, radii: &[f64]) -> Result<f64> {
    let e = tangent_vector(&zeta.normal);
    type_order_along(df, zeta, &e, radii)
}

pub fn type_order_along(df: &DistanceFunction, zeta: &SpherePoint, e: &[f64], radii: &[f64]) -> Result<f64> {
    let mut chords = Vec::with_capacity(radii.len());
    let mut dists = Vec::with_capacity(radii.len());
    for &a in radii {
        let mut chord = 0.0;
        let mut dist = 0.0;
        for sign in [-1.0, 1.0] {
            let probe: Vec<f64> = zeta.position.iter().zip(e).map(|(z, v)| z + sign * a * v).collect();
            let p = df.project(&probe)?;
            chord += 0.5 * norm(&p.iter().zip(&zeta.position).map(|(x, y)| x - y).collect::<Vec<_>>());
            dist += 0.5 * tangent_distance(df, &p, zeta)?;
        }
        chords.push(chord);
        dists.push(dist);
    }
    Ok(fit_power_law(&chords, &dists)?.slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lq4() -> DistanceFunction {
        DistanceFunction::lq(4, 2).unwrap()
    }

    #[test]
    fn rejects_bad_gauges() {
        assert!(DistanceFunction::lq(3, 2).is_err());
        assert!(DistanceFunction::lq(2, 2).is_err());
        assert!(DistanceFunction::euclidean(1).is_err());
    }

    #[test]
    fn basic_values() {
        let e = DistanceFunction::euclidean(2).unwrap();
        assert_eq!(e.rho(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(e.rho(&[0.0, 0.0]).unwrap(), 0.0);
        assert!((lq4().rho(&[1.0, 1.0]).unwrap() - 2f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(e.gradient(&[0.0, 2.0]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(lq4().gradient(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert!(e.gradient(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn homogeneity_and_euler_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for df in [
            DistanceFunction::euclidean(2).unwrap(),
            lq4(),
            DistanceFunction::lq(6, 3).unwrap(),
        ] {
            for _ in 0..10_000 {
                let xi: Vec<f64> = (0..df.dim()).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let t = rng.gen_range(0.01..100.0);
                let r = df.rho(&xi).unwrap();
                let rt = df.rho(&xi.iter().map(|v| t * v).collect::<Vec<_>>()).unwrap();
                assert!((rt - t * r).abs() <= 1e-12 * t * r);
                let g = df.gradient(&xi).unwrap();
                assert!((dot(&xi, &g) - r).abs() <= 1e-12 * r);
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let df = lq4();
        let xi = [1.0, 1.0];
        let g = df.gradient(&xi).unwrap();
        let h = 1e-5;
        for i in 0..2 {
            let mut p = xi;
            let mut m = xi;
            p[i] += h;
            m[i] -= h;
            let fd = (df.rho(&p).unwrap() - df.rho(&m).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8, "{fd} vs {}", g[i]);
        }
    }

    #[test]
    fn gauss_points_closed_form() {
        let e = DistanceFunction::euclidean(2).unwrap();
        assert_eq!(gauss_point(&e, &[0.0, 5.0]).unwrap().position, vec![0.0, 1.0]);
        let p = gauss_point(&lq4(), &[1.0, 1.0]).unwrap();
        let c = 2f64.powf(-0.25);
        assert!((p.position[0] - c).abs() < 1e-15 && (p.position[1] - c).abs() < 1e-15);
    }

    #[test]
    fn gauss_point_matches_dense_argmax() {
        let df = lq4();
        let x = [1.0, 0.3];
        let p = gauss_point(&df, &x).unwrap();
        let n = 100_000;
        let best = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                df.project(&[t.cos(), t.sin()]).unwrap()
            })
            .max_by(|a, b| dot(a, &x).total_cmp(&dot(b, &x)))
            .unwrap();
        assert!(norm(&sub2(&best, &p.position)) < 1e-4);
        assert!(norm(&sub2(&p.normal, &normalized(&x))) < 1e-12);
    }

    fn sub2(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    #[derive(Debug)]
    struct Quartic;

    impl CustomGauge for Quartic {
        fn value(&self, xi: &[f64]) -> f64 {
            xi.iter().map(|v| v.powi(4)).sum::<f64>().powf(0.25)
        }
        fn gradient(&self, xi: &[f64]) -> Vec<f64> {
            let r = self.value(xi);
            xi.iter().map(|v| v.powi(3) / r.powi(3)).collect()
        }
    }

    #[test]
    fn newton_gauss_point_agrees_with_closed_form() {
        let custom = DistanceFunction::custom(Arc::new(Quartic), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let a = gauss_point(&custom, &x).unwrap();
            let b = gauss_point(&lq4(), &x).unwrap();
            assert!(norm(&sub2(&a.position, &b.position)) < 1e-8);
            assert!(norm(&sub2(&a.normal, &normalized(&x))) < 1e-8);
        }
    }

    #[test]
    fn tangent_distance_examples() {
        let e = DistanceFunction::euclidean(2).unwrap();
        let p0 = e.sphere_point(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(tangent_distance(&e, &[1.0, 0.0], &p0).unwrap(), 0.0);
        let th: f64 = 0.7;
        let v = tangent_distance(&e, &[th.cos(), th.sin()], &p0).unwrap();
        assert!((v - (1.0 - th.cos())).abs() < 1e-15);

        let df = lq4();
        let q0 = df.sphere_point(vec![1.0, 0.0], 0.0).unwrap();
        let w: f64 = 0.1;
        let xi = [(1.0 - w.powi(4)).powf(0.25), w];
        let v = tangent_distance(&df, &xi, &q0).unwrap();
        assert!((v / (w.powi(4) / 4.0) - 1.0).abs() < 1e-3);
        assert!(tangent_distance(&df, &[2.0, 0.0], &q0).is_err());
    }

    #[test]
    fn surface_areas() {
        let e2 = DistanceFunction::euclidean(2).unwrap();
        let s: f64 = parametrize_sphere(&e2, 4096).unwrap().iter().map(|n| n.weight).sum();
        assert!((s - 2.0 * PI).abs() < 1e-6);
        let e3 = DistanceFunction::euclidean(3).unwrap();
        let s: f64 = parametrize_sphere(&e3, 64).unwrap().iter().map(|n| n.weight).sum();
        assert!((s - 4.0 * PI).abs() < 1e-4);
    }

    #[test]
    fn lq_perimeter_matches_arclength_oracle() {
        // eight copies of the graph y = (1 - x^4)^{1/4}, x in [0, 2^{-1/4}]
        let df = lq4();
        let rule = GaussLegendre::new(40);
        let mut pts = Vec::new();
        let panels = 64;
        let end = 2f64.powf(-0.25);
        for i in 0..panels {
            let a = end * i as f64 / panels as f64;
            rule.push_mapped(a, a + end / panels as f64, &mut pts);
        }
        let speed = |x: f64| {
            let dy = -x.powi(3) / (1.0 - x.powi(4)).powf(0.75);
            (1.0 + dy * dy).sqrt()
        };
        let oracle = 8.0 * pts.iter().map(|(x, w)| w * speed(*x)).sum::<f64>();
        let s: f64 = parametrize_sphere(&df, 4096).unwrap().iter().map(|n| n.weight).sum();
        let s2: f64 = parametrize_sphere(&df, 8192).unwrap().iter().map(|n| n.weight).sum();
        assert!((s - s2).abs() < 1e-10);
        assert!((s - oracle).abs() < 1e-6, "{s} vs {oracle}");
    }

    #[test]
    fn gamma_values() {
        let e = DistanceFunction::euclidean(3).unwrap();
        assert!((gamma_sup(&e).unwrap().gamma - 1.0).abs() < 1e-12);
        let g4 = gamma_sup(&lq4()).unwrap().gamma;
        assert!((g4 - 2f64.powf(0.25)).abs() < 1e-8);
        let g6 = gamma_sup(&DistanceFunction::lq(6, 2).unwrap()).unwrap().gamma;
        assert!((g6 - 2f64.powf(1.0 / 3.0)).abs() < 1e-8);
        let g3 = gamma_sup(&DistanceFunction::lq(4, 3).unwrap()).unwrap().gamma;
        assert!((g3 - 3f64.powf(0.25)).abs() < 1e-8);
    }

    #[test]
    fn contact_orders() {
        let radii = default_probe_radii();
        let e = DistanceFunction::euclidean(2).unwrap();
        let p = gauss_point(&e, &[0.3, -1.0]).unwrap();
        assert!((type_order(&e, &p, &radii).unwrap() - 2.0).abs() < 0.05);
        let df = lq4();
        let axis = gauss_point(&df, &[1.0, 0.0]).unwrap();
        assert!((type_order(&df, &axis, &radii).unwrap() - 4.0).abs() < 0.1);
        let diag = gauss_point(&df, &[1.0, 1.0]).unwrap();
        assert!((type_order(&df, &diag, &radii).unwrap() - 2.0).abs() < 0.05);
    }
}
