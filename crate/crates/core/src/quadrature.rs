//! Gauss–Legendre rules and the composite/graded node layouts used by the
//! oscillatory integrals.

use std::f64::consts::PI;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = ((4 * i + 3) as f64 * PI / (4 * n + 2) as f64).cos()
                * (1.0 - (n as f64 - 1.0) / (8.0 * (n as f64).powi(3)));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Appends the rule mapped onto `[a, b]` to `out`.
    pub fn push_mapped(&self, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            out.push((mid + half * x, half * w));
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Controls how many nodes the composite rules spend per oscillation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    /// Quadrature nodes per oscillation period of the fastest phase.
    pub nodes_per_period: f64,
    /// Minimum number of panels on any interval.
    pub min_panels: usize,
    /// Upper bound on the node count of a single layout before refusing.
    pub max_nodes: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            nodes_per_period: 16.0,
            min_panels: 16,
            max_nodes: 1 << 20,
        }
    }
}

impl Resolution {
    pub fn doubled(self) -> Self {
        Self {
            nodes_per_period: 2.0 * self.nodes_per_period,
            min_panels: 2 * self.min_panels,
            max_nodes: 2 * self.max_nodes,
        }
    }
}

/// Composite Gauss–Legendre layout on `[a, b]` for an integrand whose
/// fastest phase has angular frequency `omega`.
pub fn composite_nodes(rule: &GaussLegendre, a: f64, b: f64, omega: f64, res: &Resolution) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    push_composite(rule, a, b, omega, res, &mut out);
    out
}

pub fn composite_panel_count(rule: &GaussLegendre, a: f64, b: f64, omega: f64, res: &Resolution) -> usize {
    let len = (b - a).abs();
    if len == 0.0 {
        return 0;
    }
    let periods = omega.abs() * len / (2.0 * PI);
    let by_freq = (periods * res.nodes_per_period / rule.len() as f64).ceil() as usize;
    by_freq.max(res.min_panels).max(1)
}

pub fn push_composite(rule: &GaussLegendre, a: f64, b: f64, omega: f64, res: &Resolution, out: &mut Vec<(f64, f64)>) {
    if b <= a {
        return;
    }
    let panels = composite_panel_count(rule, a, b, omega, res);
    let h = (b - a) / panels as f64;
    for i in 0..panels {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == panels { b } else { lo + h };
        rule.push_mapped(lo, hi, out);
    }
}

/// Layout on `[a, b]` for integrands with an algebraic endpoint singularity
/// at `a`: a geometric mesh toward `a` on `[a, a + g]` followed by a
/// composite layout on the remainder.
pub fn push_graded(rule: &GaussLegendre, a: f64, b: f64, omega: f64, res: &Resolution, out: &mut Vec<(f64, f64)>) {
    if b <= a {
        return;
    }
    const RATIO: f64 = 0.15;
    const LEVELS: usize = 18;
    // graded zone: one composite panel's share, at most a quarter period
    let mut g = (b - a) / res.min_panels.max(1) as f64;
    if omega.abs() > 0.0 {
        g = g.min(0.5 * PI / omega.abs());
    }
    let mut hi = a + g;
    for _ in 0..LEVELS {
        let lo = a + (hi - a) * RATIO;
        rule.push_mapped(lo, hi, out);
        hi = lo;
    }
    rule.push_mapped(a, hi, out);
    push_composite(rule, a + g, b, omega, res, out);
}

/// Periodic trapezoid nodes on `[0, 2π)`.
pub fn periodic_nodes(n: usize) -> impl Iterator<Item = (f64, f64)> {
    let h = 2.0 * PI / n as f64;
    (0..n).map(move |k| (k as f64 * h, h))
}
