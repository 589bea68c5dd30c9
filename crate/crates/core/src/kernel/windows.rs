//! Dyadic partitions of unity built from a fixed smooth bump in `log2`.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowKind {
    /// Littlewood–Paley window in `|τ|`.
    Psi,
    /// Córdoba window in `1 - ρ(ξ)/|τ|`.
    Phi,
}

/// Profile of the generating bump on `u = log2 t ∈ (-1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Bump {
    /// `exp(-1/(1-u²))`
    #[default]
    Standard,
    /// `(1 + u/2) exp(-1/(1-u²))`, a lopsided alternative.
    Skewed,
}

impl Bump {
    fn raw(self, u: f64) -> f64 {
        if u.abs() >= 1.0 {
            return 0.0;
        }
        let core = (-1.0 / (1.0 - u * u)).exp();
        match self {
            Bump::Standard => core,
            Bump::Skewed => (1.0 + 0.5 * u) * core,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothWindow {
    pub kind: WindowKind,
    pub bump: Bump,
}

impl SmoothWindow {
    pub fn new(kind: WindowKind, bump: Bump) -> Self {
        Self { kind, bump }
    }

    pub fn support(&self) -> (f64, f64) {
        (0.5, 2.0)
    }

    /// `η(log2 t) / Σ_m η(log2 t - m)`, zero outside `(1/2, 2)`.
    pub fn eval(&self, t: f64) -> f64 {
        if !(t > 0.5 && t < 2.0) {
            return 0.0;
        }
        let u = t.log2();
        let num = self.bump.raw(u);
        if num == 0.0 {
            return 0.0;
        }
        // 1-periodic normalizer; only m ∈ {-1, 0, 1} can be nonzero
        let den = self.bump.raw(u + 1.0) + num + self.bump.raw(u - 1.0);
        num / den
    }

    /// `Σ_{m ≥ 2} w(2^m v) = 1 - w(v) - w(2v)` for `0 < v ≤ 1`.
    pub fn tail_sum(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 0.0;
        }
        1.0 - self.eval(v) - self.eval(2.0 * v)
    }
}

pub fn make_windows() -> (SmoothWindow, SmoothWindow) {
    make_windows_with(Bump::Standard)
}

pub fn make_windows_with(bump: Bump) -> (SmoothWindow, SmoothWindow) {
    (
        SmoothWindow::new(WindowKind::Psi, bump),
        SmoothWindow::new(WindowKind::Phi, bump),
    )
}
