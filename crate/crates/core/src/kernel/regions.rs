//! The space-time regions `A_l, B_l, C_l, D_l, E_{jl}` around the dual cone.

use crate::linalg::norm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    A { l: i32 },
    B { l: i32 },
    C { l: i32 },
    D { l: i32 },
    E { j: u32, l: i32 },
}

impl RegionLabel {
    pub fn level(&self) -> i32 {
        match *self {
            RegionLabel::A { l }
            | RegionLabel::B { l }
            | RegionLabel::C { l }
            | RegionLabel::D { l }
            | RegionLabel::E { l, .. } => l,
        }
    }
}

/// Membership test with the defining inequalities taken literally.
pub fn in_region(label: RegionLabel, x: &[f64], t: f64, gamma: f64) -> bool {
    in_region_polar(label, norm(x), t, gamma)
}

/// [`in_region`] in terms of `r = |x|`; the regions depend on `x` only
/// through its length.
pub fn in_region_polar(label: RegionLabel, ax: f64, t: f64, gamma: f64) -> bool {
    let at = t.abs();
    let s = 2f64.powi(label.level());
    let gap = (at - gamma * ax).abs();
    let far = s * gamma * ax > 4.0;
    let late = s * at > 2.0;
    match label {
        RegionLabel::A { .. } => s * gamma * ax <= 4.0 && late,
        RegionLabel::B { .. } => far && s * at <= 2.0 && gap > 1.0 / s,
        RegionLabel::C { .. } => far && late && gap <= 1.0 / s,
        RegionLabel::D { .. } => far && late && gap > 1.0 / s && (at <= 0.5 * gamma * ax || at > 2.0 * gamma * ax),
        RegionLabel::E { j, .. } => {
            let j = j as i32;
            j >= 1
                && far
                && late
                && 2f64.powi(j - 1) / s < gap
                && gap <= 2f64.powi(j) / s
                && 0.5 * gamma * ax < at
                && at <= 2.0 * gamma * ax
        }
    }
}

/// The region of level `l` containing `(x, t)`, or `None` for points near
/// the origin that lie in none of them.
pub fn classify_region(x: &[f64], t: f64, l: i32, gamma: f64) -> Option<RegionLabel> {
    for label in [
        RegionLabel::A { l },
        RegionLabel::B { l },
        RegionLabel::C { l },
        RegionLabel::D { l },
    ] {
        if in_region(label, x, t, gamma) {
            return Some(label);
        }
    }
    let gap = (t.abs() - gamma * norm(x)).abs() * 2f64.powi(l);
    if gap > 0.0 && gap.is_finite() {
        let guess = gap.log2().ceil().max(1.0) as i64;
        for j in (guess - 1).max(1)..=guess + 1 {
            let label = RegionLabel::E { j: j as u32, l };
            if in_region(label, x, t, gamma) {
                return Some(label);
            }
        }
    }
    None
}

/// Every label of level `l` whose defining inequalities hold, for
/// exclusivity checks.
pub fn all_labels(x: &[f64], t: f64, l: i32, gamma: f64, max_j: u32) -> Vec<RegionLabel> {
    let mut out: Vec<RegionLabel> = [
        RegionLabel::A { l },
        RegionLabel::B { l },
        RegionLabel::C { l },
        RegionLabel::D { l },
    ]
    .into_iter()
    .filter(|&lab| in_region(lab, x, t, gamma))
    .collect();
    for j in 1..=max_j {
        let lab = RegionLabel::E { j, l };
        if in_region(lab, x, t, gamma) {
            out.push(lab);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn worked_examples() {
        assert_eq!(classify_region(&[0.0, 0.0], 3.0, 0, 1.0), Some(RegionLabel::A { l: 0 }));
        assert_eq!(classify_region(&[8.0, 0.0], 1.0, 0, 1.0), Some(RegionLabel::B { l: 0 }));
        assert_eq!(classify_region(&[8.0, 0.0], 8.5, 0, 1.0), Some(RegionLabel::C { l: 0 }));
        assert_eq!(
            classify_region(&[8.0, 0.0], 20.0, 0, 1.0),
            Some(RegionLabel::D { l: 0 })
        );
        // gap 3 lies in (2, 4]
        assert_eq!(
            classify_region(&[8.0, 0.0], 11.0, 0, 1.0),
            Some(RegionLabel::E { j: 2, l: 0 })
        );
        assert_eq!(classify_region(&[0.1, 0.0], 0.5, 0, 1.0), None);
    }

    #[test]
    fn boundaries_follow_the_written_inequalities() {
        // 2^l γ|x| = 4 belongs to A (≤), not to the far families
        assert_eq!(classify_region(&[4.0, 0.0], 3.0, 0, 1.0), Some(RegionLabel::A { l: 0 }));
        // gap exactly 2^{-l} is C
        assert_eq!(classify_region(&[8.0, 0.0], 9.0, 0, 1.0), Some(RegionLabel::C { l: 0 }));
        // gap exactly 2 closes E_1
        assert_eq!(
            classify_region(&[8.0, 0.0], 10.0, 0, 1.0),
            Some(RegionLabel::E { j: 1, l: 0 })
        );
    }

    #[test]
    fn labels_are_exclusive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gamma = 2f64.powf(0.25);
        for _ in 0..100_000 {
            let l = rng.gen_range(-3..=3);
            let x = [rng.gen_range(-40.0..40.0), rng.gen_range(-40.0..40.0)];
            let t = rng.gen_range(-80.0..80.0);
            let labels = all_labels(&x, t, l, gamma, 40);
            assert!(labels.len() <= 1, "{labels:?}");
            assert_eq!(labels.first().copied(), classify_region(&x, t, l, gamma));
        }
    }
}
