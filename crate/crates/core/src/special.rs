//! Special functions used as references.

/// `J_0(x)` by Miller's downward recurrence, normalized with
/// `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j0(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let x = x.abs();
    let start = 2 * ((x as usize + 40) / 2);
    let (mut jp1, mut j) = (0.0f64, 1e-30f64);
    let mut norm_sum = 0.0;
    let mut j0 = 0.0;
    for n in (1..=start).rev() {
        let jm1 = 2.0 * n as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if (n - 1) % 2 == 0 && n - 1 > 0 {
            norm_sum += 2.0 * j;
        }
        if n - 1 == 0 {
            j0 = j;
        }
    }
    j0 / (j0 + norm_sum)
}
