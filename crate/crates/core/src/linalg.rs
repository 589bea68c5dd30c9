//! Small dense helpers; the systems here are at most a few dozen unknowns.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn normalized(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    scaled(a, 1.0 / n)
}

/// Solves `m · x = rhs` for a row-major `n × n` matrix. Returns `None` for a
/// numerically singular system.
pub fn solve_dense(m: Vec<f64>, rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    let a = nalgebra::DMatrix::from_row_slice(n, n, &m);
    let b = nalgebra::DVector::from_vec(rhs);
    let x = a.lu().solve(&b)?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x.iter().copied().collect())
    } else {
        None
    }
}
