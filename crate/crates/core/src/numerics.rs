//! Small numerical kernels shared by the profile constructors.

use crate::error::{Error, Result};

/// Simpson's rule on one panel of width `h` from endpoint and midpoint samples.
pub fn simpson_panel(h: f64, f0: f64, fm: f64, f1: f64) -> f64 {
    h / 6.0 * (f0 + 4.0 * fm + f1)
}

/// Integral over the first half of a Simpson panel, exact for quadratics.
pub fn simpson_half_panel(h: f64, f0: f64, fm: f64, f1: f64) -> f64 {
    h / 24.0 * (5.0 * f0 + 8.0 * fm - f1)
}

/// Solves a tridiagonal system by the Thomas algorithm.
///
/// `lower[i]` multiplies `x[i - 1]` in row `i` and `upper[i]` multiplies `x[i + 1]`;
/// `lower[0]` and `upper[n - 1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::DomainError("tridiagonal bands differ in length".into()));
    }
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 0..n {
        let below = if i == 0 { 0.0 } else { lower[i] };
        let (prev_c, prev_d) = if i == 0 {
            (0.0, 0.0)
        } else {
            (c_prime[i - 1], d_prime[i - 1])
        };
        let pivot = diag[i] - below * prev_c;
        if pivot.abs() < f64::MIN_POSITIVE {
            return Err(Error::NoConvergence(format!("zero pivot in tridiagonal row {i}")));
        }
        c_prime[i] = upper[i] / pivot;
        d_prime[i] = (rhs[i] - below * prev_d) / pivot;
    }
    let mut x = d_prime;
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= c_prime[i] * x[i + 1];
    }
    Ok(x)
}

/// Fourth-order central first and second derivatives at interior node `i` (needs two neighbors each side).
pub fn stencil5(f: &[f64], i: usize, h: f64) -> (f64, f64) {
    let (m2, m1, p1, p2) = (f[i - 2], f[i - 1], f[i + 1], f[i + 2]);
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * f[i] + 16.0 * p1 - p2) / (12.0 * h * h);
    (d1, d2)
}

/// Sup-norm distance between equal-length slices.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
