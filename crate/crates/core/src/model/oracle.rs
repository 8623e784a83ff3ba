//! Brute-force eigenvalue oracle for 3x3 matrices.
//!
//! Roots of the characteristic cubic by Cardano's formula (trigonometric form when
//! all three roots are real), polished by Newton steps on `det(J - lambda I)`
//! evaluated straight from the matrix entries. Nothing here shares code with the
//! closed-form eigenstructure it is used to check.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::Matrix3;

/// Roots of the monic cubic `x^3 + a x^2 + b x + d`.
pub fn solve_cubic(a: f64, b: f64, d: f64) -> [Complex64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);

    let roots = if disc > 0.0 {
        // One real root and a conjugate pair.
        let big = -q.signum() * (q.abs() / 2.0 + disc.sqrt()).cbrt();
        let small = if big == 0.0 { 0.0 } else { -p / (3.0 * big) };
        let real = big + small;
        let half = -(big + small) / 2.0;
        let imag = 3f64.sqrt() / 2.0 * (big - small);
        [
            Complex64::new(real, 0.0),
            Complex64::new(half, imag),
            Complex64::new(half, -imag),
        ]
    } else if p == 0.0 {
        [Complex64::new(0.0, 0.0); 3]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        [0, 1, 2].map(|k| Complex64::new(m * (theta - 2.0 * PI * k as f64 / 3.0).cos(), 0.0))
    };
    roots.map(|t| t - shift)
}

fn shifted(jac: &Matrix3, lambda: Complex64) -> [[Complex64; 3]; 3] {
    let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = Complex64::new(jac[i][j], 0.0);
        }
        m[i][i] -= lambda;
    }
    m
}

/// `det(J - lambda I)` and its derivative in `lambda`.
fn char_eval(jac: &Matrix3, lambda: Complex64) -> (Complex64, Complex64) {
    let m = shifted(jac, lambda);
    let minor = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let det = m[0][0] * minor(1, 2, 1, 2) - m[0][1] * minor(1, 2, 0, 2) + m[0][2] * minor(1, 2, 0, 1);
    let trace_adj = minor(1, 2, 1, 2) + minor(0, 2, 0, 2) + minor(0, 1, 0, 1);
    (det, -trace_adj)
}

fn polish(jac: &Matrix3, mut lambda: Complex64) -> Complex64 {
    let (mut f, _) = char_eval(jac, lambda);
    for _ in 0..8 {
        let (value, slope) = char_eval(jac, lambda);
        if value == Complex64::new(0.0, 0.0) || slope.norm() == 0.0 {
            break;
        }
        let next = lambda - value / slope;
        let (f_next, _) = char_eval(jac, next);
        if !(f_next.norm() < f.norm()) {
            break;
        }
        lambda = next;
        f = f_next;
    }
    lambda
}

fn descending(a: &Complex64, b: &Complex64) -> Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

/// Eigenvalues of a 3x3 real matrix, sorted by real part then imaginary part, both descending.
pub fn eigen_numeric_oracle(jac: &Matrix3) -> [Complex64; 3] {
    let trace = jac[0][0] + jac[1][1] + jac[2][2];
    let minors = jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1] + jac[0][0] * jac[2][2] - jac[0][2] * jac[2][0]
        + jac[0][0] * jac[1][1]
        - jac[0][1] * jac[1][0];
    let det = jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1])
        - jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0])
        + jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]);
    let mut roots = solve_cubic(-trace, minors, -det).map(|z| polish(jac, z));
    // Real matrices have real or conjugate roots; clear imaginary dust on real ones.
    for z in roots.iter_mut() {
        if z.im.abs() <= 1e-14 * z.norm().max(1.0) {
            z.im = 0.0;
        }
    }
    roots.sort_by(descending);
    roots
}
