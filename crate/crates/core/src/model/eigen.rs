use num_complex::Complex64;
use serde::Serialize;

use super::{check_singular, check_speed, ManifoldBranch, ModelParams, PhasePoint, SINGULAR_FLOOR};
use crate::error::{Error, Result};

/// Row-major 3x3 real matrix.
pub type Matrix3 = [[f64; 3]; 3];

/// Eigenvalues and eigenvectors of the layer Jacobian.
///
/// `lambdas[1]` takes the `+` sign of the square root and `lambdas[2]` the `-` sign.
/// Eigenvectors are not normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenData {
    pub lambdas: [Complex64; 3],
    pub eigvecs: [[Complex64; 3]; 3],
    /// First component of the first eigenvector.
    pub fvalue: f64,
}

impl EigenData {
    pub fn lambda1(&self) -> Complex64 {
        self.lambdas[0]
    }

    pub fn lambda2(&self) -> Complex64 {
        self.lambdas[1]
    }

    pub fn lambda3(&self) -> Complex64 {
        self.lambdas[2]
    }

    /// `|J v_i - lambda_i v_i| / |v_i|` for each pair (zero for a null eigenvector).
    pub fn residuals(&self, jac: &Matrix3) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, res) in out.iter_mut().enumerate() {
            let vec = &self.eigvecs[i];
            let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for row in 0..3 {
                let jv: Complex64 = (0..3).map(|col| vec[col] * jac[row][col]).sum();
                acc += (jv - self.lambdas[i] * vec[row]).norm_sqr();
            }
            *res = acc.sqrt() / norm;
        }
        out
    }
}

/// Jacobian of the `(u, v, r)` layer equations for slow waves.
pub fn layer_jacobian(point: &PhasePoint, params: &ModelParams, c: f64) -> Result<Matrix3> {
    check_speed(c)?;
    let one_minus_u = check_singular(point.u, SINGULAR_FLOOR)?;
    let PhasePoint { u, v, r, w, .. } = *point;
    Ok([
        [-(1.0 - 2.0 * u - params.alpha * w) / c, 0.0, 0.0],
        [
            (r - c * v) / (one_minus_u * one_minus_u),
            -c / one_minus_u,
            1.0 / one_minus_u,
        ],
        [0.0, params.beta * (2.0 * v - 1.0), 0.0],
    ])
}

fn assemble(
    lambda1: f64,
    lambda2: Complex64,
    lambda3: Complex64,
    one_minus_u: f64,
    b: f64,
    flux: f64,
    c: f64,
) -> EigenData {
    let fvalue = one_minus_u * (lambda1 * (lambda1 * one_minus_u + c) - b);
    let re = |x: f64| Complex64::new(x, 0.0);
    EigenData {
        lambdas: [re(lambda1), lambda2, lambda3],
        eigvecs: [
            [re(fvalue), re(lambda1 * flux), re(b * flux)],
            [re(0.0), lambda2, re(b)],
            [re(0.0), lambda3, re(b)],
        ],
        fvalue,
    }
}

fn quadratic_pair(c: f64, discriminant: f64, denom: f64) -> (Complex64, Complex64) {
    let root = Complex64::new(discriminant, 0.0).sqrt();
    let minus_c = Complex64::new(-c, 0.0);
    ((minus_c + root) / denom, (minus_c - root) / denom)
}

/// Closed-form eigenstructure of [`layer_jacobian`] at an arbitrary point.
pub fn eigen_analytic(point: &PhasePoint, params: &ModelParams, c: f64) -> Result<EigenData> {
    check_speed(c)?;
    let one_minus_u = check_singular(point.u, SINGULAR_FLOOR)?;
    let PhasePoint { u, v, r, w, .. } = *point;
    let b = params.beta * (2.0 * v - 1.0);
    let lambda1 = -(1.0 - 2.0 * u - params.alpha * w) / c;
    let (lambda2, lambda3) = quadratic_pair(c, c * c + 4.0 * b * one_minus_u, 2.0 * one_minus_u);
    Ok(assemble(lambda1, lambda2, lambda3, one_minus_u, b, r - c * v, c))
}

/// Eigenstructure specialized to one component of the critical manifold.
pub fn eigen_on_manifold(branch: ManifoldBranch, w: f64, params: &ModelParams, c: f64) -> Result<EigenData> {
    check_speed(c)?;
    let ModelParams { alpha, beta, .. } = *params;
    let aw = alpha * w;
    let (lambda1, one_minus_u, b) = match branch {
        ManifoldBranch::S1 => (-(1.0 - aw) / c, 1.0, -beta),
        ManifoldBranch::S2 => ((1.0 - aw) / c, aw, -beta),
        ManifoldBranch::S3 => (-(1.0 - aw) / c, 1.0, beta),
        ManifoldBranch::S4 => ((1.0 - aw) / c, aw, beta),
    };
    let (lambda2, lambda3) = match branch {
        ManifoldBranch::S1 => quadratic_pair(c, c * c - 4.0 * beta, 2.0),
        ManifoldBranch::S3 => quadratic_pair(c, c * c + 4.0 * beta, 2.0),
        ManifoldBranch::S2 | ManifoldBranch::S4 => {
            if aw == 0.0 || !aw.is_finite() {
                return Err(Error::DomainError(format!(
                    "alpha * w = {aw} makes the {branch} eigenvalue denominator vanish"
                )));
            }
            let sign = if branch == ManifoldBranch::S2 { -1.0 } else { 1.0 };
            quadratic_pair(c, c * c + sign * 4.0 * alpha * beta * w, 2.0 * aw)
        }
    };
    // r - c v vanishes identically on every component.
    Ok(assemble(lambda1, lambda2, lambda3, one_minus_u, b, 0.0, c))
}
