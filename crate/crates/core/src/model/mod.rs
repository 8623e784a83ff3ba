//! Traveling-wave phase space of the Gatenby-Gawlinski model.
//!
//! In the co-moving frame `z = x - eps^p c t` a traveling wave is a heteroclinic
//! orbit of a five-dimensional first-order system in `(u, v, r, w, s)`, where
//! `r = eps^(1-p) (1-u) v_z + c v` and `s = w_z`. This module holds that system in
//! its slow (`z`) and fast (`y = eps^(p-1) z`) formulations, the two equilibria it
//! connects, the critical manifolds of the slow-wave layer problem, and the
//! eigenstructure of the layer Jacobian.

mod eigen;
mod oracle;

pub use eigen::{eigen_analytic, eigen_on_manifold, layer_jacobian, EigenData, Matrix3};
pub use oracle::{eigen_numeric_oracle, solve_cubic};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default floor on `|1 - u|` below which the right-hand sides refuse to divide.
pub const SINGULAR_FLOOR: f64 = 1e-12;

/// Wave-speed scaling exponent `p` in `c_actual = eps^p c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// `p = 0`: speeds of order one.
    Fast,
    /// `p = 1/2`: speeds of order `sqrt(eps)`.
    Slow,
}

impl Scaling {
    pub fn exponent(self) -> f64 {
        match self {
            Scaling::Fast => 0.0,
            Scaling::Slow => 0.5,
        }
    }
}

/// Dimensionless parameters of the model plus the wave-speed scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Destructive influence of the acid on normal cells.
    pub alpha: f64,
    /// Tumor growth rate.
    pub beta: f64,
    /// Acid production/decay rate.
    pub gamma: f64,
    /// Tumor diffusion strength.
    pub epsilon: f64,
    pub scaling: Scaling,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, epsilon: f64, scaling: Scaling) -> Result<Self> {
        let params = Self {
            alpha,
            beta,
            gamma,
            epsilon,
            scaling,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and strictly positive",
                });
            }
        }
        if !(self.epsilon.is_finite() && (0.0..1.0).contains(&self.epsilon)) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: self.epsilon,
                reason: "must lie in [0, 1)",
            });
        }
        Ok(())
    }

    /// `(1 - alpha)_+`, the normal-cell density left behind the invasion front.
    pub fn residual_normal(&self) -> f64 {
        (1.0 - self.alpha).max(0.0)
    }

    /// `eps^q` with the convention `eps^0 = 1` even at `eps = 0`.
    pub fn eps_pow(&self, q: f64) -> f64 {
        if q == 0.0 {
            1.0
        } else {
            self.epsilon.powf(q)
        }
    }
}

pub(crate) fn check_speed(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "c",
            value: c,
            reason: "wave speed must be finite and strictly positive",
        })
    }
}

/// A point `(u, v, r, w, s)` of the traveling-wave phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub w: f64,
    pub s: f64,
}

impl PhasePoint {
    pub const fn new(u: f64, v: f64, r: f64, w: f64, s: f64) -> Self {
        Self { u, v, r, w, s }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.u, self.v, self.r, self.w, self.s]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4])
    }

    /// `u, v` in `[0, 1]` and `w >= 0`, up to `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        (-tol..=1.0 + tol).contains(&self.u) && (-tol..=1.0 + tol).contains(&self.v) && self.w >= -tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumTag {
    Zminus,
    Zplus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub point: PhasePoint,
    pub tag: EquilibriumTag,
}

/// The asymptotic states `(Z-, Z+)` a traveling wave connects.
pub fn equilibria(params: &ModelParams, c: f64) -> Result<(EquilibriumPoint, EquilibriumPoint)> {
    check_speed(c)?;
    let zminus = EquilibriumPoint {
        point: PhasePoint::new(params.residual_normal(), 1.0, c, 1.0, 0.0),
        tag: EquilibriumTag::Zminus,
    };
    let zplus = EquilibriumPoint {
        point: PhasePoint::new(1.0, 0.0, 0.0, 0.0, 0.0),
        tag: EquilibriumTag::Zplus,
    };
    Ok((zminus, zplus))
}

/// `(r - c v) / (1 - u)`. On the plane `r = c v` the quotient vanishes for every
/// `u != 1`, and that limit is used at `u = 1` too (this covers `Z+`).
fn tumor_slope(point: &PhasePoint, c: f64, floor: f64) -> Result<f64> {
    let numerator = point.r - c * point.v;
    if numerator == 0.0 {
        return Ok(0.0);
    }
    Ok(numerator / check_singular(point.u, floor)?)
}

fn check_singular(u: f64, floor: f64) -> Result<f64> {
    let distance = (1.0 - u).abs();
    if distance < floor || !distance.is_finite() {
        return Err(Error::DivisionNearSingularity { distance, floor });
    }
    Ok(1.0 - u)
}

/// Right-hand side of the slow formulation, `d/dz (u, v, r, w, s)`.
pub fn tw_rhs_slow(point: &PhasePoint, params: &ModelParams, c: f64) -> Result<[f64; 5]> {
    tw_rhs_slow_with_floor(point, params, c, SINGULAR_FLOOR)
}

pub fn tw_rhs_slow_with_floor(point: &PhasePoint, params: &ModelParams, c: f64, floor: f64) -> Result<[f64; 5]> {
    check_speed(c)?;
    let p = params.scaling.exponent();
    let eps_p = params.eps_pow(p);
    let eps_1mp = params.eps_pow(1.0 - p);
    if eps_p == 0.0 {
        return Err(Error::ZeroPrefactor { equation: "u" });
    }
    if eps_1mp == 0.0 {
        return Err(Error::ZeroPrefactor { equation: "v" });
    }
    let slope = tumor_slope(point, c, floor)?;
    let PhasePoint { u, v, w, s, .. } = *point;
    let ModelParams { alpha, beta, gamma, .. } = *params;

    Ok([
        -u * (1.0 - u - alpha * w) / (c * eps_p),
        slope / eps_1mp,
        -beta * v * (1.0 - v) / eps_p,
        s,
        -eps_p * c * s - gamma * (v - w),
    ])
}

/// Right-hand side of the fast formulation, `d/dy (u, v, r, w, s)` with `y = eps^(p-1) z`.
///
/// For `eps > 0` this equals `eps^(1-p)` times [`tw_rhs_slow`]. At `eps = 0` it is
/// the layer problem: only `v` moves for `p = 0`, only `(u, v, r)` for `p = 1/2`.
pub fn tw_rhs_fast(point: &PhasePoint, params: &ModelParams, c: f64) -> Result<[f64; 5]> {
    tw_rhs_fast_with_floor(point, params, c, SINGULAR_FLOOR)
}

pub fn tw_rhs_fast_with_floor(point: &PhasePoint, params: &ModelParams, c: f64, floor: f64) -> Result<[f64; 5]> {
    check_speed(c)?;
    let p = params.scaling.exponent();
    let eps_1m2p = params.eps_pow(1.0 - 2.0 * p);
    let eps_1mp = params.eps_pow(1.0 - p);
    // d s/dy carries eps^(1-p) * eps^p = eps on the damping term.
    let eps = params.epsilon;
    let slope = tumor_slope(point, c, floor)?;
    let PhasePoint { u, v, w, s, .. } = *point;
    let ModelParams { alpha, beta, gamma, .. } = *params;

    Ok([
        -eps_1m2p * u * (1.0 - u - alpha * w) / c,
        slope,
        -eps_1m2p * beta * v * (1.0 - v),
        eps_1mp * s,
        -eps * c * s - eps_1mp * gamma * (v - w),
    ])
}

/// The four components of the slow-wave critical manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ManifoldBranch {
    S1,
    S2,
    S3,
    S4,
}

/// The two disjoint branches: `A` carries `v = 0`, `B` carries `v = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManifoldParent {
    A,
    B,
}

impl ManifoldBranch {
    pub const ALL: [ManifoldBranch; 4] = [Self::S1, Self::S2, Self::S3, Self::S4];

    pub fn parent(self) -> ManifoldParent {
        match self {
            Self::S1 | Self::S2 => ManifoldParent::A,
            Self::S3 | Self::S4 => ManifoldParent::B,
        }
    }

    /// Tumor density `v*` on the branch.
    pub fn tumor_level(self) -> f64 {
        match self.parent() {
            ManifoldParent::A => 0.0,
            ManifoldParent::B => 1.0,
        }
    }

    /// `true` on the components with `u = 1 - alpha w`, `false` where `u = 0`.
    pub fn has_normal_cells(self) -> bool {
        matches!(self, Self::S2 | Self::S4)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::S1 => "S1",
            Self::S2 => "S2",
            Self::S3 => "S3",
            Self::S4 => "S4",
        }
    }
}

impl std::fmt::Display for ManifoldBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ManifoldBranch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Self::S1),
            "S2" => Ok(Self::S2),
            "S3" => Ok(Self::S3),
            "S4" => Ok(Self::S4),
            _ => Err(Error::DomainError(format!("unknown manifold branch {s:?}"))),
        }
    }
}

/// Embeds the slow coordinates `(w, s)` into phase space on the given branch.
pub fn manifold_embed(branch: ManifoldBranch, w: f64, s: f64, params: &ModelParams, c: f64) -> PhasePoint {
    let u = if branch.has_normal_cells() {
        1.0 - params.alpha * w
    } else {
        0.0
    };
    let v = branch.tumor_level();
    PhasePoint::new(u, v, c * v, w, s)
}

/// Embeds `(u, r, w, s)` into the fast-wave critical manifold `v = r / c`.
pub fn fast_critical_embed(u: f64, r: f64, w: f64, s: f64, c: f64) -> PhasePoint {
    PhasePoint::new(u, r / c, r, w, s)
}
