//! Leading-order fast traveling waves.
//!
//! For `c = O(1)` the tumor profile is the logistic `v0 = 1 / (1 + exp(beta z / c))`,
//! the acid profile is its convolution with the Green's function of
//! `w'' + c w' - gamma w = -gamma v0`, and the normal cells follow from the scalar
//! equation `c u' + u (1 - u - alpha w) = 0` through `u0 = c Phi0 / int_z^inf Phi0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_speed, ModelParams};
use crate::numerics::{simpson_half_panel, simpson_panel, solve_tridiagonal, stencil5, sup_distance};

/// Target sup-norm change between successive halvings of the convolution step.
pub const QUADRATURE_TOL: f64 = 1e-8;
pub const MAX_REFINEMENTS: usize = 10;

/// Roots `(rho_plus, rho_minus)` of `rho^2 + c rho - gamma = 0`.
pub fn rho_pm(c: f64, gamma: f64) -> (f64, f64) {
    let root = (c * c + 4.0 * gamma).sqrt();
    // rho_plus written without the cancellation in -c + root
    (2.0 * gamma / (c + root), -(c + root) / 2.0)
}

/// Logistic tumor profile, evaluated without overflow at any `z`.
pub fn v0_profile(z: f64, params: &ModelParams, c: f64) -> f64 {
    let x = params.beta * z / c;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Default half-length: every kernel has decayed by about `exp(-30)` at the cut.
pub fn default_half_length(params: &ModelParams, c: f64) -> f64 {
    let (rho_plus, rho_minus) = rho_pm(c, params.gamma);
    let longest = [1.0 / rho_plus, 1.0 / rho_minus.abs(), c / params.beta, c]
        .into_iter()
        .fold(0.0, f64::max);
    (30.0 * longest).max(40.0)
}

/// Symmetric uniform grid `[-L, L]` with spacing close to `h` and a node at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZGrid {
    pub half_length: f64,
    /// Number of panels on each side of the origin.
    pub half_panels: usize,
}

impl ZGrid {
    pub const MAX_HALF_PANELS: usize = 10_000_000;

    pub fn new(half_length: f64, h: f64) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidParameter {
                name: "half_length",
                value: half_length,
                reason: "must be finite and positive",
            });
        }
        if !(h > 0.0 && h <= half_length) {
            return Err(Error::InvalidParameter {
                name: "h",
                value: h,
                reason: "spacing must be positive and no larger than the half-length",
            });
        }
        let half_panels = (half_length / h).round().max(1.0);
        if half_panels > Self::MAX_HALF_PANELS as f64 {
            return Err(Error::InvalidParameter {
                name: "h",
                value: h,
                reason: "spacing gives more than MAX_HALF_PANELS panels per half-window",
            });
        }
        Ok(Self {
            half_length,
            half_panels: half_panels as usize,
        })
    }

    pub fn panels(&self) -> usize {
        2 * self.half_panels
    }

    pub fn h(&self) -> f64 {
        self.half_length / self.half_panels as f64
    }

    pub fn len(&self) -> usize {
        self.panels() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn z(&self, j: usize) -> f64 {
        (j as f64 - self.half_panels as f64) * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.z(j)).collect()
    }

    pub fn refined(&self) -> Self {
        Self {
            half_length: self.half_length,
            half_panels: 2 * self.half_panels,
        }
    }
}

/// `sum_{m >= first} (-1)^(m - first) exp(-m k L) / (rate + m k)`, the tails of the convolutions.
fn alternating_tail(first: u32, k: f64, half_length: f64, rate: f64) -> f64 {
    let mut total = 0.0;
    for m in first..first + 200 {
        let term = (-(m as f64) * k * half_length).exp() / (rate + m as f64 * k);
        total += if (m - first).is_multiple_of(2) { term } else { -term };
        if term < 1e-18 * total.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    total
}

/// One pass of the Green's-function convolution by per-panel Simpson rules.
fn w0_single_pass(grid: &ZGrid, params: &ModelParams, c: f64) -> Vec<f64> {
    let (rho_plus, rho_minus) = rho_pm(c, params.gamma);
    let (k, big_l, h, n) = (params.beta / c, grid.half_length, grid.h(), grid.panels());
    let v = |z: f64| v0_profile(z, params, c);
    let (decay_minus, half_minus) = ((rho_minus * h).exp(), (rho_minus * h / 2.0).exp());
    let (decay_plus, half_plus) = ((-rho_plus * h).exp(), (-rho_plus * h / 2.0).exp());

    // int_{-inf}^{z} exp(rho_minus (z - xi)) v0(xi) d xi
    let mut left = vec![0.0; n + 1];
    left[0] = alternating_tail(0, k, big_l, rho_minus.abs());
    for j in 0..n {
        let (z0, z1) = (grid.z(j), grid.z(j + 1));
        let panel = simpson_panel(h, decay_minus * v(z0), half_minus * v(0.5 * (z0 + z1)), v(z1));
        left[j + 1] = decay_minus * left[j] + panel;
    }
    // int_{z}^{inf} exp(rho_plus (z - xi)) v0(xi) d xi
    let mut right = vec![0.0; n + 1];
    right[n] = alternating_tail(1, k, big_l, rho_plus);
    for j in (0..n).rev() {
        let (z0, z1) = (grid.z(j), grid.z(j + 1));
        let panel = simpson_panel(h, v(z0), half_plus * v(0.5 * (z0 + z1)), decay_plus * v(z1));
        right[j] = decay_plus * right[j + 1] + panel;
    }
    let scale = params.gamma / (rho_plus - rho_minus);
    left.iter().zip(&right).map(|(a, b)| scale * (a + b)).collect()
}

/// Acid profile on `grid`, refined by halving until successive passes agree to
/// [`QUADRATURE_TOL`], then Richardson-extrapolated.
pub fn w0_profile(grid: &ZGrid, params: &ModelParams, c: f64) -> Result<Vec<f64>> {
    check_speed(c)?;
    let mut coarse = w0_single_pass(grid, params, c);
    let mut fine_grid = *grid;
    let mut change = f64::INFINITY;
    for level in 1..=MAX_REFINEMENTS {
        fine_grid = fine_grid.refined();
        let stride = 1 << level;
        let fine: Vec<f64> = w0_single_pass(&fine_grid, params, c)
            .into_iter()
            .step_by(stride)
            .collect();
        change = sup_distance(&fine, &coarse);
        if change < QUADRATURE_TOL {
            // The exact profile lies in (0, 1); extrapolation can overshoot 1 by rounding.
            return Ok(fine
                .iter()
                .zip(&coarse)
                .map(|(f, c)| ((16.0 * f - c) / 15.0).min(1.0))
                .collect());
        }
        coarse = fine;
    }
    Err(Error::QuadratureNotConverged {
        refinements: MAX_REFINEMENTS,
        change,
    })
}

/// Independent check of [`w0_profile`]: central differences for
/// `w'' + c w' - gamma w = -gamma v0` with `w(-L) = 1`, `w(L) = 0`, solved at
/// spacing `h` and `h / 2` and Richardson-extrapolated.
pub fn w0_bvp_oracle(grid: &ZGrid, params: &ModelParams, c: f64) -> Result<Vec<f64>> {
    check_speed(c)?;
    let solve = |g: &ZGrid| -> Result<Vec<f64>> {
        let (n, h) = (g.panels(), g.h());
        let (lo, di, up) = (
            1.0 / (h * h) - c / (2.0 * h),
            -2.0 / (h * h) - params.gamma,
            1.0 / (h * h) + c / (2.0 * h),
        );
        let m = n - 1;
        let mut rhs: Vec<f64> = (1..n).map(|j| -params.gamma * v0_profile(g.z(j), params, c)).collect();
        rhs[0] -= lo;
        let mut w = solve_tridiagonal(&vec![lo; m], &vec![di; m], &vec![up; m], &rhs)?;
        w.insert(0, 1.0);
        w.push(0.0);
        Ok(w)
    };
    let coarse = solve(grid)?;
    let fine = solve(&grid.refined())?;
    Ok(coarse
        .iter()
        .zip(fine.iter().step_by(2))
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect())
}

/// `u0` from `log Phi0` sampled at nodes and panel midpoints of `grid`.
///
/// `log_phi` has `2 * grid.panels() + 1` entries. `tail_rate` is the decay rate of
/// `Phi0` beyond the right edge. Works with ratios of `Phi0` only, so adding a
/// constant to `log_phi` leaves the result unchanged.
pub fn u0_from_log_phi(grid: &ZGrid, log_phi: &[f64], tail_rate: f64, c: f64) -> Result<Vec<f64>> {
    let n = grid.panels();
    if log_phi.len() != 2 * n + 1 {
        return Err(Error::DomainError(format!(
            "expected {} samples of log Phi0, got {}",
            2 * n + 1,
            log_phi.len()
        )));
    }
    if !(tail_rate > 0.0) {
        return Err(Error::DomainError(format!(
            "Phi0 does not decay beyond the grid (rate {tail_rate})"
        )));
    }
    if log_phi.iter().any(|l| !l.is_finite()) {
        return Err(Error::OverflowGuard("log Phi0 is not finite"));
    }
    let h = grid.h();
    // ratio[j] = int_{z_j}^inf Phi0 / Phi0(z_j)
    let mut ratio = vec![0.0; n + 1];
    ratio[n] = 1.0 / tail_rate;
    for j in (0..n).rev() {
        let base = log_phi[2 * j];
        let mid = (log_phi[2 * j + 1] - base).exp();
        let next = (log_phi[2 * j + 2] - base).exp();
        ratio[j] = simpson_panel(h, 1.0, mid, next) + next * ratio[j + 1];
    }
    Ok(ratio.into_iter().map(|r| c / r).collect())
}

/// `log Phi0 = -(1/c) int_0^z (1 - alpha w0)` at the nodes of a grid of spacing `h / 2`.
fn log_phi_fine(w_fine: &[f64], h: f64, half_panels: usize, alpha: f64, c: f64) -> Vec<f64> {
    let g: Vec<f64> = w_fine.iter().map(|w| (1.0 - alpha * w) / c).collect();
    let mut ell = vec![0.0; g.len()];
    let center = 2 * half_panels;
    let mut i = center;
    while i + 2 < g.len() {
        ell[i + 1] = ell[i] - simpson_half_panel(h, g[i], g[i + 1], g[i + 2]);
        ell[i + 2] = ell[i] - simpson_panel(h, g[i], g[i + 1], g[i + 2]);
        i += 2;
    }
    let mut i = center;
    while i >= 2 {
        ell[i - 1] = ell[i] + simpson_half_panel(h, g[i], g[i - 1], g[i - 2]);
        ell[i - 2] = ell[i] + simpson_panel(h, g[i - 2], g[i - 1], g[i]);
        i -= 2;
    }
    ell
}

/// Normal-cell profile on `grid`; returns `(phi0, u0)` with `phi0` scaled to a maximum of one.
pub fn u0_profile(grid: &ZGrid, params: &ModelParams, c: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_speed(c)?;
    let w_fine = w0_profile(&grid.refined(), params, c)?;
    let ell = log_phi_fine(&w_fine, grid.h(), grid.half_panels, params.alpha, c);
    let tail_rate = (1.0 - params.alpha * w_fine[w_fine.len() - 1]) / c;
    let u0 = u0_from_log_phi(grid, &ell, tail_rate, c)?;
    let coarse: Vec<f64> = ell.iter().step_by(2).copied().collect();
    let top = coarse.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let phi0 = coarse.iter().map(|l| (l - top).exp()).collect();
    Ok((phi0, u0))
}

/// Pointwise residuals of the three reduced equations on interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FastResiduals {
    /// `c u' + u (1 - u - alpha w)`
    pub u: f64,
    /// `c v' + beta v (1 - v)`
    pub v: f64,
    /// `w'' + c w' - gamma (w - v)`
    pub w: f64,
}

impl FastResiduals {
    pub fn max(&self) -> f64 {
        self.u.max(self.v).max(self.w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastWaveProfile {
    pub params: ModelParams,
    pub c: f64,
    pub grid: ZGrid,
    pub z: Vec<f64>,
    pub v0: Vec<f64>,
    pub w0: Vec<f64>,
    pub phi0: Vec<f64>,
    pub u0: Vec<f64>,
    pub rho_plus: f64,
    pub rho_minus: f64,
}

impl FastWaveProfile {
    /// Sup norms of the reduced-equation residuals, five-point stencils.
    pub fn residuals(&self) -> FastResiduals {
        let (h, c) = (self.grid.h(), self.c);
        let ModelParams { alpha, beta, gamma, .. } = self.params;
        let mut out = FastResiduals { u: 0.0, v: 0.0, w: 0.0 };
        for i in 2..self.z.len() - 2 {
            let (du, _) = stencil5(&self.u0, i, h);
            let (dv, _) = stencil5(&self.v0, i, h);
            let (dw, d2w) = stencil5(&self.w0, i, h);
            let (u, v, w) = (self.u0[i], self.v0[i], self.w0[i]);
            out.u = out.u.max((c * du + u * (1.0 - u - alpha * w)).abs());
            out.v = out.v.max((c * dv + beta * v * (1.0 - v)).abs());
            out.w = out.w.max((d2w + c * dw - gamma * (w - v)).abs());
        }
        out
    }

    /// Linear interpolation of `(u0, v0, w0)` at `z`, clamped to the grid ends.
    pub fn eval(&self, z: f64) -> (f64, f64, f64) {
        let h = self.grid.h();
        let pos = ((z + self.grid.half_length) / h).clamp(0.0, (self.z.len() - 1) as f64);
        let j = (pos.floor() as usize).min(self.z.len() - 2);
        let t = pos - j as f64;
        let lerp = |f: &[f64]| f[j] + t * (f[j + 1] - f[j]);
        (lerp(&self.u0), lerp(&self.v0), lerp(&self.w0))
    }

    fn validate(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::InvariantViolation(what.to_string()));
        if self.v0.windows(2).any(|p| p[1] > p[0]) {
            return fail("v0 is not decreasing");
        }
        if self.v0[self.grid.half_panels] != 0.5 {
            return fail("v0(0) differs from 1/2");
        }
        // The far-left values round to exactly one.
        if self.w0.iter().any(|w| !(*w > 0.0 && *w <= 1.0)) {
            return fail("w0 leaves (0, 1]");
        }
        let floor = self.params.residual_normal() - 1e-6;
        if self.u0.iter().any(|u| !(*u > floor && *u <= 1.0 + 1e-12)) {
            return fail("u0 leaves ((1 - alpha)_+, 1]");
        }
        if self.u0.windows(2).any(|p| p[1] < p[0] - 1e-12) {
            return fail("u0 is not increasing");
        }
        if !(self.rho_plus > 0.0 && self.rho_minus < 0.0) {
            return fail("rho_plus and rho_minus do not straddle zero");
        }
        Ok(())
    }
}

/// Builds the leading-order fast wave with speed `c` on `[-L, L]` with spacing `h`.
///
/// `half_length` defaults to [`default_half_length`].
pub fn construct_fast_wave(params: &ModelParams, c: f64, half_length: Option<f64>, h: f64) -> Result<FastWaveProfile> {
    check_speed(c)?;
    params.validate()?;
    let grid = ZGrid::new(half_length.unwrap_or_else(|| default_half_length(params, c)), h)?;
    let z = grid.nodes();
    let v0 = z.iter().map(|&z| v0_profile(z, params, c)).collect();
    let w0 = w0_profile(&grid, params, c)?;
    let (phi0, u0) = u0_profile(&grid, params, c)?;
    let (rho_plus, rho_minus) = rho_pm(c, params.gamma);
    let profile = FastWaveProfile {
        params: *params,
        c,
        grid,
        z,
        v0,
        w0,
        phi0,
        u0,
        rho_plus,
        rho_minus,
    };
    profile.validate()?;
    Ok(profile)
}
