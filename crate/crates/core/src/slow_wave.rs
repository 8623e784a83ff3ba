//! Singular slow traveling waves.
//!
//! At `eps = 0` a slow wave is a concatenation of pieces on the critical manifolds
//! S1-S4 joined by a single Fisher-KPP layer at `z = 0`, where the tumor density
//! jumps from one to zero. The acid field solves `w'' = gamma (w - v*)` on each
//! piece, so it is a sum of `exp(+-sqrt(gamma) z)`; matching `w` and `s = w'` at the
//! layer fixes `w(0) = 1/2`. Normal cells switch between `u = 0` and `u = 1 - alpha w`
//! where `alpha w = 1`.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_speed, ManifoldBranch, ModelParams};
use crate::ode::Dopri5;

/// Largest `|z_-|` reported before the switch point is declared to have left to `-inf`.
pub const Z_MINUS_CAP: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaRegime {
    /// `0 < alpha < 1`
    Low,
    /// `1 < alpha < 2`
    Mid,
    /// `alpha > 2`
    High,
    BoundaryOne,
    BoundaryTwo,
}

impl AlphaRegime {
    pub fn name(self) -> &'static str {
        match self {
            Self::Low => "low",
            Self::Mid => "mid",
            Self::High => "high",
            Self::BoundaryOne => "boundary-one",
            Self::BoundaryTwo => "boundary-two",
        }
    }
}

pub fn classify_regime(alpha: f64) -> Result<AlphaRegime> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must be finite and strictly positive",
        });
    }
    Ok(if alpha < 1.0 {
        AlphaRegime::Low
    } else if alpha == 1.0 {
        AlphaRegime::BoundaryOne
    } else if alpha < 2.0 {
        AlphaRegime::Mid
    } else if alpha == 2.0 {
        AlphaRegime::BoundaryTwo
    } else {
        AlphaRegime::High
    })
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "must be finite and strictly positive",
        })
    }
}

/// Where `u` leaves zero behind the layer, `gamma^(-1/2) log(2 (alpha - 1) / alpha)`, for `1 < alpha < 2`.
pub fn z_minus(alpha: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::DomainError(format!("z_minus needs 1 < alpha < 2, got {alpha}")));
    }
    let z = ((alpha - 2.0) / alpha).ln_1p() / gamma.sqrt();
    if !(z.abs() <= Z_MINUS_CAP) {
        return Err(Error::DomainBlowup {
            quantity: "z_minus",
            value: z,
            cap: Z_MINUS_CAP,
        });
    }
    Ok(z)
}

/// Width of the interstitial gap, `gamma^(-1/2) log(alpha / 2)`, for `alpha > 2`.
pub fn z_plus(alpha: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(alpha > 2.0 && alpha.is_finite()) {
        return Err(Error::DomainError(format!("z_plus needs alpha > 2, got {alpha}")));
    }
    Ok(((alpha - 2.0) / 2.0).ln_1p() / gamma.sqrt())
}

/// Predicted gap width: zero up to `alpha = 2`, [`z_plus`] beyond.
pub fn predicted_gap(params: &ModelParams) -> f64 {
    if params.alpha > 2.0 {
        z_plus(params.alpha, params.gamma).unwrap_or(0.0)
    } else {
        0.0
    }
}

/// `(w, s)` on a branch: `w = v* + C1 exp(sqrt(gamma) z) + C2 exp(-sqrt(gamma) z)`, `s = w'`.
pub fn slow_field(branch: ManifoldBranch, c1: f64, c2: f64, gamma: f64, z: f64) -> (f64, f64) {
    let g = gamma.sqrt();
    let (grow, decay) = (c1 * (g * z).exp(), c2 * (-g * z).exp());
    (branch.tumor_level() + grow + decay, g * (grow - decay))
}

/// `2 sqrt(D beta)`.
pub fn c_min(diffusion: f64, beta: f64) -> f64 {
    2.0 * (diffusion * beta).sqrt()
}

/// Field constants `(C1, C2)` for each branch used by a profile.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SlowFieldCoefficients {
    pub entries: Vec<(ManifoldBranch, f64, f64)>,
}

impl SlowFieldCoefficients {
    pub fn get(&self, branch: ManifoldBranch) -> Option<(f64, f64)> {
        self.entries.iter().find(|e| e.0 == branch).map(|e| (e.1, e.2))
    }
}

/// One piece of the singular orbit on the interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowPiece {
    pub start: f64,
    pub end: f64,
    pub branch: ManifoldBranch,
    pub c1: f64,
    pub c2: f64,
}

/// Singular orbit evaluated at one `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowPoint {
    pub z: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub s: f64,
    pub branch: ManifoldBranch,
}

/// Tunables of [`solve_layer`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerOptions {
    /// Launch displacement from the saddle along its unstable direction.
    pub sigma: f64,
    /// Phase-plane integration stops once `v` drops below this.
    pub cutoff: f64,
    /// Values of `v` down to `-nonneg_tol` still count as nonnegative.
    pub nonneg_tol: f64,
    /// Tolerance of the embedded Runge-Kutta pair.
    pub tol: f64,
    /// Largest `y` integrated, in the phase plane and in the tail.
    pub y_cap: f64,
}

impl Default for LayerOptions {
    fn default() -> Self {
        Self {
            sigma: 1e-6,
            cutoff: 1e-8,
            nonneg_tol: 1e-8,
            tol: 1e-10,
            y_cap: 1e4,
        }
    }
}

/// Heteroclinic of `D v'' + c v' + beta v (1 - v) = 0` from `v = 1` to `v = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerProfile {
    /// Fast coordinate, shifted so that `v = 1/2` at `y = 0`.
    pub y: Vec<f64>,
    pub v: Vec<f64>,
    /// `D v' + c v`
    pub r: Vec<f64>,
    /// Normal cells are frozen across the layer at `1 - D`.
    pub u_layer: f64,
    pub diffusion: f64,
    pub beta: f64,
    pub c: f64,
    pub monotone_nonneg: bool,
    pub min_v: f64,
    /// Limit of `v'/v` in the tail, when the tail stays positive.
    pub tail_rate: Option<f64>,
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

/// Shoots the layer heteroclinic out of the saddle `(v, v') = (1, 0)`.
///
/// The phase plane is integrated until `v < cutoff`. If `v` is still positive there,
/// the tail is followed in `(log v, v'/v)` coordinates, where an oscillating tail
/// shows up as `v'/v -> -inf` even when its undershoot is far below the floating
/// point range of `v`.
pub fn solve_layer(diffusion: f64, beta: f64, c: f64, opts: &LayerOptions) -> Result<LayerProfile> {
    check_positive("D", diffusion)?;
    check_positive("beta", beta)?;
    check_speed(c)?;
    let d = diffusion;
    let solver = Dopri5 {
        rtol: opts.tol,
        atol: opts.tol * opts.cutoff,
        h_init: 1e-3,
        h_max: 0.5,
        ..Dopri5::default()
    };
    let plane = |y: &[f64; 2]| [y[1], -(c * y[1] + beta * y[0] * (1.0 - y[0])) / d];
    let mu = (-c + (c * c + 4.0 * d * beta).sqrt()) / (2.0 * d);
    let start = [1.0 - opts.sigma, -opts.sigma * mu];

    let (mut ys, mut vs, mut ps) = (vec![0.0], vec![start[0]], vec![start[1]]);
    let (y_end, end, stopped) = solver.integrate(plane, 0.0, start, opts.y_cap, |y, s| {
        ys.push(y);
        vs.push(s[0]);
        ps.push(s[1]);
        if s[0] < opts.cutoff {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    if !stopped {
        return Err(Error::NoConvergence(format!(
            "layer did not reach v < {} by y = {} (v = {})",
            opts.cutoff, opts.y_cap, end[0]
        )));
    }
    let mut min_v = vs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut tail_rate = None;
    let mut blowup = false;

    if end[0] > 0.0 {
        let theta_floor = -1e3 * (1.0 + c / d + (beta / d).sqrt());
        let tail = |s: &[f64; 2]| {
            let v = s[0].exp();
            [s[1], -(c * s[1] + beta * (1.0 - v)) / d - s[1] * s[1]]
        };
        let tail_solver = Dopri5 {
            rtol: opts.tol,
            atol: opts.tol,
            h_max: 10.0,
            ..solver
        };
        let (_, last, broke) = tail_solver.integrate(
            tail,
            y_end,
            [end[0].ln(), end[1] / end[0]],
            y_end + opts.y_cap,
            |_, s| {
                if s[1] < theta_floor {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            },
        )?;
        blowup = broke;
        if !broke {
            tail_rate = Some(last[1]);
        }
    } else {
        // Already crossed zero: follow the undershoot to its trough.
        let (_, _, _) = solver.integrate(plane, y_end, end, y_end + opts.y_cap, |_, s| {
            min_v = min_v.min(s[0]);
            if s[1] >= 0.0 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
    }

    let shift = half_crossing(&ys, &vs).unwrap_or(0.0);
    let r = vs.iter().zip(&ps).map(|(v, p)| d * p + c * v).collect();
    Ok(LayerProfile {
        y: ys.iter().map(|y| y - shift).collect(),
        v: vs,
        r,
        u_layer: 1.0 - d,
        diffusion: d,
        beta,
        c,
        monotone_nonneg: min_v >= -opts.nonneg_tol && !blowup,
        min_v,
        tail_rate,
    })
}

fn half_crossing(ys: &[f64], vs: &[f64]) -> Option<f64> {
    (0..vs.len().saturating_sub(1))
        .find(|&i| vs[i] >= 0.5 && vs[i + 1] < 0.5)
        .map(|i| ys[i] + (0.5 - vs[i]) / (vs[i + 1] - vs[i]) * (ys[i + 1] - ys[i]))
}

/// Smallest speed for which [`solve_layer`] reports a monotone nonnegative layer, by bisection.
pub fn bisect_min_speed(diffusion: f64, beta: f64, rel_tol: f64, opts: &LayerOptions) -> Result<f64> {
    let monotone = |c: f64| solve_layer(diffusion, beta, c, opts).map(|l| l.monotone_nonneg);
    let mut hi = 1.0;
    while !monotone(hi)? {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    while monotone(lo)? {
        hi = lo;
        lo /= 2.0;
    }
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if monotone(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Continuity checks of an assembled profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingReport {
    /// `|w(0-) - w(0+)|`
    pub w_jump: f64,
    /// `|s(0-) - s(0+)|`
    pub s_jump: f64,
    /// `|w(0+) - 1/2|`
    pub w_origin: f64,
    /// `|s(0+) + sqrt(gamma)/2|`
    pub s_origin: f64,
    /// `|u(0-) - u(0+)|`
    pub u_jump_origin: f64,
    /// `|alpha w - 1|` at the switch point, absent in the low regime.
    pub switch_alpha_w: Option<f64>,
    /// `|u(z-) - u(z+)|` at the switch point.
    pub u_jump_switch: Option<f64>,
    pub w_jump_switch: Option<f64>,
    pub s_jump_switch: Option<f64>,
}

impl MatchingReport {
    pub fn max(&self) -> f64 {
        [
            Some(self.w_jump),
            Some(self.s_jump),
            Some(self.w_origin),
            Some(self.s_origin),
            Some(self.u_jump_origin),
            self.switch_alpha_w,
            self.u_jump_switch,
            self.w_jump_switch,
            self.s_jump_switch,
        ]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowSingularProfile {
    pub params: ModelParams,
    pub c: f64,
    pub regime: AlphaRegime,
    pub pieces: Vec<SlowPiece>,
    pub z_minus: Option<f64>,
    pub z_plus: Option<f64>,
    pub coefficients: SlowFieldCoefficients,
    pub layer: LayerProfile,
    /// Minimum layer speed for this regime.
    pub c_min: f64,
    pub warnings: Vec<String>,
}

impl SlowSingularProfile {
    fn piece_index(&self, z: f64) -> usize {
        self.pieces
            .iter()
            .position(|p| z < p.end)
            .unwrap_or(self.pieces.len() - 1)
    }

    fn eval_piece(&self, index: usize, z: f64) -> SlowPoint {
        let piece = &self.pieces[index];
        let (w, s) = slow_field(piece.branch, piece.c1, piece.c2, self.params.gamma, z);
        let u = if piece.branch.has_normal_cells() {
            1.0 - self.params.alpha * w
        } else {
            0.0
        };
        SlowPoint {
            z,
            u,
            v: piece.branch.tumor_level(),
            w,
            s,
            branch: piece.branch,
        }
    }

    /// The orbit at `z`; each breakpoint belongs to the piece on its right.
    pub fn eval(&self, z: f64) -> SlowPoint {
        self.eval_piece(self.piece_index(z), z)
    }

    pub fn sample(&self, zs: &[f64]) -> Vec<SlowPoint> {
        zs.iter().map(|&z| self.eval(z)).collect()
    }

    /// Breakpoints between pieces: the layer at zero and the switch point if any.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.windows(2).map(|p| p[0].end).collect()
    }

    pub fn matching(&self) -> MatchingReport {
        let at_origin = self.piece_index(0.0);
        let (left, right) = (self.eval_piece(at_origin - 1, 0.0), self.eval_piece(at_origin, 0.0));
        let switch = self.z_minus.or(self.z_plus);
        let jumps = switch.map(|z| {
            let i = self.piece_index(z);
            let (a, b) = (self.eval_piece(i - 1, z), self.eval_piece(i, z));
            (
                (self.params.alpha * b.w - 1.0).abs(),
                (a.u - b.u).abs(),
                (a.w - b.w).abs(),
                (a.s - b.s).abs(),
            )
        });
        MatchingReport {
            w_jump: (left.w - right.w).abs(),
            s_jump: (left.s - right.s).abs(),
            w_origin: (right.w - 0.5).abs(),
            s_origin: (right.s + 0.5 * self.params.gamma.sqrt()).abs(),
            u_jump_origin: (left.u - right.u).abs(),
            switch_alpha_w: jumps.map(|j| j.0),
            u_jump_switch: jumps.map(|j| j.1),
            w_jump_switch: jumps.map(|j| j.2),
            s_jump_switch: jumps.map(|j| j.3),
        }
    }
}

/// Builds the singular slow orbit for speed `c` (in slow units, true speed `c sqrt(eps)`).
///
/// A speed below the regime's minimum still yields a profile, with a warning and a
/// non-monotone layer.
pub fn assemble_singular(params: &ModelParams, c: f64, opts: &LayerOptions) -> Result<SlowSingularProfile> {
    params.validate()?;
    check_speed(c)?;
    let regime = classify_regime(params.alpha)?;
    let ModelParams { alpha, gamma, beta, .. } = *params;
    use ManifoldBranch::*;
    let (left, right) = ((-0.5, 0.0), (0.0, 0.5));
    let piece = |start, end, branch, (c1, c2): (f64, f64)| SlowPiece {
        start,
        end,
        branch,
        c1,
        c2,
    };
    let inf = f64::INFINITY;
    let (pieces, zm, zp, diffusion) = match regime {
        AlphaRegime::BoundaryOne | AlphaRegime::BoundaryTwo => return Err(Error::BoundaryAlpha(alpha)),
        AlphaRegime::Low => (
            vec![piece(-inf, 0.0, S4, left), piece(0.0, inf, S2, right)],
            None,
            None,
            alpha / 2.0,
        ),
        AlphaRegime::Mid => {
            let zm = z_minus(alpha, gamma)?;
            (
                vec![
                    piece(-inf, zm, S3, left),
                    piece(zm, 0.0, S4, left),
                    piece(0.0, inf, S2, right),
                ],
                Some(zm),
                None,
                alpha / 2.0,
            )
        }
        AlphaRegime::High => {
            let zp = z_plus(alpha, gamma)?;
            (
                vec![
                    piece(-inf, 0.0, S3, left),
                    piece(0.0, zp, S1, right),
                    piece(zp, inf, S2, right),
                ],
                None,
                Some(zp),
                1.0,
            )
        }
    };
    let coefficients = SlowFieldCoefficients {
        entries: pieces.iter().map(|p| (p.branch, p.c1, p.c2)).collect(),
    };
    let layer = solve_layer(diffusion, beta, c, opts)?;
    let threshold = c_min(diffusion, beta);
    let mut warnings = Vec::new();
    if c < threshold {
        warnings.push(format!("speed {c} is below the minimum layer speed {threshold}"));
    }
    Ok(SlowSingularProfile {
        params: *params,
        c,
        regime,
        pieces,
        z_minus: zm,
        z_plus: zp,
        coefficients,
        layer,
        c_min: threshold,
        warnings,
    })
}
