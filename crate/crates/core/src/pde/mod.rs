//! Method-of-lines simulation of the full reaction-diffusion system
//!
//! ```text
//! U_t = U (1 - U - alpha W)
//! V_t = beta V (1 - V) + eps d/dx[(1 - U) V_x]
//! W_t = gamma (V - W) + W_xx
//! ```
//!
//! and of its quasi-steady-state reduction, where `V` is frozen to the Heaviside
//! profile `H(-x)`. Space is cell-centered with zero-flux boundaries; time is
//! classical fourth-order Runge-Kutta.

mod measure;

pub use measure::{measure_gap, measure_speed, GapMeasurement, SpeedEstimate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Uniform cell-centered grid on `[x0, x1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x0: f64,
    pub x1: f64,
    pub n: usize,
}

impl Grid1D {
    pub const MIN_CELLS: usize = 16;

    pub fn new(x0: f64, x1: f64, n: usize) -> Result<Self> {
        if !(x0.is_finite() && x1.is_finite() && x1 > x0) {
            return Err(Error::DomainError(format!("grid needs x1 > x0, got [{x0}, {x1}]")));
        }
        if n < Self::MIN_CELLS {
            return Err(Error::DomainError(format!(
                "grid needs at least {} cells, got {n}",
                Self::MIN_CELLS
            )));
        }
        Ok(Self { x0, x1, n })
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / self.n as f64
    }

    /// Center of cell `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

/// Fields `U, V, W` on the grid at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

/// Which field a measurement reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldTag {
    U,
    V,
    W,
}

impl FieldState {
    pub fn homogeneous(n: usize, u: f64, v: f64, w: f64) -> Self {
        Self {
            t: 0.0,
            u: vec![u; n],
            v: vec![v; n],
            w: vec![w; n],
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn field(&self, tag: FieldTag) -> &[f64] {
        match tag {
            FieldTag::U => &self.u,
            FieldTag::V => &self.v,
            FieldTag::W => &self.w,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).chain(&self.w).all(|x| x.is_finite())
    }

    /// Smallest entry across the three fields.
    pub fn min_value(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .chain(&self.w)
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Diagnostic flag: some entry left `[-1e-6, 1 + 1e-6]`.
    pub fn out_of_range(&self) -> bool {
        const TOL: f64 = 1e-6;
        self.u
            .iter()
            .chain(&self.v)
            .chain(&self.w)
            .any(|&x| !(-TOL..=1.0 + TOL).contains(&x))
    }
}

/// Time derivatives of the three fields.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDerivative {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

/// Full model or the quasi-steady-state reduction with `V = H(-x)` frozen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dynamics {
    Full,
    Qss,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum DtPolicy {
    Fixed {
        dt: f64,
    },
    /// `dt <= safety * dx^2 / (2 D_max)`.
    Cfl {
        safety: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    ZeroFlux,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampKind {
    /// `1/2 (1 - tanh(2 (x - x0) / width))` blend, exponential tails on both sides.
    Tanh,
    /// Hard step; a node sitting exactly on the step gets the average.
    Step,
}

/// Blend from the `Z-` state on the left to the `Z+` state on the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub kind: RampKind,
    pub position: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: DtPolicy,
    pub t_end: f64,
    /// Number of snapshots after the initial one, evenly spaced in time.
    pub snapshots: usize,
    pub boundary: Boundary,
    pub initial: InitialCondition,
    pub speed_level: f64,
    pub gap_delta: f64,
}

impl SimConfig {
    pub const DEFAULT_SAFETY: f64 = 0.4;
    pub const DEFAULT_SPEED_LEVEL: f64 = 0.5;
    pub const DEFAULT_GAP_DELTA: f64 = 0.05;

    /// Defaults: CFL time step, tanh ramp of width 1 at a third of the domain.
    pub fn new(grid: &Grid1D, t_end: f64, snapshots: usize) -> Self {
        Self {
            dt: DtPolicy::Cfl {
                safety: Self::DEFAULT_SAFETY,
            },
            t_end,
            snapshots,
            boundary: Boundary::ZeroFlux,
            initial: InitialCondition {
                kind: RampKind::Tanh,
                position: grid.x0 + (grid.x1 - grid.x0) / 3.0,
                width: 1.0,
            },
            speed_level: Self::DEFAULT_SPEED_LEVEL,
            gap_delta: Self::DEFAULT_GAP_DELTA,
        }
    }

    pub fn with_initial(mut self, kind: RampKind, position: f64, width: f64) -> Self {
        self.initial = InitialCondition { kind, position, width };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| Err(Error::InvalidParameter { name, value, reason });
        match self.dt {
            DtPolicy::Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => return bad("dt", dt, "must be positive"),
            DtPolicy::Cfl { safety } if !(safety > 0.0 && safety <= 1.0) => {
                return bad("safety", safety, "must lie in (0, 1]")
            }
            _ => {}
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end", self.t_end, "must be positive");
        }
        if self.snapshots == 0 {
            return bad("snapshots", 0.0, "must be at least one");
        }
        if !(self.speed_level > 0.0 && self.speed_level < 1.0) {
            return bad("speed_level", self.speed_level, "must lie in (0, 1)");
        }
        if !(self.gap_delta > 0.0 && self.gap_delta < 0.5) {
            return bad("gap_delta", self.gap_delta, "must lie in (0, 0.5)");
        }
        Ok(())
    }
}

/// Snapshot history of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimSeries {
    pub grid: Grid1D,
    pub params: ModelParams,
    pub dynamics: Dynamics,
    pub dt: f64,
    pub snapshots: Vec<FieldState>,
}

impl SimSeries {
    pub fn last(&self) -> &FieldState {
        self.snapshots.last().expect("a series always holds its initial state")
    }
}

/// Ramp initial data between the homogeneous `Z-` and `Z+` states.
pub fn initial_step(grid: &Grid1D, params: &ModelParams, ic: &InitialCondition) -> Result<FieldState> {
    if !(grid.x0..=grid.x1).contains(&ic.position) {
        return Err(Error::DomainError(format!(
            "ramp position {} lies outside [{}, {}]",
            ic.position, grid.x0, grid.x1
        )));
    }
    if ic.kind == RampKind::Tanh && !(ic.width >= 2.0 * grid.dx()) {
        return Err(Error::InvalidParameter {
            name: "width",
            value: ic.width,
            reason: "tanh ramp must span at least two cells",
        });
    }
    let left = [params.residual_normal(), 1.0, 1.0];
    let right = [1.0, 0.0, 0.0];
    let mut state = FieldState::homogeneous(grid.n, 0.0, 0.0, 0.0);
    for i in 0..grid.n {
        let x = grid.x(i);
        // Weights of the left and right states. The left weight is evaluated directly
        // so its exponential tail survives far ahead of the ramp.
        let (a, b) = match ic.kind {
            RampKind::Tanh => {
                let left_weight = 1.0 / (1.0 + (4.0 * (x - ic.position) / ic.width).exp());
                (left_weight, 1.0 - left_weight)
            }
            RampKind::Step => match x.partial_cmp(&ic.position) {
                Some(std::cmp::Ordering::Less) => (1.0, 0.0),
                Some(std::cmp::Ordering::Greater) => (0.0, 1.0),
                _ => (0.5, 0.5),
            },
        };
        state.u[i] = a * left[0] + b * right[0];
        state.v[i] = a * left[1] + b * right[1];
        state.w[i] = a * left[2] + b * right[2];
    }
    Ok(state)
}

/// `H(-x)` on the grid: 1 left of the origin, 0 right of it, 1/2 on a node at 0.
pub fn heaviside_left(grid: &Grid1D) -> Vec<f64> {
    (0..grid.n)
        .map(|i| {
            let x = grid.x(i);
            if x < 0.0 {
                1.0
            } else if x > 0.0 {
                0.0
            } else {
                0.5
            }
        })
        .collect()
}

fn rhs_into(
    params: &ModelParams,
    dynamics: Dynamics,
    inv_dx2: f64,
    (u, v, w): (&[f64], &[f64], &[f64]),
    (du, dv, dw): (&mut [f64], &mut [f64], &mut [f64]),
) {
    let n = u.len();
    let ModelParams {
        alpha,
        beta,
        gamma,
        epsilon,
        ..
    } = *params;
    let eps_coef = epsilon * inv_dx2;
    let last = n - 1;
    for i in 0..n {
        let (ui, vi, wi) = (u[i], v[i], w[i]);
        du[i] = ui * (1.0 - ui - alpha * wi);

        let wl = if i == 0 { wi } else { w[i - 1] };
        let wr = if i == last { wi } else { w[i + 1] };
        dw[i] = gamma * (vi - wi) + (wl - 2.0 * wi + wr) * inv_dx2;

        dv[i] = match dynamics {
            Dynamics::Qss => 0.0,
            Dynamics::Full => {
                // face fluxes with arithmetic-mean (1 - U); zero at the walls
                let right = if i == last {
                    0.0
                } else {
                    (1.0 - 0.5 * (ui + u[i + 1])) * (v[i + 1] - vi)
                };
                let left = if i == 0 {
                    0.0
                } else {
                    (1.0 - 0.5 * (u[i - 1] + ui)) * (vi - v[i - 1])
                };
                beta * vi * (1.0 - vi) + eps_coef * (right - left)
            }
        };
    }
}

/// Time derivative of the full model at `state`.
pub fn rhs_full(state: &FieldState, grid: &Grid1D, params: &ModelParams) -> Result<FieldDerivative> {
    rhs(state, grid, params, Dynamics::Full)
}

pub fn rhs(state: &FieldState, grid: &Grid1D, params: &ModelParams, dynamics: Dynamics) -> Result<FieldDerivative> {
    let n = state.len();
    let mut d = FieldDerivative {
        u: vec![0.0; n],
        v: vec![0.0; n],
        w: vec![0.0; n],
    };
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    rhs_into(
        params,
        dynamics,
        inv_dx2,
        (&state.u, &state.v, &state.w),
        (&mut d.u, &mut d.v, &mut d.w),
    );
    if d.u.iter().chain(&d.v).chain(&d.w).all(|x| x.is_finite()) {
        Ok(d)
    } else {
        Err(Error::NonFiniteState {
            time: state.t,
            last_good: None,
        })
    }
}

/// Largest diffusion coefficient present: 1 for `W`, `eps max(1 - U)` for `V`.
fn max_diffusivity(state: &FieldState, params: &ModelParams) -> f64 {
    let max_gap = state.u.iter().map(|u| 1.0 - u).fold(0.0, f64::max);
    (params.epsilon * max_gap).max(1.0)
}

/// Explicit stability bound `dx^2 / (2 D_max)` scaled by `safety`.
pub fn cfl_bound(grid: &Grid1D, state: &FieldState, params: &ModelParams, safety: f64) -> f64 {
    safety * grid.dx() * grid.dx() / (2.0 * max_diffusivity(state, params))
}

/// Reusable RK4 workspace.
pub struct Stepper {
    params: ModelParams,
    dynamics: Dynamics,
    inv_dx2: f64,
    k: [[Vec<f64>; 3]; 4],
    tmp: [Vec<f64>; 3],
}

impl Stepper {
    pub fn new(grid: &Grid1D, params: &ModelParams, dynamics: Dynamics) -> Self {
        let z = || vec![0.0; grid.n];
        Self {
            params: *params,
            dynamics,
            inv_dx2: 1.0 / (grid.dx() * grid.dx()),
            k: std::array::from_fn(|_| [z(), z(), z()]),
            tmp: [z(), z(), z()],
        }
    }

    /// One classical RK4 step of size `dt`, in place.
    pub fn step(&mut self, state: &mut FieldState, dt: f64) {
        let Self {
            params,
            dynamics,
            inv_dx2,
            k,
            tmp,
        } = self;
        let [t0, t1, t2] = tmp;
        let stage_weights = [0.0, 0.5, 0.5, 1.0];
        for stage in 0..4 {
            let (done, rest) = k.split_at_mut(stage);
            let [ku, kv, kw] = &mut rest[0];
            if stage == 0 {
                rhs_into(
                    params,
                    *dynamics,
                    *inv_dx2,
                    (&state.u, &state.v, &state.w),
                    (ku, kv, kw),
                );
            } else {
                let h = stage_weights[stage] * dt;
                let prev = &done[stage - 1];
                for i in 0..state.u.len() {
                    t0[i] = state.u[i] + h * prev[0][i];
                    t1[i] = state.v[i] + h * prev[1][i];
                    t2[i] = state.w[i] + h * prev[2][i];
                }
                rhs_into(params, *dynamics, *inv_dx2, (t0, t1, t2), (ku, kv, kw));
            }
        }
        let sixth = dt / 6.0;
        let fields = [&mut state.u, &mut state.v, &mut state.w];
        for (f, field) in fields.into_iter().enumerate() {
            for (i, x) in field.iter_mut().enumerate() {
                *x += sixth * (k[0][f][i] + 2.0 * k[1][f][i] + 2.0 * k[2][f][i] + k[3][f][i]);
                // Subnormal arithmetic is very slow; such values are zero for every purpose here.
                if x.abs() < f64::MIN_POSITIVE {
                    *x = 0.0;
                }
            }
        }
        state.t += dt;
    }
}

/// Single RK4 step of the full model.
pub fn step(state: &FieldState, grid: &Grid1D, params: &ModelParams, dt: f64) -> Result<FieldState> {
    let mut next = state.clone();
    Stepper::new(grid, params, Dynamics::Full).step(&mut next, dt);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::NonFiniteState {
            time: next.t,
            last_good: Some(Box::new(state.clone())),
        })
    }
}

fn integrate(
    grid: &Grid1D,
    params: &ModelParams,
    config: &SimConfig,
    dynamics: Dynamics,
    initial: FieldState,
) -> Result<SimSeries> {
    params.validate()?;
    config.validate()?;
    let interval = config.t_end / config.snapshots as f64;
    let dt_max = match config.dt {
        DtPolicy::Cfl { safety } => cfl_bound(grid, &initial, params, safety),
        DtPolicy::Fixed { dt } => {
            let bound = cfl_bound(grid, &initial, params, 1.0);
            if dt > bound {
                return Err(Error::CflViolation { dt, bound });
            }
            dt
        }
    };
    let substeps = (interval / dt_max).ceil().max(1.0) as usize;
    let dt = interval / substeps as f64;

    let mut stepper = Stepper::new(grid, params, dynamics);
    let mut state = initial;
    let mut snapshots = Vec::with_capacity(config.snapshots + 1);
    snapshots.push(state.clone());
    for k in 1..=config.snapshots {
        for _ in 0..substeps {
            stepper.step(&mut state, dt);
        }
        state.t = k as f64 * interval;
        if !state.is_finite() {
            return Err(Error::NonFiniteState {
                time: state.t,
                last_good: snapshots.pop().map(Box::new),
            });
        }
        snapshots.push(state.clone());
    }
    Ok(SimSeries {
        grid: *grid,
        params: *params,
        dynamics,
        dt,
        snapshots,
    })
}

/// Runs the full model from the configured ramp.
pub fn run(grid: &Grid1D, params: &ModelParams, config: &SimConfig) -> Result<SimSeries> {
    let initial = initial_step(grid, params, &config.initial)?;
    integrate(grid, params, config, Dynamics::Full, initial)
}

/// Runs the full model from caller-supplied data.
pub fn run_from(grid: &Grid1D, params: &ModelParams, config: &SimConfig, initial: FieldState) -> Result<SimSeries> {
    if initial.len() != grid.n {
        return Err(Error::DomainError(format!(
            "initial state has {} cells, grid has {}",
            initial.len(),
            grid.n
        )));
    }
    integrate(grid, params, config, Dynamics::Full, initial)
}

/// Quasi-steady-state reduced model with the front pinned at `x = 0`.
///
/// `V` holds `H(-x)` throughout; `U` and `W` start from the `Z-`/`Z+` step at the
/// origin. The initial-condition descriptor in `config` is not used.
pub fn run_qss_reduced(grid: &Grid1D, params: &ModelParams, config: &SimConfig) -> Result<SimSeries> {
    if !(grid.x0 < 0.0 && grid.x1 > 0.0) {
        return Err(Error::DomainError(
            "the reduced model needs the origin inside the domain".into(),
        ));
    }
    let h = heaviside_left(grid);
    let residual = params.residual_normal();
    let initial = FieldState {
        t: 0.0,
        u: h.iter().map(|&hv| hv * residual + (1.0 - hv)).collect(),
        w: h.clone(),
        v: h,
    };
    integrate(grid, params, config, Dynamics::Qss, initial)
}
