//! Distances between simulation snapshots and asymptotic profiles, after
//! shifting the snapshot so that its tumor front sits at `z = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fast_wave::FastWaveProfile;
use crate::pde::{FieldState, FieldTag, Grid1D};
use crate::slow_wave::SlowSingularProfile;

/// Position of the unique crossing of `level` by `field`.
pub fn level_crossing(grid: &Grid1D, state: &FieldState, field: FieldTag, level: f64) -> Result<f64> {
    let f = state.field(field);
    let xs: Vec<f64> = (0..f.len() - 1)
        .filter(|&i| (f[i] >= level) != (f[i + 1] >= level))
        .map(|i| grid.x(i) + (level - f[i]) / (f[i + 1] - f[i]) * grid.dx())
        .collect();
    match xs.as_slice() {
        [] => Err(Error::NoCrossing { level, time: state.t }),
        [x] => Ok(*x),
        _ => Err(Error::MultipleCrossings {
            level,
            count: xs.len(),
            time: state.t,
        }),
    }
}

/// Per-field sup-norm distances and where the largest one occurred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileDistance {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    /// Recentered coordinate of the worst point.
    pub worst_z: f64,
    /// Grid position of the tumor front used for recentering.
    pub front: f64,
    pub compared: usize,
}

impl ProfileDistance {
    pub fn max(&self) -> f64 {
        self.u.max(self.v).max(self.w)
    }
}

fn accumulate(
    grid: &Grid1D,
    state: &FieldState,
    front: f64,
    include: impl Fn(f64) -> bool,
    reference: impl Fn(f64) -> (f64, f64, f64),
) -> ProfileDistance {
    let mut d = ProfileDistance {
        u: 0.0,
        v: 0.0,
        w: 0.0,
        worst_z: f64::NAN,
        front,
        compared: 0,
    };
    let mut worst = -1.0;
    for i in 0..state.len() {
        let z = grid.x(i) - front;
        if !include(z) {
            continue;
        }
        let (u, v, w) = reference(z);
        let (du, dv, dw) = ((state.u[i] - u).abs(), (state.v[i] - v).abs(), (state.w[i] - w).abs());
        d.u = d.u.max(du);
        d.v = d.v.max(dv);
        d.w = d.w.max(dw);
        d.compared += 1;
        let local = du.max(dv).max(dw);
        if local > worst {
            worst = local;
            d.worst_z = z;
        }
    }
    d
}

/// Distance to a fast-wave profile, over the part of the snapshot covered by the profile grid.
pub fn fast_profile_distance(grid: &Grid1D, state: &FieldState, profile: &FastWaveProfile) -> Result<ProfileDistance> {
    let front = level_crossing(grid, state, FieldTag::V, 0.5)?;
    let half = profile.grid.half_length;
    Ok(accumulate(grid, state, front, |z| z.abs() <= half, |z| profile.eval(z)))
}

/// Distance to a singular slow profile, skipping `exclusion`-neighborhoods of the
/// layer and of the switch point.
pub fn slow_profile_distance(
    grid: &Grid1D,
    state: &FieldState,
    profile: &SlowSingularProfile,
    exclusion: f64,
) -> Result<ProfileDistance> {
    let front = level_crossing(grid, state, FieldTag::V, 0.5)?;
    let breaks = profile.breakpoints();
    Ok(accumulate(
        grid,
        state,
        front,
        |z| breaks.iter().all(|b| (z - b).abs() > exclusion),
        |z| {
            let p = profile.eval(z);
            (p.u, p.v, p.w)
        },
    ))
}
