use serde::{Deserialize, Serialize};

use super::{FieldState, FieldTag, Grid1D, SimSeries};
use crate::error::{Error, Result};

/// Least-squares front speed over the second half of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub c_hat: f64,
    /// Fit window `(t_a, t_b)`.
    pub window: (f64, f64),
    /// Root-mean-square deviation of the positions from the fitted line.
    pub residual: f64,
    /// `(t, x_front)` for every snapshot in the window.
    pub positions: Vec<(f64, f64)>,
}

/// Longest stretch where both cell populations sit below `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapMeasurement {
    pub length: f64,
    pub interval: Option<(f64, f64)>,
    pub delta: f64,
}

fn interpolate_crossing(grid: &Grid1D, f: &[f64], i: usize, level: f64) -> f64 {
    let (a, b) = (f[i], f[i + 1]);
    let frac = if b == a { 0.5 } else { (level - a) / (b - a) };
    grid.x(i) + frac * grid.dx()
}

/// All linearly interpolated crossings of `level` in `f`.
pub(crate) fn crossings(grid: &Grid1D, f: &[f64], level: f64) -> Vec<f64> {
    f.windows(2)
        .enumerate()
        .filter(|(_, pair)| (pair[0] >= level) != (pair[1] >= level))
        .map(|(i, _)| interpolate_crossing(grid, f, i, level))
        .collect()
}

fn front_position(grid: &Grid1D, state: &FieldState, field: FieldTag, level: f64) -> Result<f64> {
    let xs = crossings(grid, state.field(field), level);
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

/// Slope and RMS residual of the least-squares line through `points`.
pub(crate) fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let (mt, mx) = points.iter().fold((0.0, 0.0), |(a, b), &(t, x)| (a + t / n, b + x / n));
    let (stt, stx) = points.iter().fold((0.0, 0.0), |(a, b), &(t, x)| {
        (a + (t - mt) * (t - mt), b + (t - mt) * (x - mx))
    });
    let slope = stx / stt;
    let intercept = mx - slope * mt;
    let rss: f64 = points.iter().map(|&(t, x)| (x - intercept - slope * t).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Front speed from the `level` crossing of `field`, fitted over the last half of the snapshots.
pub fn measure_speed(series: &SimSeries, field: FieldTag, level: f64) -> Result<SpeedEstimate> {
    let snaps = &series.snapshots;
    if snaps.len() < 10 {
        return Err(Error::TooFewSnapshots {
            needed: 10,
            got: snaps.len(),
        });
    }
    let grid = &series.grid;
    let guard = 5.0 * grid.dx();
    let window = &snaps[snaps.len() / 2..];
    let mut positions = Vec::with_capacity(window.len());
    for state in window {
        let x = front_position(grid, state, field, level)?;
        if x - grid.x0 < guard || grid.x1 - x < guard {
            return Err(Error::FrontLeftDomain {
                position: x,
                time: state.t,
            });
        }
        positions.push((state.t, x));
    }
    let (c_hat, _, residual) = linear_fit(&positions);
    Ok(SpeedEstimate {
        c_hat,
        window: (window[0].t, window[window.len() - 1].t),
        residual,
        positions,
    })
}

/// Crossing of `delta` between nodes `i` and `i + 1` by whichever of `U`, `V` crosses.
///
/// At a left end the gap starts after the later crossing, at a right end it stops
/// at the earlier one.
fn refine_end(grid: &Grid1D, state: &FieldState, i: usize, delta: f64, left_end: bool) -> f64 {
    let candidates = [&state.u, &state.v]
        .into_iter()
        .filter(|f| (f[i] < delta) != (f[i + 1] < delta))
        .map(|f| interpolate_crossing(grid, f, i, delta));
    if left_end {
        candidates.fold(grid.x(i), f64::max)
    } else {
        candidates.fold(grid.x(i + 1), f64::min)
    }
}

/// Longest maximal interval with `U < delta` and `V < delta`.
pub fn measure_gap(state: &FieldState, grid: &Grid1D, delta: f64) -> Result<GapMeasurement> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "gap threshold must lie in (0, 0.5)",
        });
    }
    let inside = |i: usize| state.u[i] < delta && state.v[i] < delta;
    let n = state.len();
    let mut best: Option<(f64, f64)> = None;
    let mut i = 0;
    while i < n {
        if !inside(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && inside(i + 1) {
            i += 1;
        }
        let end = i;
        let lo = if start == 0 {
            grid.x(0)
        } else {
            refine_end(grid, state, start - 1, delta, true)
        };
        let hi = if end + 1 == n {
            grid.x(n - 1)
        } else {
            refine_end(grid, state, end, delta, false)
        };
        if best.is_none_or(|(a, b)| hi - lo > b - a) {
            best = Some((lo, hi));
        }
        i += 1;
    }
    Ok(GapMeasurement {
        length: best.map_or(0.0, |(a, b)| (b - a).max(0.0)),
        interval: best,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, Scaling};
    use crate::pde::Dynamics;

    fn synthetic(speed: f64) -> SimSeries {
        let grid = Grid1D::new(0.0, 40.0, 400).unwrap();
        let params = ModelParams::new(1.0, 1.0, 1.0, 0.0, Scaling::Fast).unwrap();
        let snapshots = (0..20)
            .map(|k| {
                let t = k as f64;
                let front = 10.0 + speed * t;
                let v: Vec<f64> = (0..grid.n)
                    .map(|i| (0.5 - (grid.x(i) - front)).clamp(0.0, 1.0))
                    .collect();
                FieldState {
                    t,
                    u: vec![1.0; grid.n],
                    w: vec![0.0; grid.n],
                    v,
                }
            })
            .collect();
        SimSeries {
            grid,
            params,
            dynamics: Dynamics::Full,
            dt: 1.0,
            snapshots,
        }
    }

    #[test]
    fn exact_linear_front() {
        let est = measure_speed(&synthetic(0.5), FieldTag::V, 0.5).unwrap();
        assert!((est.c_hat - 0.5).abs() < 1e-12, "{}", est.c_hat);
        assert!(est.residual < 1e-12);
        assert_eq!(est.positions.len(), 10);
        assert_eq!(est.window, (10.0, 19.0));
    }

    #[test]
    fn speed_errors() {
        let mut s = synthetic(0.5);
        s.snapshots.truncate(9);
        assert!(matches!(
            measure_speed(&s, FieldTag::V, 0.5),
            Err(Error::TooFewSnapshots { .. })
        ));
        let s = synthetic(0.5);
        assert!(matches!(
            measure_speed(&s, FieldTag::U, 0.5),
            Err(Error::NoCrossing { .. })
        ));
        let mut s = synthetic(0.5);
        for snap in &mut s.snapshots {
            snap.v[390] = 1.0;
        }
        assert!(matches!(
            measure_speed(&s, FieldTag::V, 0.5),
            Err(Error::MultipleCrossings { count: 3, .. })
        ));
        let s = synthetic(1.57);
        assert!(matches!(
            measure_speed(&s, FieldTag::V, 0.5),
            Err(Error::FrontLeftDomain { .. })
        ));
    }

    #[test]
    fn no_gap_in_healthy_tissue() {
        let grid = Grid1D::new(0.0, 10.0, 100).unwrap();
        let state = FieldState::homogeneous(100, 1.0, 0.0, 0.0);
        let gap = measure_gap(&state, &grid, 0.05).unwrap();
        assert_eq!(gap.length, 0.0);
        assert!(gap.interval.is_none());
    }

    #[test]
    fn gap_endpoints_interpolated() {
        let grid = Grid1D::new(0.0, 10.0, 100).unwrap();
        let mut state = FieldState::homogeneous(100, 1.0, 0.0, 0.0);
        // V decays linearly to zero over [2, 3], U grows from zero over [6, 7]
        for i in 0..100 {
            let x = grid.x(i);
            state.v[i] = (3.0 - x).clamp(0.0, 1.0);
            state.u[i] = if x < 3.0 { 0.0 } else { (x - 6.0).clamp(0.0, 1.0) };
        }
        let gap = measure_gap(&state, &grid, 0.1).unwrap();
        let (a, b) = gap.interval.unwrap();
        assert!((a - 2.9).abs() < 1e-12, "{a}");
        assert!((b - 6.1).abs() < 1e-12, "{b}");
        assert!((gap.length - 3.2).abs() < 1e-12);
        assert!(measure_gap(&state, &grid, 0.6).is_err());
    }
}
