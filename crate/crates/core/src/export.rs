//! CSV tables for plotting. Numbers use the shortest exponent form that round-trips.

use std::io::Write;

use crate::error::Result;
use crate::fast_wave::FastWaveProfile;
use crate::pde::{FieldState, Grid1D};
use crate::slow_wave::{LayerProfile, SlowPoint};

fn write_rows<W: Write>(out: &mut W, header: &str, rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    writeln!(out, "{header}")?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// `x,U,V,W`
pub fn write_field_csv<W: Write>(out: &mut W, grid: &Grid1D, state: &FieldState) -> Result<()> {
    write_rows(
        out,
        "x,U,V,W",
        (0..state.len()).map(|i| vec![grid.x(i), state.u[i], state.v[i], state.w[i]]),
    )
}

/// `z,u0,v0,w0,phi0`
pub fn write_fast_csv<W: Write>(out: &mut W, profile: &FastWaveProfile) -> Result<()> {
    write_rows(
        out,
        "z,u0,v0,w0,phi0",
        (0..profile.z.len()).map(|i| {
            vec![
                profile.z[i],
                profile.u0[i],
                profile.v0[i],
                profile.w0[i],
                profile.phi0[i],
            ]
        }),
    )
}

/// `z,u,v,w,s,branch`
pub fn write_singular_csv<W: Write>(out: &mut W, points: &[SlowPoint]) -> Result<()> {
    writeln!(out, "z,u,v,w,s,branch")?;
    for p in points {
        writeln!(out, "{:e},{:e},{:e},{:e},{:e},{}", p.z, p.u, p.v, p.w, p.s, p.branch)?;
    }
    Ok(())
}

/// `y,v,r`
pub fn write_layer_csv<W: Write>(out: &mut W, layer: &LayerProfile) -> Result<()> {
    write_rows(
        out,
        "y,v,r",
        (0..layer.y.len()).map(|i| vec![layer.y[i], layer.v[i], layer.r[i]]),
    )
}
