use std::io::Write;
use std::path::Path;

use clap::{Args, ValueEnum};
use ggwave_core::export::{write_fast_csv, write_field_csv, write_layer_csv, write_singular_csv};
use ggwave_core::fast_wave::construct_fast_wave;
use ggwave_core::model::{eigen_on_manifold, ManifoldBranch, ModelParams, Scaling};
use ggwave_core::pde::{
    measure_gap, measure_speed, run, run_qss_reduced, DtPolicy, FieldTag, Grid1D, InitialCondition, RampKind,
    SimConfig, SimSeries,
};
use ggwave_core::slow_wave::{
    assemble_singular, bisect_min_speed, c_min, classify_regime, predicted_gap, solve_layer, z_minus, z_plus,
    AlphaRegime, LayerOptions,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::manifest::RunRecorder;
use crate::CliError;

/// Quantities collected per sweep row.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Measurement {
    pub speed: Option<f64>,
    pub gap: Option<f64>,
    pub predicted_gap: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ramp {
    Tanh,
    Step,
}

impl From<Ramp> for RampKind {
    fn from(r: Ramp) -> Self {
        match r {
            Ramp::Tanh => RampKind::Tanh,
            Ramp::Step => RampKind::Step,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 4e-5)]
    pub epsilon: f64,
    /// Domain length L: [0, L] for the full model, [-L/3, 2L/3] for the reduced one.
    #[arg(long, default_value_t = 60.0)]
    pub domain: f64,
    /// Number of cells.
    #[arg(long, default_value_t = 1200)]
    pub n: usize,
    #[arg(long, default_value_t = 25.0)]
    pub t_end: f64,
    /// Snapshots after the initial one.
    #[arg(long, default_value_t = 40)]
    pub snapshots: usize,
    /// Reduced model with the tumor frozen to a step at x = 0.
    #[arg(long)]
    pub qss: bool,
    #[arg(long, value_enum, default_value_t = Ramp::Tanh)]
    pub ic: Ramp,
    /// Ramp position; a third of the way into the domain by default.
    #[arg(long)]
    pub ic_position: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub ic_width: f64,
    /// CFL safety factor.
    #[arg(long, default_value_t = SimConfig::DEFAULT_SAFETY)]
    pub safety: f64,
    /// Level of V tracked for the front speed.
    #[arg(long, default_value_t = SimConfig::DEFAULT_SPEED_LEVEL)]
    pub speed_level: f64,
    /// Threshold below which U and V count as absent.
    #[arg(long, default_value_t = SimConfig::DEFAULT_GAP_DELTA)]
    pub gap_delta: f64,
}

pub struct Simulation {
    pub grid: Grid1D,
    pub series: SimSeries,
    pub measurement: Measurement,
    pub speed_error: Option<String>,
}

pub fn run_simulation(args: &SimulateArgs) -> Result<Simulation, CliError> {
    let (x0, x1) = if args.qss {
        (-args.domain / 3.0, 2.0 * args.domain / 3.0)
    } else {
        (0.0, args.domain)
    };
    let grid = Grid1D::new(x0, x1, args.n)?;
    // The PDE does not depend on the traveling-wave scaling.
    let params = ModelParams::new(args.alpha, args.beta, args.gamma, args.epsilon, Scaling::Fast)?;
    let mut config = SimConfig::new(&grid, args.t_end, args.snapshots);
    config.dt = DtPolicy::Cfl { safety: args.safety };
    config.speed_level = args.speed_level;
    config.gap_delta = args.gap_delta;
    config.initial = InitialCondition {
        kind: args.ic.into(),
        position: args.ic_position.unwrap_or(x0 + (x1 - x0) / 3.0),
        width: args.ic_width,
    };
    let series = if args.qss {
        run_qss_reduced(&grid, &params, &config)?
    } else {
        run(&grid, &params, &config)?
    };
    let (speed, speed_error) = if args.qss {
        (None, None)
    } else {
        match measure_speed(&series, FieldTag::V, args.speed_level) {
            Ok(est) => (Some(est.c_hat), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    let gap = measure_gap(series.last(), &grid, args.gap_delta)?;
    Ok(Simulation {
        grid,
        measurement: Measurement {
            speed,
            gap: Some(gap.length),
            predicted_gap: Some(predicted_gap(&params)),
            residual: None,
        },
        series,
        speed_error,
    })
}

pub fn simulate(args: &SimulateArgs, out: &Path) -> Result<(), CliError> {
    let mut rec = RunRecorder::new(out, "simulate", args)?;
    let sim = run_simulation(args)?;
    for (k, snap) in sim.series.snapshots.iter().enumerate() {
        rec.write_file(&format!("snapshot_{k:04}.csv"), |w| write_field_csv(w, &sim.grid, snap))?;
    }
    let m = sim.measurement;
    rec.measure("speed", m.speed);
    rec.measure("gap", m.gap);
    rec.measure("predicted_gap", m.predicted_gap);
    rec.measure("dt", sim.series.dt);
    rec.measure("dx", sim.grid.dx());
    if let Some(e) = &sim.speed_error {
        rec.warn(format!("no speed measured: {e}"));
    }
    let path = rec.finish()?;
    match m.speed {
        Some(c) => println!("speed={c}"),
        None => println!("speed=none"),
    }
    println!("gap={}", m.gap.unwrap_or(f64::NAN));
    println!("manifest={}", path.display());
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct FastwaveArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Wave speed.
    #[arg(long)]
    pub c: f64,
    /// Node spacing in z.
    #[arg(long, default_value_t = 1e-2)]
    pub h: f64,
    /// Half-length of the z window; chosen from the decay rates by default.
    #[arg(long)]
    pub half_length: Option<f64>,
}

pub fn fastwave_measurement(args: &FastwaveArgs) -> Result<Measurement, CliError> {
    let params = ModelParams::new(args.alpha, args.beta, args.gamma, 0.0, Scaling::Fast)?;
    let profile = construct_fast_wave(&params, args.c, args.half_length, args.h)?;
    Ok(Measurement {
        speed: Some(args.c),
        residual: Some(profile.residuals().max()),
        ..Measurement::default()
    })
}

pub fn fastwave(args: &FastwaveArgs, out: &Path) -> Result<(), CliError> {
    let mut rec = RunRecorder::new(out, "fastwave", args)?;
    let params = ModelParams::new(args.alpha, args.beta, args.gamma, 0.0, Scaling::Fast)?;
    let profile = construct_fast_wave(&params, args.c, args.half_length, args.h)?;
    rec.write_file("fast_wave.csv", |w| write_fast_csv(w, &profile))?;
    let res = profile.residuals();
    rec.measure("residuals", res);
    rec.measure("rho_plus", profile.rho_plus);
    rec.measure("rho_minus", profile.rho_minus);
    rec.measure("half_length", profile.grid.half_length);
    let path = rec.finish()?;
    println!("residual={:e}", res.max());
    println!("manifest={}", path.display());
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct SlowwaveArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// Used only to convert the slow speed to a true speed c sqrt(eps).
    #[arg(long, default_value_t = 4e-5)]
    pub epsilon: f64,
    /// Speed in slow units.
    #[arg(long)]
    pub c: f64,
    #[arg(long, default_value_t = -10.0)]
    pub z_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub z_max: f64,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
}

fn slow_params(args: &SlowwaveArgs) -> Result<ModelParams, CliError> {
    Ok(ModelParams::new(
        args.alpha,
        args.beta,
        args.gamma,
        args.epsilon,
        Scaling::Slow,
    )?)
}

pub fn slowwave_measurement(args: &SlowwaveArgs) -> Result<Measurement, CliError> {
    let params = slow_params(args)?;
    let profile = assemble_singular(&params, args.c, &LayerOptions::default())?;
    let gap = predicted_gap(&params);
    Ok(Measurement {
        speed: Some(args.c * args.epsilon.sqrt()),
        gap: Some(gap),
        predicted_gap: Some(gap),
        residual: Some(profile.matching().max()),
    })
}

fn linspace(lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>, CliError> {
    if samples < 2 || !(hi > lo) {
        return Err(CliError::Usage(format!(
            "need at least two samples on a nonempty range, got {samples} on [{lo}, {hi}]"
        )));
    }
    let step = (hi - lo) / (samples - 1) as f64;
    Ok((0..samples).map(|i| lo + i as f64 * step).collect())
}

pub fn slowwave(args: &SlowwaveArgs, out: &Path) -> Result<(), CliError> {
    let mut rec = RunRecorder::new(out, "slowwave", args)?;
    let params = slow_params(args)?;
    let profile = assemble_singular(&params, args.c, &LayerOptions::default())?;
    let zs = linspace(args.z_min, args.z_max, args.samples)?;
    rec.write_file("slow_profile.csv", |w| write_singular_csv(w, &profile.sample(&zs)))?;
    rec.write_file("layer.csv", |w| write_layer_csv(w, &profile.layer))?;
    let matching = profile.matching();
    rec.measure("regime", profile.regime.name());
    rec.measure("z_minus", profile.z_minus);
    rec.measure("z_plus", profile.z_plus);
    rec.measure("predicted_gap", predicted_gap(&params));
    rec.measure("c_min", profile.c_min);
    rec.measure("true_speed", args.c * args.epsilon.sqrt());
    rec.measure("layer_monotone", profile.layer.monotone_nonneg);
    rec.measure("matching", matching);
    for w in &profile.warnings {
        rec.warn(w.clone());
    }
    let path = rec.finish()?;
    println!("regime={}", profile.regime.name());
    println!("matching_defect={:e}", matching.max());
    for w in &profile.warnings {
        eprintln!("warning: {w}");
    }
    println!("manifest={}", path.display());
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct LayerArgs {
    /// Diffusion coefficient.
    #[arg(long = "D")]
    pub diffusion: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub c: f64,
    /// Also locate the smallest monotone speed by bisection.
    #[arg(long)]
    pub bisect: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
}

pub fn layer(args: &LayerArgs, out: &Path) -> Result<(), CliError> {
    let mut rec = RunRecorder::new(out, "layer", args)?;
    let opts = LayerOptions::default();
    let layer = solve_layer(args.diffusion, args.beta, args.c, &opts)?;
    rec.write_file("layer.csv", |w| write_layer_csv(w, &layer))?;
    rec.measure("monotone", layer.monotone_nonneg);
    rec.measure("min_v", layer.min_v);
    rec.measure("tail_rate", layer.tail_rate);
    rec.measure("c_min", c_min(args.diffusion, args.beta));
    println!("monotone={}", layer.monotone_nonneg);
    println!("min_v={:e}", layer.min_v);
    if let Some(rate) = layer.tail_rate {
        println!("tail_rate={rate}");
    }
    if args.bisect {
        let c = bisect_min_speed(args.diffusion, args.beta, args.rel_tol, &opts)?;
        rec.measure("c_min_bisection", c);
        println!("c_min_bisection={c}");
    }
    println!("c_min={}", c_min(args.diffusion, args.beta));
    let path = rec.finish()?;
    println!("manifest={}", path.display());
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct EigenArgs {
    /// Critical-manifold branch, S1 to S4.
    #[arg(long)]
    pub branch: ManifoldBranch,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub c: f64,
    /// A single value of w; overrides the range.
    #[arg(long, conflicts_with_all = ["w_min", "w_max"])]
    pub w: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub w_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub w_max: f64,
    #[arg(long, default_value_t = 11)]
    pub samples: usize,
}

/// Shortest round-trip form, with signed zeros printed as `0`.
fn fmt_complex(z: Complex64) -> String {
    let (re, im) = (z.re + 0.0, z.im + 0.0);
    if im == 0.0 {
        format!("{re}")
    } else {
        format!("{re}{im:+}i")
    }
}

pub fn eigen(args: &EigenArgs, out: &Path) -> Result<(), CliError> {
    let mut rec = RunRecorder::new(out, "eigen", args)?;
    // gamma and epsilon do not enter the layer Jacobian
    let params = ModelParams::new(args.alpha, args.beta, 1.0, 0.0, Scaling::Slow)?;
    let ws = match args.w {
        Some(w) => vec![w],
        None => linspace(args.w_min, args.w_max, args.samples)?,
    };
    let rows = ws
        .iter()
        .map(|&w| eigen_on_manifold(args.branch, w, &params, args.c).map(|e| (w, e.lambdas)))
        .collect::<Result<Vec<_>, _>>()?;
    rec.write_file("eigen.csv", |out| {
        writeln!(
            out,
            "w,lambda1_re,lambda1_im,lambda2_re,lambda2_im,lambda3_re,lambda3_im"
        )?;
        for (w, l) in &rows {
            writeln!(
                out,
                "{w:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                l[0].re, l[0].im, l[1].re, l[1].im, l[2].re, l[2].im
            )?;
        }
        Ok(())
    })?;
    for (w, l) in &rows {
        println!(
            "branch={} w={w} lambda1={} lambda2={} lambda3={}",
            args.branch,
            fmt_complex(l[0]),
            fmt_complex(l[1]),
            fmt_complex(l[2])
        );
    }
    let path = rec.finish()?;
    println!("manifest={}", path.display());
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct GapArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub gamma: f64,
}

pub fn gap_measurement(args: &GapArgs) -> Result<Measurement, CliError> {
    let params = ModelParams::new(args.alpha, 1.0, args.gamma, 0.0, Scaling::Slow)?;
    let gap = predicted_gap(&params);
    Ok(Measurement {
        gap: Some(gap),
        predicted_gap: Some(gap),
        ..Measurement::default()
    })
}

pub fn gap(args: &GapArgs) -> Result<(), CliError> {
    let params = ModelParams::new(args.alpha, 1.0, args.gamma, 0.0, Scaling::Slow)?;
    let regime = classify_regime(args.alpha)?;
    println!("predicted_gap={}", predicted_gap(&params));
    println!("regime={}", regime.name());
    match regime {
        AlphaRegime::Mid => match z_minus(args.alpha, args.gamma) {
            Ok(z) => println!("z_minus={z}"),
            Err(e) => println!("z_minus=none ({e})"),
        },
        AlphaRegime::High => println!("z_plus={}", z_plus(args.alpha, args.gamma)?),
        _ => {}
    }
    Ok(())
}
