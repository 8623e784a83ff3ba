//! Parameter sweeps described by a JSON file:
//!
//! ```json
//! {
//!   "command": "simulate",
//!   "base": { "beta": 1, "gamma": 0.5, "t-end": 600, "ic": "step" },
//!   "grid": [ { "param": "alpha", "values": [0.5, 1.5, 15] } ]
//! }
//! ```
//!
//! `base` and `grid` keys are flag names of the command, without the leading
//! dashes. Points form the Cartesian product of the grid axes with the first
//! axis varying slowest; an empty grid, or an empty axis, has no points.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::commands::{
    fastwave_measurement, gap_measurement, run_simulation, slowwave_measurement, FastwaveArgs, GapArgs, Measurement,
    SimulateArgs, SlowwaveArgs,
};
use crate::manifest::RunRecorder;
use crate::CliError;

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// JSON sweep description.
    pub file: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
enum SweepCommand {
    Simulate,
    Fastwave,
    Slowwave,
    Gap,
}

#[derive(Debug, Deserialize, Serialize)]
struct Axis {
    param: String,
    values: Vec<Value>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    command: SweepCommand,
    #[serde(default)]
    base: Map<String, Value>,
    #[serde(default)]
    grid: Vec<Axis>,
}

#[derive(Parser)]
#[command(no_binary_name = true, allow_negative_numbers = true)]
struct PointParser<T: Args> {
    #[command(flatten)]
    args: T,
}

#[derive(Debug)]
enum Point {
    Simulate(SimulateArgs),
    Fastwave(FastwaveArgs),
    Slowwave(SlowwaveArgs),
    Gap(GapArgs),
}

fn to_flags(values: &Map<String, Value>) -> Result<Vec<String>, CliError> {
    let mut argv = Vec::new();
    for (key, value) in values {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => argv.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Number(n) => argv.extend([flag, n.to_string()]),
            Value::String(s) => argv.extend([flag, s.clone()]),
            other => {
                return Err(CliError::Usage(format!(
                    "sweep value for {key} must be a scalar, got {other}"
                )))
            }
        }
    }
    Ok(argv)
}

fn parse<T: Args>(argv: &[String]) -> Result<T, CliError> {
    PointParser::<T>::try_parse_from(argv)
        .map(|p| p.args)
        .map_err(|e| CliError::Usage(format!("sweep point {argv:?}: {}", e.kind())))
}

fn build_point(command: SweepCommand, values: &Map<String, Value>) -> Result<Point, CliError> {
    let argv = to_flags(values)?;
    Ok(match command {
        SweepCommand::Simulate => Point::Simulate(parse(&argv)?),
        SweepCommand::Fastwave => Point::Fastwave(parse(&argv)?),
        SweepCommand::Slowwave => Point::Slowwave(parse(&argv)?),
        SweepCommand::Gap => Point::Gap(parse(&argv)?),
    })
}

/// Grid coordinates of every point, first axis slowest.
fn grid_points(grid: &[Axis]) -> Vec<Vec<&Value>> {
    if grid.is_empty() {
        return Vec::new();
    }
    grid.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect()
    })
}

fn evaluate(point: &Point) -> Result<Measurement, CliError> {
    match point {
        Point::Simulate(a) => run_simulation(a).map(|s| s.measurement),
        Point::Fastwave(a) => fastwave_measurement(a),
        Point::Slowwave(a) => slowwave_measurement(a),
        Point::Gap(a) => gap_measurement(a),
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn value_cell(v: &Value) -> String {
    match v {
        Value::String(s) => quote(s),
        other => other.to_string(),
    }
}

pub fn sweep(args: &SweepArgs, out: &Path) -> Result<(), CliError> {
    if args.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let text = std::fs::read_to_string(&args.file).map_err(|e| CliError::io(&args.file, e))?;
    let plan: SweepFile =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", args.file.display())))?;

    let coords = grid_points(&plan.grid);
    let points = coords
        .iter()
        .map(|values| {
            let mut merged = plan.base.clone();
            for (axis, v) in plan.grid.iter().zip(values) {
                merged.insert(axis.param.clone(), (*v).clone());
            }
            build_point(plan.command, &merged)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", args.jobs)))?;
    let results: Vec<Result<Measurement, String>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| evaluate(p).map_err(|e| e.to_string()))
            .collect()
    });

    let mut body = String::new();
    let axes: Vec<&str> = plan.grid.iter().map(|a| a.param.as_str()).collect();
    let mut header = vec!["index"];
    header.extend(&axes);
    header.extend(["speed", "gap", "predicted_gap", "residual", "error"]);
    writeln!(body, "{}", header.join(",")).expect("writing to a String");
    let mut failed = 0;
    let mut worst_gap_error: Option<f64> = None;
    for (i, (values, result)) in coords.iter().zip(&results).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(values.iter().map(|v| value_cell(v)));
        match result {
            Ok(m) => {
                row.extend([
                    cell(m.speed),
                    cell(m.gap),
                    cell(m.predicted_gap),
                    cell(m.residual),
                    String::new(),
                ]);
                if let (Some(g), Some(p)) = (m.gap, m.predicted_gap) {
                    if p > 0.0 {
                        let e = (g / p - 1.0).abs();
                        worst_gap_error = Some(worst_gap_error.map_or(e, |w| w.max(e)));
                    }
                }
            }
            Err(e) => {
                failed += 1;
                row.extend([String::new(), String::new(), String::new(), String::new(), quote(e)]);
            }
        }
        writeln!(body, "{}", row.join(",")).expect("writing to a String");
    }

    let params = serde_json::json!({ "sweep": plan, "jobs": args.jobs });
    let mut rec = RunRecorder::new(out, "sweep", &params)?;
    rec.write_file("sweep.csv", |w| Ok(w.write_all(body.as_bytes())?))?;
    rec.measure("rows", results.len());
    rec.measure("failed_rows", failed);
    rec.measure("max_gap_rel_error", worst_gap_error);
    let path = rec.finish()?;
    println!("rows={} failed={failed}", results.len());
    if let Some(e) = worst_gap_error {
        println!("max_gap_rel_error={e:e}");
    }
    println!("manifest={}", path.display());
    if failed > 0 {
        return Err(CliError::FailedRows(failed));
    }
    Ok(())
}
