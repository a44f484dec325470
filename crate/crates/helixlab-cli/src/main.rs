//! Command-line front end: ingest curves, run the analysis pipeline, and
//! emit machine-readable reports and plot-ready diagnostics.

// Comparisons are deliberately spelled `!(a > b)` so NaN falls into the
// rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "helixlab",
    version,
    about = "Frenet frames and constant-angle analysis for curves in n-space"
)]
pub struct Cli {
    /// JSON file supplying defaults for any flag; command-line values win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Test a curve for the constant-angle property and write a report.
    ///
    /// With a directory as input, analyzes every .csv/.json curve in it in
    /// parallel (capped by HELIXLAB_THREADS), writing one report per curve.
    Analyze(AnalyzeArgs),
    /// Generate a curve from a named family, with a ground-truth sidecar.
    Synthesize(SynthesizeArgs),
    /// Export frames and curvatures over the arc-length grid as CSV.
    Frenet(PipelineArgs),
    /// Run only the independent nullspace search for a fixed direction.
    OracleAxis(PipelineArgs),
    /// Evaluate the verification identities on a curve.
    Verify(PipelineArgs),
}

/// Flags shared by every subcommand that ingests a curve.
#[derive(Args, Clone)]
pub struct PipelineArgs {
    /// Input curve: sampled CSV or analytic JSON.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Arc-length grid size (minimum 32).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Arc-length table resolution used during reparameterization.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Expected curve dimension; a mismatching input is rejected.
    #[arg(long)]
    pub dimension: Option<usize>,
    /// Spline smoothing weight for sampled input; chosen by cross-validation
    /// when omitted.
    #[arg(long)]
    pub smoothing: Option<f64>,
    /// Fraction of arc length cut from each end of a fitted point cloud
    /// before analysis, where the fit's high-order derivatives are least
    /// reliable (sampled input only; default 0.02, 0 disables).
    #[arg(long)]
    pub edge_trim: Option<f64>,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Write per-point diagnostics CSV here (a directory in batch mode).
    #[arg(long, value_name = "PATH")]
    pub diagnostics: Option<PathBuf>,
    /// Constancy-defect threshold for the verdict.
    #[arg(long)]
    pub defect_threshold: Option<f64>,
    /// Pointwise lower bound enforced on the intermediate curvatures.
    #[arg(long)]
    pub eps_curvature: Option<f64>,
    /// Largest tolerated unit-speed defect after reparameterization.
    #[arg(long)]
    pub eps_unit_speed: Option<f64>,
}

#[derive(Args)]
pub struct SynthesizeArgs {
    /// Curve family to generate.
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Ambient dimension.
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Squared-secant constant (slant family; must exceed 1).
    #[arg(long = "C")]
    pub c: Option<f64>,
    /// Integration constant (slant family).
    #[arg(long)]
    pub c0: Option<f64>,
    /// Curvature expression kappa_i (slant family; repeat the flag n-2
    /// times, defaults to constant 1).
    #[arg(long = "kappa", value_name = "EXPR")]
    pub kappa: Vec<String>,
    /// Constant curvatures for the w_curve family, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "D1,D2,...")]
    pub deltas: Option<Vec<f64>>,
    /// Parameter interval as "a,b".
    #[arg(long, value_parser = parse_interval, value_name = "A,B")]
    pub interval: Option<(f64, f64)>,
    /// Arc length for the w_curve and random families.
    #[arg(long)]
    pub length: Option<f64>,
    /// Curvature amplitude (constant-precession family).
    #[arg(long)]
    pub omega: Option<f64>,
    /// Rotation rate (constant-precession family).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Seed for the random family.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Amplitude scale of the random curvature profiles.
    #[arg(long)]
    pub smoothness: Option<f64>,
    /// Grid size of the generated curve.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Curve CSV destination.
    #[arg(long, value_name = "PATH")]
    pub output_curve: Option<PathBuf>,
    /// Ground-truth JSON destination.
    #[arg(long, value_name = "PATH")]
    pub output_truth: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    #[value(name = "w_curve")]
    WCurve,
    #[value(name = "constant_precession")]
    ConstantPrecession,
    #[value(name = "slant")]
    Slant,
    #[value(name = "random")]
    Random,
}

fn parse_interval(raw: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected \"a,b\", got `{raw}`"));
    }
    let a: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse `{}` as a number", parts[0]))?;
    let b: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse `{}` as a number", parts[1]))?;
    Ok((a, b))
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(commands::run(cli));
}
