//! Optional JSON configuration file: every field mirrors a command-line
//! flag and fills in only when the flag is absent.

use std::path::{Path, PathBuf};

use helixlab::{HelixError, Result};
use serde::Deserialize;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub grid: Option<usize>,
    pub resolution: Option<usize>,
    pub dimension: Option<usize>,
    pub smoothing: Option<f64>,
    pub edge_trim: Option<f64>,
    pub defect_threshold: Option<f64>,
    pub eps_curvature: Option<f64>,
    pub eps_unit_speed: Option<f64>,
    pub family: Option<String>,
    pub n: Option<usize>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub c0: Option<f64>,
    pub kappa: Option<Vec<String>>,
    pub deltas: Option<Vec<f64>>,
    pub interval: Option<[f64; 2]>,
    pub length: Option<f64>,
    pub omega: Option<f64>,
    pub mu: Option<f64>,
    pub seed: Option<u64>,
    pub smoothness: Option<f64>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| HelixError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| HelixError::Parse(format!("{}: {e}", path.display())))
}

/// Fully resolved settings for the curve-ingestion pipeline.
#[derive(Debug, Clone)]
pub struct PipelineSettings {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub grid: usize,
    pub resolution: usize,
    pub dimension: Option<usize>,
    pub smoothing: Option<f64>,
    pub edge_trim: f64,
}

pub const DEFAULT_GRID: usize = 512;
pub const DEFAULT_RESOLUTION: usize = 2048;
pub const DEFAULT_EDGE_TRIM: f64 = 0.02;

pub fn resolve_pipeline(args: &crate::PipelineArgs, file: &FileConfig) -> Result<PipelineSettings> {
    let grid = args.grid.or(file.grid).unwrap_or(DEFAULT_GRID);
    if grid < helixlab::tol::MIN_FRAME_GRID {
        return Err(HelixError::InvalidArgument(format!(
            "grid size {grid} is below the minimum {}",
            helixlab::tol::MIN_FRAME_GRID
        )));
    }
    let resolution = args
        .resolution
        .or(file.resolution)
        .unwrap_or(DEFAULT_RESOLUTION);
    if resolution < helixlab::tol::MIN_RESOLUTION {
        return Err(HelixError::InvalidArgument(format!(
            "resolution {resolution} is below the minimum {}",
            helixlab::tol::MIN_RESOLUTION
        )));
    }
    let smoothing = args.smoothing.or(file.smoothing);
    if let Some(lambda) = smoothing {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(HelixError::InvalidArgument(format!(
                "smoothing weight must be a finite non-negative number, got {lambda}"
            )));
        }
    }
    let dimension = args.dimension.or(file.dimension);
    if let Some(dim) = dimension {
        if dim < 2 {
            return Err(HelixError::InvalidArgument(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
    }
    let edge_trim = args
        .edge_trim
        .or(file.edge_trim)
        .unwrap_or(DEFAULT_EDGE_TRIM);
    if !(edge_trim >= 0.0) || !(edge_trim < 0.5) {
        return Err(HelixError::InvalidArgument(format!(
            "edge-trim must lie in [0, 0.5), got {edge_trim}"
        )));
    }
    Ok(PipelineSettings {
        input: args.input.clone(),
        output: args.output.clone(),
        grid,
        resolution,
        dimension,
        smoothing,
        edge_trim,
    })
}

/// Fully resolved thresholds for the analyze subcommand.
#[derive(Debug, Clone, Copy)]
pub struct AnalyzeSettings {
    pub defect_threshold: f64,
    pub eps_curvature: f64,
    pub eps_unit_speed: f64,
}

pub fn resolve_analyze(args: &crate::AnalyzeArgs, file: &FileConfig) -> Result<AnalyzeSettings> {
    let defect_threshold = args
        .defect_threshold
        .or(file.defect_threshold)
        .unwrap_or(helixlab::tol::DEFECT_THRESHOLD);
    let eps_curvature = args
        .eps_curvature
        .or(file.eps_curvature)
        .unwrap_or(helixlab::tol::EPS_CURVATURE);
    let eps_unit_speed = args
        .eps_unit_speed
        .or(file.eps_unit_speed)
        .unwrap_or(helixlab::tol::EPS_UNIT_SPEED);
    for (name, value) in [
        ("defect-threshold", defect_threshold),
        ("eps-curvature", eps_curvature),
        ("eps-unit-speed", eps_unit_speed),
    ] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(HelixError::InvalidArgument(format!(
                "{name} must be a finite positive number, got {value}"
            )));
        }
    }
    Ok(AnalyzeSettings {
        defect_threshold,
        eps_curvature,
        eps_unit_speed,
    })
}
