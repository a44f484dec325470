//! Subcommand implementations: curve ingestion, the analysis pipeline,
//! synthesis, and the report writers.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use helixlab::curve::UnitSpeedCurve;
use helixlab::frenet::FrenetApparatus;
use helixlab::io::{self, DiagnosticsTable};
use helixlab::slant::{self, DetectionReport};
use helixlab::spline::SplineFitConfig;
use helixlab::synthesis::{self, SynthesisRecord};
use helixlab::{Expr, HelixError, Result};

use crate::config::{self, AnalyzeSettings, FileConfig, PipelineSettings};
use crate::{AnalyzeArgs, Cli, Command, FamilyArg, PipelineArgs, SynthesizeArgs};

/// Runs the parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let file = config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Analyze(args) => cmd_analyze(&args, &file),
        Command::Synthesize(args) => cmd_synthesize(&args, &file).map(|()| 0),
        Command::Frenet(args) => cmd_frenet(&args, &file).map(|()| 0),
        Command::OracleAxis(args) => cmd_oracle_axis(&args, &file).map(|()| 0),
        Command::Verify(args) => cmd_verify(&args, &file).map(|()| 0),
    }
}

// ---------------------------------------------------------------------------
// Curve ingestion
// ---------------------------------------------------------------------------

fn require_input(settings: &PipelineSettings) -> Result<&Path> {
    settings
        .input
        .as_deref()
        .ok_or_else(|| HelixError::InvalidArgument("--input is required".into()))
}

fn check_dimension(actual: usize, expected: Option<usize>, path: &Path) -> Result<()> {
    if let Some(expected) = expected {
        if actual != expected {
            return Err(HelixError::InvalidArgument(format!(
                "{}: curve has dimension {actual}, but --dimension {expected} was requested",
                path.display()
            )));
        }
    }
    Ok(())
}

/// Reads a curve file and produces its unit-speed reparameterization.
///
/// `.json` inputs are analytic (exact derivatives through the expression
/// trees); `.csv` inputs are point clouds fitted with a smoothing spline of
/// degree `dimension + 1` before reparameterization.
fn load_unit_speed(path: &Path, settings: &PipelineSettings) -> Result<UnitSpeedCurve<f64>> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match ext.as_str() {
        "json" => {
            let analytic = io::read_analytic_json(path)?;
            check_dimension(analytic.dimension(), settings.dimension, path)?;
            analytic.arc_length_reparameterize(settings.resolution)
        }
        "csv" => {
            let sampled = io::read_curve_csv(path)?;
            check_dimension(sampled.dimension(), settings.dimension, path)?;
            let mut fit = SplineFitConfig::for_degree(sampled.dimension() + 1);
            fit.lambda = settings.smoothing;
            let unit = sampled.arc_length_reparameterize_with(settings.resolution, &fit)?;
            if settings.edge_trim > 0.0 {
                let length = unit.length();
                unit.restrict(
                    settings.edge_trim * length,
                    (1.0 - settings.edge_trim) * length,
                    settings.resolution,
                )
            } else {
                Ok(unit)
            }
        }
        other => Err(HelixError::Parse(format!(
            "{}: unsupported input extension `{other}` (expected .csv or .json)",
            path.display()
        ))),
    }
}

fn load_apparatus(
    path: &Path,
    settings: &PipelineSettings,
) -> Result<(UnitSpeedCurve<f64>, FrenetApparatus<f64>)> {
    let unit = load_unit_speed(path, settings)?;
    let app = FrenetApparatus::compute(&unit, settings.grid)?;
    Ok((unit, app))
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn enforce_unit_speed(unit: &UnitSpeedCurve<f64>, probes: usize, eps: f64) -> Result<()> {
    let defect = unit.unit_speed_defect(probes);
    if !(defect <= eps) {
        return Err(HelixError::UnitSpeedDefect {
            defect,
            tolerance: eps,
        });
    }
    Ok(())
}

fn enforce_intermediate_curvatures(app: &FrenetApparatus<f64>, eps: f64) -> Result<()> {
    let n = app.dimension();
    for i in 1..n.saturating_sub(1) {
        let kappa = app.curvature(i);
        for (j, &value) in kappa.iter().enumerate() {
            if !(value.abs() > eps) {
                return Err(HelixError::CurvatureVanishes {
                    index: i,
                    s: app.grid()[j],
                    value,
                });
            }
        }
    }
    Ok(())
}

struct AnalysisOutcome {
    report: DetectionReport<f64>,
    app: FrenetApparatus<f64>,
}

fn analyze_file(
    path: &Path,
    settings: &PipelineSettings,
    thresholds: &AnalyzeSettings,
) -> Result<AnalysisOutcome> {
    let (unit, app) = load_apparatus(path, settings)?;
    enforce_unit_speed(&unit, settings.grid, thresholds.eps_unit_speed)?;
    enforce_intermediate_curvatures(&app, thresholds.eps_curvature)?;
    let report = slant::detect_slant_helix(&app, Some(thresholds.defect_threshold))?;
    Ok(AnalysisOutcome { report, app })
}

fn build_diagnostics(
    app: &FrenetApparatus<f64>,
    report: &DetectionReport<f64>,
) -> Result<DiagnosticsTable> {
    let n = app.dimension();
    let g = slant::compute_g_basis(app)?.with_constant(report.c0);
    let sum_g2 = g.sum_squares()?;
    let angle_to_axis = report.axis.as_ref().map(|u| {
        (0..app.len())
            .map(|j| app.frame_vector(j, 2).dot(u).clamp(-1.0, 1.0).acos())
            .collect()
    });
    let sigma = if n == 3 {
        Some(slant::sigma_profile(
            app.grid(),
            app.curvature(1),
            app.curvature(2),
        )?)
    } else {
        None
    };
    let gn = g.profile(n)?;
    let gn1 = g.profile(n - 1)?;
    let k_last = app.curvature(n - 1);
    let d_gn = helixlab::grid::derivative(&gn, g.step())?;
    let gn_residual = (0..app.len())
        .map(|j| (d_gn[j] + k_last[j] * gn1[j]).abs())
        .collect();
    Ok(DiagnosticsTable {
        s: app.grid().to_vec(),
        sum_g2,
        angle_to_axis,
        sigma,
        gn_residual,
    })
}

fn cmd_analyze(args: &AnalyzeArgs, file: &FileConfig) -> Result<i32> {
    let settings = config::resolve_pipeline(&args.pipeline, file)?;
    let thresholds = config::resolve_analyze(args, file)?;
    let input = require_input(&settings)?;
    if input.is_dir() {
        return analyze_batch(input, &settings, &thresholds, args.diagnostics.as_deref());
    }
    let outcome = analyze_file(input, &settings, &thresholds)?;
    if let Some(diag_path) = args.diagnostics.as_deref() {
        let table = build_diagnostics(&outcome.app, &outcome.report)?;
        io::write_diagnostics_csv(diag_path, &table)?;
    }
    match settings.output.as_deref() {
        Some(path) => io::write_detection_report(path, &outcome.report)?,
        None => print!("{}", io::detection_report_json(&outcome.report)),
    }
    Ok(0)
}

fn analyze_batch(
    dir: &Path,
    settings: &PipelineSettings,
    thresholds: &AnalyzeSettings,
    diagnostics: Option<&Path>,
) -> Result<i32> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("csv") | Some("json")
                )
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(HelixError::InvalidArgument(format!(
            "{}: no .csv or .json curves found",
            dir.display()
        )));
    }
    let out_dir = settings.output.clone().unwrap_or_else(|| dir.to_path_buf());
    std::fs::create_dir_all(&out_dir)?;
    if let Some(diag_dir) = diagnostics {
        std::fs::create_dir_all(diag_dir)?;
    }

    let workers = batch_workers(files.len())?;
    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Option<(String, i32)>>> =
        files.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= files.len() {
                    break;
                }
                let path = &files[idx];
                let entry =
                    match process_batch_entry(path, &out_dir, diagnostics, settings, thresholds) {
                        Ok(verdict) => (format!("{}: {verdict}", path.display()), 0),
                        Err(e) => (format!("{}: error: {e}", path.display()), e.exit_code()),
                    };
                *results[idx]
                    .lock()
                    .expect("no panics while holding the lock") = Some(entry);
            });
        }
    });

    let mut worst = 0;
    for cell in &results {
        let (line, code) = cell
            .lock()
            .expect("no panics while holding the lock")
            .take()
            .expect("every file was processed");
        eprintln!("{line}");
        worst = worst.max(code);
    }
    Ok(worst)
}

fn process_batch_entry(
    path: &Path,
    out_dir: &Path,
    diagnostics: Option<&Path>,
    settings: &PipelineSettings,
    thresholds: &AnalyzeSettings,
) -> Result<&'static str> {
    let outcome = analyze_file(path, settings, thresholds)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("curve");
    io::write_detection_report(
        &out_dir.join(format!("{stem}.report.json")),
        &outcome.report,
    )?;
    if let Some(diag_dir) = diagnostics {
        let table = build_diagnostics(&outcome.app, &outcome.report)?;
        io::write_diagnostics_csv(&diag_dir.join(format!("{stem}.diag.csv")), &table)?;
    }
    Ok(outcome.report.verdict.as_str())
}

/// Worker count for batch mode: `HELIXLAB_THREADS` when set (must be a
/// positive integer), otherwise the machine's available parallelism, never
/// more than the number of files.
fn batch_workers(task_count: usize) -> Result<usize> {
    let cap = match std::env::var("HELIXLAB_THREADS") {
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&v| v >= 1)
            .ok_or_else(|| {
                HelixError::InvalidArgument(format!(
                    "HELIXLAB_THREADS must be a positive integer, got `{raw}`"
                ))
            })?,
        Err(std::env::VarError::NotPresent) => std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1),
        Err(e) => {
            return Err(HelixError::InvalidArgument(format!(
                "HELIXLAB_THREADS: {e}"
            )))
        }
    };
    Ok(cap.min(task_count).max(1))
}

// ---------------------------------------------------------------------------
// synthesize
// ---------------------------------------------------------------------------

fn resolve_family(args: &SynthesizeArgs, file: &FileConfig) -> Result<FamilyArg> {
    if let Some(f) = args.family {
        return Ok(f);
    }
    match file.family.as_deref() {
        Some("w_curve") => Ok(FamilyArg::WCurve),
        Some("constant_precession") => Ok(FamilyArg::ConstantPrecession),
        Some("slant") => Ok(FamilyArg::Slant),
        Some("random") => Ok(FamilyArg::Random),
        Some(other) => Err(HelixError::InvalidArgument(format!(
            "unknown family `{other}` (expected w_curve, constant_precession, slant, or random)"
        ))),
        None => Err(HelixError::InvalidArgument(
            "--family is required (w_curve, constant_precession, slant, or random)".into(),
        )),
    }
}

fn resolve_interval(args: &SynthesizeArgs, file: &FileConfig) -> Result<Option<(f64, f64)>> {
    let interval = args.interval.or_else(|| file.interval.map(|[a, b]| (a, b)));
    if let Some((a, b)) = interval {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(HelixError::InvalidArgument(format!(
                "interval must satisfy a < b with finite endpoints, got ({a}, {b})"
            )));
        }
    }
    Ok(interval)
}

fn cmd_synthesize(args: &SynthesizeArgs, file: &FileConfig) -> Result<()> {
    let family = resolve_family(args, file)?;
    let grid = args.grid.or(file.grid).unwrap_or(config::DEFAULT_GRID);
    if grid < helixlab::tol::MIN_FRAME_GRID {
        return Err(HelixError::InvalidArgument(format!(
            "grid size {grid} is below the minimum {}",
            helixlab::tol::MIN_FRAME_GRID
        )));
    }
    let interval = resolve_interval(args, file)?;

    let record: SynthesisRecord<f64> = match family {
        FamilyArg::WCurve => {
            let deltas = args
                .deltas
                .clone()
                .or_else(|| file.deltas.clone())
                .ok_or_else(|| {
                    HelixError::InvalidArgument(
                        "the w_curve family requires --deltas (comma-separated curvatures)".into(),
                    )
                })?;
            let n = args.n.or(file.n).unwrap_or(deltas.len() + 1);
            let length = args.length.or(file.length).unwrap_or(6.0);
            synthesis::w_curve(n, &deltas, length, grid)?
        }
        FamilyArg::ConstantPrecession => {
            let omega = args.omega.or(file.omega).unwrap_or(2.0);
            let mu = args.mu.or(file.mu).unwrap_or(1.0);
            let interval = interval.unwrap_or((0.3, 2.8));
            synthesis::constant_precession_curve(omega, mu, interval, grid)?
        }
        FamilyArg::Slant => {
            let n = args.n.or(file.n).unwrap_or(3);
            if n < 3 {
                return Err(HelixError::InvalidArgument(format!(
                    "the slant family needs dimension at least 3, got {n}"
                )));
            }
            let c = args.c.or(file.c).ok_or_else(|| {
                HelixError::InvalidArgument("the slant family requires --C (must exceed 1)".into())
            })?;
            let c0 = args.c0.or(file.c0).unwrap_or(0.0);
            let kappa_raw: Vec<String> = if !args.kappa.is_empty() {
                args.kappa.clone()
            } else if let Some(k) = &file.kappa {
                k.clone()
            } else {
                vec!["1".into(); n - 2]
            };
            if kappa_raw.len() != n - 2 {
                return Err(HelixError::InvalidArgument(format!(
                    "dimension {n} needs {} curvature expressions, got {}",
                    n - 2,
                    kappa_raw.len()
                )));
            }
            let kappas: Vec<Expr> = kappa_raw
                .iter()
                .map(|text| Expr::parse(text))
                .collect::<Result<_>>()?;
            let interval = interval.unwrap_or((0.0, 1.0));
            synthesis::synthesize_slant_helix(n, &kappas, c, c0, interval, grid)?
        }
        FamilyArg::Random => {
            let n = args.n.or(file.n).unwrap_or(3);
            let seed = args.seed.or(file.seed).unwrap_or(0);
            let smoothness = args.smoothness.or(file.smoothness).unwrap_or(0.4);
            let length = args.length.or(file.length).unwrap_or(6.0);
            synthesis::random_curvature_curve(n, seed, smoothness, length, grid)?
        }
    };

    let curve_path = args
        .output_curve
        .clone()
        .unwrap_or_else(|| PathBuf::from("curve.csv"));
    let truth_path = args
        .output_truth
        .clone()
        .unwrap_or_else(|| PathBuf::from("truth.json"));
    if curve_path == truth_path {
        return Err(HelixError::InvalidArgument(
            "--output-curve and --output-truth must name different files".into(),
        ));
    }
    io::write_curve_csv(&curve_path, &record.curve)?;
    io::write_synthesis_sidecar(&truth_path, &record)?;
    eprintln!(
        "wrote {} points ({} family, dimension {}) to {}; ground truth in {}",
        record.curve.len(),
        record.family.as_str(),
        record.curve.dimension(),
        curve_path.display(),
        truth_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// frenet
// ---------------------------------------------------------------------------

fn cmd_frenet(args: &PipelineArgs, file: &FileConfig) -> Result<()> {
    let settings = config::resolve_pipeline(args, file)?;
    let input = require_input(&settings)?;
    let (_, app) = load_apparatus(input, &settings)?;
    let residual = app.ode_residual()?;
    let per_vector: Vec<String> = residual
        .per_vector_max
        .iter()
        .map(|v| format!("{v:.3e}"))
        .collect();
    eprintln!(
        "frame ODE residual (grid {}, step {:.6e}): max {:.3e}; per-vector max [{}]",
        app.len(),
        app.step(),
        residual.max,
        per_vector.join(", ")
    );
    match settings.output.as_deref() {
        Some(path) => io::write_apparatus_csv(path, &app)?,
        None => print!("{}", io::apparatus_csv(&app)),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// oracle-axis
// ---------------------------------------------------------------------------

fn json_num(x: f64) -> String {
    if x.is_finite() {
        io::format_float(x)
    } else {
        "null".into()
    }
}

fn json_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "null".into(), json_num)
}

fn json_str(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn cmd_oracle_axis(args: &PipelineArgs, file: &FileConfig) -> Result<()> {
    let settings = config::resolve_pipeline(args, file)?;
    let input = require_input(&settings)?;
    let (_, app) = load_apparatus(input, &settings)?;

    let (found, axis, angles, sigma, detail) = match slant::oracle_axis_svd(&app) {
        Ok(o) => {
            let found = o.axis.is_some();
            (
                found,
                o.axis,
                o.angles,
                Some((o.sigma_min, o.sigma_max)),
                None,
            )
        }
        Err(e @ HelixError::AmbiguousNullspace { .. }) => {
            (false, None, Vec::new(), None, Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };

    let axis_json = axis.map_or_else(
        || "null".into(),
        |u| {
            let parts: Vec<String> = u.iter().map(|&x| json_num(x)).collect();
            format!("[{}]", parts.join(", "))
        },
    );
    let angle_min = angles
        .iter()
        .copied()
        .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |v| v.min(a))));
    let angle_max = angles
        .iter()
        .copied()
        .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |v| v.max(a))));

    let mut text = String::new();
    text.push_str("{\n");
    text.push_str("  \"schema\": 1,\n");
    text.push_str(&format!("  \"found\": {found},\n"));
    text.push_str(&format!("  \"axis\": {axis_json},\n"));
    text.push_str(&format!("  \"angle_min\": {},\n", json_opt(angle_min)));
    text.push_str(&format!("  \"angle_max\": {},\n", json_opt(angle_max)));
    text.push_str(&format!(
        "  \"sigma_min\": {},\n",
        json_opt(sigma.map(|(lo, _)| lo))
    ));
    text.push_str(&format!(
        "  \"sigma_max\": {},\n",
        json_opt(sigma.map(|(_, hi)| hi))
    ));
    text.push_str(&format!(
        "  \"detail\": {}\n",
        detail.map_or_else(|| "null".into(), |d| json_str(&d))
    ));
    text.push_str("}\n");

    match settings.output.as_deref() {
        Some(path) => io::atomic_write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(args: &PipelineArgs, file: &FileConfig) -> Result<()> {
    let settings = config::resolve_pipeline(args, file)?;
    let input = require_input(&settings)?;
    let (_, app) = load_apparatus(input, &settings)?;

    let g = slant::compute_g_basis(&app)?;
    let c0 = slant::solve_integration_constant(&g);
    let g = g.with_constant(c0);
    let differential = slant::differential_characterization_residual(&g, &app)?;
    let integral = slant::integral_characterization(&g, &app)?;
    let telescoping = slant::telescoping_identity_residual(&g, &app)?;

    let mut text = String::new();
    text.push_str("{\n");
    text.push_str("  \"schema\": 1,\n");
    text.push_str(&format!("  \"c0\": {},\n", json_num(c0)));
    text.push_str(&format!(
        "  \"differential\": {},\n",
        json_num(differential)
    ));
    text.push_str("  \"integral\": {\n");
    text.push_str(&format!(
        "    \"residual\": {},\n",
        json_num(integral.residual)
    ));
    text.push_str(&format!("    \"a\": {},\n", json_num(integral.a)));
    text.push_str(&format!("    \"b\": {},\n", json_num(integral.b)));
    text.push_str(&format!("    \"m_std\": {},\n", json_num(integral.m_std)));
    text.push_str(&format!("    \"n_std\": {}\n", json_num(integral.n_std)));
    text.push_str("  },\n");
    text.push_str(&format!("  \"telescoping\": {}\n", json_num(telescoping)));
    text.push_str("}\n");

    match settings.output.as_deref() {
        Some(path) => io::atomic_write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}
