//! Flat-file formats: curve CSV, analytic-curve JSON, apparatus CSV,
//! detection reports, synthesis ground-truth sidecars, and diagnostics
//! tables.
//!
//! Every floating-point value is written in scientific notation with 17
//! significant digits, enough to round-trip `f64` exactly, so identical
//! inputs always produce byte-identical files. JSON documents are emitted
//! with a fixed key order for the same reason. All writes go through a
//! temp-and-rename step so a reader never observes a partial file.
//!
//! This module works in `f64`: files are an interchange format, and the
//! command-line front end is fixed to double precision.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DVector;
use serde::Deserialize;

use crate::curve::{AnalyticCurve, SampledCurve};
use crate::error::{HelixError, Result};
use crate::expr::Expr;
use crate::frenet::FrenetApparatus;
use crate::slant::DetectionReport;
use crate::synthesis::SynthesisRecord;

/// 17 significant digits: exact round-trip for `f64`, fixed width.
/// Non-finite values come out as lowercase `nan` / `inf` / `-inf`.
pub fn format_float(x: f64) -> String {
    num(x)
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// JSON value for a float: non-finite becomes `null` (JSON has no NaN).
fn json_num(x: f64) -> String {
    if x.is_finite() {
        num(x)
    } else {
        "null".into()
    }
}

fn json_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "null".into(), json_num)
}

fn json_vec(v: &DVector<f64>) -> String {
    let body = v
        .iter()
        .map(|&x| json_num(x))
        .collect::<Vec<_>>()
        .join(", ");
    format!("[{body}]")
}

fn json_opt_vec(v: Option<&DVector<f64>>) -> String {
    v.map_or_else(|| "null".into(), json_vec)
}

static WRITE_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes through a uniquely named sibling temp file, then renames over the
/// target, so concurrent readers and batch workers never see partial output.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let tmp = temp_sibling(path);
    std::fs::write(&tmp, contents)?;
    if let Err(e) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

fn temp_sibling(path: &Path) -> PathBuf {
    let stamp = WRITE_COUNTER.fetch_add(1, Ordering::Relaxed);
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    path.with_file_name(format!(".{name}.{}-{stamp}.tmp", std::process::id()))
}

// ---------------------------------------------------------------------------
// curve CSV: header `s,x1,...,xn` with the `s` column optional

/// Reads a sampled curve. The header must be `s,x1,...,xn` or `x1,...,xn`;
/// every row needs one finite decimal value per column.
pub fn read_curve_csv(path: &Path) -> Result<SampledCurve<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, format!("cannot open: {e}")))?;

    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, format!("cannot read header: {e}")))?
        .clone();
    if headers.is_empty() {
        return Err(parse_err(path, "empty file; expected a header row".into()));
    }
    if headers.iter().all(|f| f.parse::<f64>().is_ok()) {
        return Err(parse_err(
            path,
            "first row looks like data; a header row `s,x1,...,xn` (or `x1,...,xn`) is required"
                .into(),
        ));
    }
    let has_s = headers.get(0) == Some("s");
    let coord_names: Vec<&str> = headers.iter().skip(usize::from(has_s)).collect();
    if coord_names.is_empty() {
        return Err(parse_err(
            path,
            "missing column x1: no coordinate columns after the header".into(),
        ));
    }
    for (i, name) in coord_names.iter().enumerate() {
        let expected = format!("x{}", i + 1);
        if *name != expected {
            return Err(parse_err(
                path,
                format!("missing column {expected}: header has `{name}` in its place"),
            ));
        }
    }
    let n = coord_names.len();

    let mut params = Vec::new();
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, format!("row {}: {e}", row + 2)))?;
        if record.len() != n + usize::from(has_s) {
            return Err(parse_err(
                path,
                format!(
                    "row {}: expected {} fields, found {}",
                    row + 2,
                    n + usize::from(has_s),
                    record.len()
                ),
            ));
        }
        let field = |idx: usize, name: &str| -> Result<f64> {
            let raw = &record[idx];
            let v: f64 = raw.parse().map_err(|_| {
                parse_err(
                    path,
                    format!("row {}, column {name}: cannot parse `{raw}`", row + 2),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    path,
                    format!("row {}, column {name}: non-finite value `{raw}`", row + 2),
                ));
            }
            Ok(v)
        };
        if has_s {
            params.push(field(0, "s")?);
        }
        let mut p = DVector::zeros(n);
        for k in 0..n {
            p[k] = field(k + usize::from(has_s), coord_names[k])?;
        }
        points.push(p);
    }

    if has_s {
        SampledCurve::with_params(points, params)
    } else {
        SampledCurve::new(points)
    }
}

/// Writes a sampled curve; the `s` column is included when the curve carries
/// parameter values.
pub fn write_curve_csv(path: &Path, curve: &SampledCurve<f64>) -> Result<()> {
    let n = curve.dimension();
    let mut out = String::new();
    if curve.params().is_some() {
        out.push('s');
        out.push(',');
    }
    for k in 1..=n {
        if k > 1 {
            out.push(',');
        }
        let _ = write!(out, "x{k}");
    }
    out.push('\n');
    for (j, p) in curve.points().iter().enumerate() {
        if let Some(params) = curve.params() {
            let _ = write!(out, "{},", num(params[j]));
        }
        for k in 0..n {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&num(p[k]));
        }
        out.push('\n');
    }
    atomic_write(path, &out)
}

// ---------------------------------------------------------------------------
// analytic curve JSON

#[derive(Deserialize)]
struct AnalyticJson {
    dimension: usize,
    coords: Vec<String>,
    interval: [f64; 2],
}

/// Reads an analytic curve definition:
/// `{ "dimension": n, "coords": ["expr", ...], "interval": [t0, t1] }`.
pub fn read_analytic_json(path: &Path) -> Result<AnalyticCurve<f64>> {
    let text = std::fs::read_to_string(path)?;
    let raw: AnalyticJson = serde_json::from_str(&text)
        .map_err(|e| parse_err(path, format!("invalid analytic-curve JSON: {e}")))?;
    if raw.dimension != raw.coords.len() {
        return Err(parse_err(
            path,
            format!(
                "dimension {} does not match the {} coordinate expressions",
                raw.dimension,
                raw.coords.len()
            ),
        ));
    }
    let coords = raw
        .coords
        .iter()
        .map(|src| {
            Expr::parse(src).map_err(|e| parse_err(path, format!("coordinate `{src}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    AnalyticCurve::new(coords, (raw.interval[0], raw.interval[1]))
}

// ---------------------------------------------------------------------------
// apparatus CSV: s, V{i}_{k}..., kappa{i}...

/// Renders frames and curvatures over the grid as CSV. Columns: `s`, then
/// the frame vectors in index order with components `V{i}_{k}` (vector `i`,
/// component `k`, both 1-based), then `kappa1 .. kappa{n-1}`.
pub fn apparatus_csv(app: &FrenetApparatus<f64>) -> String {
    let n = app.dimension();
    let mut out = String::from("s");
    for i in 1..=n {
        for k in 1..=n {
            let _ = write!(out, ",V{i}_{k}");
        }
    }
    for i in 1..n {
        let _ = write!(out, ",kappa{i}");
    }
    out.push('\n');
    for (j, &s) in app.grid().iter().enumerate() {
        out.push_str(&num(s));
        let frame = &app.frames()[j];
        for i in 0..n {
            for k in 0..n {
                out.push(',');
                out.push_str(&num(frame[(i, k)]));
            }
        }
        for i in 1..n {
            out.push(',');
            out.push_str(&num(app.curvature(i)[j]));
        }
        out.push('\n');
    }
    out
}

pub fn write_apparatus_csv(path: &Path, app: &FrenetApparatus<f64>) -> Result<()> {
    atomic_write(path, &apparatus_csv(app))
}

// ---------------------------------------------------------------------------
// detection report JSON

/// Serializes a detection report with a fixed schema and key order. String
/// fields come from closed sets (verdict names), so no escaping is needed.
pub fn detection_report_json(report: &DetectionReport<f64>) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"schema\": 1,");
    let _ = writeln!(out, "  \"verdict\": \"{}\",", report.verdict.as_str());
    let _ = writeln!(out, "  \"C\": {},", json_num(report.c));
    let _ = writeln!(out, "  \"theta_rad\": {},", json_opt(report.theta));
    let _ = writeln!(out, "  \"axis\": {},", json_opt_vec(report.axis.as_ref()));
    let _ = writeln!(out, "  \"defect\": {},", json_num(report.defect));
    let _ = writeln!(out, "  \"c0\": {},", json_num(report.c0));
    let _ = writeln!(out, "  \"residuals\": {{");
    let _ = writeln!(
        out,
        "    \"differential\": {},",
        json_num(report.residuals.differential)
    );
    let _ = writeln!(
        out,
        "    \"integral\": {},",
        json_num(report.residuals.integral)
    );
    let _ = writeln!(
        out,
        "    \"telescoping\": {}",
        json_num(report.residuals.telescoping)
    );
    let _ = writeln!(out, "  }},");
    let _ = writeln!(out, "  \"oracle\": {{");
    let _ = writeln!(out, "    \"found\": {},", report.oracle.found);
    let _ = writeln!(
        out,
        "    \"angle_min\": {},",
        json_opt(report.oracle.angle_min)
    );
    let _ = writeln!(
        out,
        "    \"angle_max\": {}",
        json_opt(report.oracle.angle_max)
    );
    let _ = writeln!(out, "  }}");
    out.push_str("}\n");
    out
}

pub fn write_detection_report(path: &Path, report: &DetectionReport<f64>) -> Result<()> {
    atomic_write(path, &detection_report_json(report))
}

// ---------------------------------------------------------------------------
// synthesis ground-truth sidecar JSON

/// Serializes the ground truth a generator knows about its own output:
/// `{ "C", "theta", "axis", "c0", "family" }`, with `null` for fields the
/// family does not define.
pub fn synthesis_sidecar_json(record: &SynthesisRecord<f64>) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"C\": {},", json_opt(record.c_true));
    let _ = writeln!(out, "  \"theta\": {},", json_opt(record.theta_true));
    let _ = writeln!(
        out,
        "  \"axis\": {},",
        json_opt_vec(record.axis_true.as_ref())
    );
    let _ = writeln!(out, "  \"c0\": {},", json_opt(record.c0_true));
    let _ = writeln!(out, "  \"family\": \"{}\"", record.family.as_str());
    out.push_str("}\n");
    out
}

pub fn write_synthesis_sidecar(path: &Path, record: &SynthesisRecord<f64>) -> Result<()> {
    atomic_write(path, &synthesis_sidecar_json(record))
}

// ---------------------------------------------------------------------------
// diagnostics CSV

/// Plot-ready per-grid-point channels of a detection run. Channels that the
/// run did not produce (no axis, dimension other than 3) are omitted or
/// filled with `nan`, as documented on each field.
pub struct DiagnosticsTable {
    pub s: Vec<f64>,
    /// Sum of squared coefficient functions at the chosen constant.
    pub sum_g2: Vec<f64>,
    /// Angle between the second frame vector and the recovered axis;
    /// `nan`-filled when there is no axis.
    pub angle_to_axis: Option<Vec<f64>>,
    /// Planar-slope invariant; present only in dimension 3.
    pub sigma: Option<Vec<f64>>,
    /// Pointwise residual of the closing identity `G_n' = -kappa_{n-1} G_{n-1}`.
    pub gn_residual: Vec<f64>,
}

/// Writes `s,sumG2,angle_to_axis[,sigma],Gn_residual`; the `sigma` column
/// appears only when the table carries one (dimension 3).
pub fn write_diagnostics_csv(path: &Path, table: &DiagnosticsTable) -> Result<()> {
    let m = table.s.len();
    for (name, len) in [
        ("sumG2", table.sum_g2.len()),
        (
            "angle_to_axis",
            table.angle_to_axis.as_ref().map_or(m, Vec::len),
        ),
        ("sigma", table.sigma.as_ref().map_or(m, Vec::len)),
        ("Gn_residual", table.gn_residual.len()),
    ] {
        if len != m {
            return Err(HelixError::InvalidArgument(format!(
                "diagnostics column {name} has {len} rows, grid has {m}"
            )));
        }
    }
    let mut out = String::from("s,sumG2,angle_to_axis");
    if table.sigma.is_some() {
        out.push_str(",sigma");
    }
    out.push_str(",Gn_residual\n");
    for j in 0..m {
        let _ = write!(out, "{},{},", num(table.s[j]), num(table.sum_g2[j]));
        let angle = table.angle_to_axis.as_ref().map_or(f64::NAN, |a| a[j]);
        let _ = write!(out, "{}", num(angle));
        if let Some(sigma) = &table.sigma {
            let _ = write!(out, ",{}", num(sigma[j]));
        }
        let _ = writeln!(out, ",{}", num(table.gn_residual[j]));
    }
    atomic_write(path, &out)
}

fn parse_err(path: &Path, detail: String) -> HelixError {
    HelixError::Parse(format!("{}: {detail}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slant;
    use crate::synthesis;

    fn dir() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn curve_csv_round_trips_exactly() {
        let d = dir();
        let path = d.path().join("curve.csv");
        let rec = synthesis::w_curve::<f64>(3, &[0.12, 0.16], 6.0, 64).unwrap();
        write_curve_csv(&path, &rec.curve).unwrap();
        let back = read_curve_csv(&path).unwrap();
        assert_eq!(back.points(), rec.curve.points());
        assert_eq!(back.params().unwrap(), rec.curve.params().unwrap());
    }

    #[test]
    fn curve_csv_without_parameter_column_reads() {
        let d = dir();
        let path = d.path().join("bare.csv");
        std::fs::write(
            &path,
            "x1,x2\n0,0\n1,0\n2,1\n3,3\n2,4\n1,4.5\n0,4.4\n-1,4\n-2,3\n",
        )
        .unwrap();
        let curve = read_curve_csv(&path).unwrap();
        assert_eq!(curve.dimension(), 2);
        assert_eq!(curve.len(), 9);
        assert!(curve.params().is_none());
    }

    #[test]
    fn header_problems_name_the_missing_column() {
        let d = dir();
        let path = d.path().join("bad.csv");
        std::fs::write(&path, "s,x1,x3\n0,1,2\n").unwrap();
        let err = read_curve_csv(&path).unwrap_err();
        match err {
            HelixError::Parse(msg) => assert!(msg.contains("missing column x2"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }

        std::fs::write(&path, "0,1,2\n3,4,5\n").unwrap();
        let err = read_curve_csv(&path).unwrap_err();
        match err {
            HelixError::Parse(msg) => assert!(msg.contains("header row"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn data_problems_name_row_and_column() {
        let d = dir();
        let path = d.path().join("bad.csv");
        std::fs::write(&path, "x1,x2\n0,1\n2,oops\n").unwrap();
        let err = read_curve_csv(&path).unwrap_err();
        match err {
            HelixError::Parse(msg) => {
                assert!(msg.contains("row 3") && msg.contains("x2"), "{msg}")
            }
            other => panic!("expected parse error, got {other:?}"),
        }

        std::fs::write(&path, "x1,x2\n0,inf\n").unwrap();
        let err = read_curve_csv(&path).unwrap_err();
        match err {
            HelixError::Parse(msg) => assert!(msg.contains("non-finite"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn analytic_json_reads_and_validates() {
        let d = dir();
        let path = d.path().join("curve.json");
        std::fs::write(
            &path,
            r#"{ "dimension": 3, "coords": ["3*cos(t)", "3*sin(t)", "4*t"], "interval": [0, 6.0] }"#,
        )
        .unwrap();
        let curve = read_analytic_json(&path).unwrap();
        assert_eq!(curve.dimension(), 3);
        let p = curve.eval(0.0);
        assert_eq!(p[0], 3.0);

        std::fs::write(
            &path,
            r#"{ "dimension": 2, "coords": ["t", "t", "t"], "interval": [0, 1] }"#,
        )
        .unwrap();
        let err = read_analytic_json(&path).unwrap_err();
        assert!(matches!(err, HelixError::Parse(_)), "{err:?}");
    }

    #[test]
    fn apparatus_csv_has_the_documented_columns() {
        let d = dir();
        let path = d.path().join("app.csv");
        let rec = synthesis::w_curve::<f64>(3, &[0.12, 0.16], 6.0, 64).unwrap();
        write_apparatus_csv(&path, &rec.apparatus).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "s,V1_1,V1_2,V1_3,V2_1,V2_2,V2_3,V3_1,V3_2,V3_3,kappa1,kappa2"
        );
        assert_eq!(lines.count(), 64);
        let second = text.lines().nth(1).unwrap();
        let kappa1: f64 = second.split(',').nth(10).unwrap().parse().unwrap();
        assert!((kappa1 - 0.12).abs() < 1e-12);
    }

    #[test]
    fn detection_report_serialization_is_stable_and_parseable() {
        let rec = synthesis::constant_precession_curve::<f64>(2.0, 1.0, (0.3, 2.8), 256).unwrap();
        let report = slant::detect_slant_helix(&rec.apparatus, None).unwrap();
        let one = detection_report_json(&report);
        let two = detection_report_json(&report);
        assert_eq!(one, two);

        let value: serde_json::Value = serde_json::from_str(&one).unwrap();
        assert_eq!(value["schema"], 1);
        assert_eq!(value["verdict"], "slant_helix");
        assert!((value["C"].as_f64().unwrap() - 5.0).abs() < 0.05);
        assert!(value["axis"].as_array().unwrap().len() == 3);
        assert!(value["residuals"]["telescoping"].as_f64().unwrap() < 1e-4);
        assert!(value["oracle"]["found"].as_bool().unwrap());

        // 17 significant digits: mantissa with 16 decimals
        let c_text = one
            .lines()
            .find(|l| l.contains("\"C\""))
            .unwrap()
            .trim()
            .trim_start_matches("\"C\": ")
            .trim_end_matches(',');
        let mantissa = c_text.split('e').next().unwrap();
        assert_eq!(mantissa.split('.').nth(1).unwrap().len(), 16, "{c_text}");
    }

    #[test]
    fn sidecar_reports_ground_truth_and_nulls() {
        let rec = synthesis::constant_precession_curve::<f64>(2.0, 1.0, (0.3, 2.8), 256).unwrap();
        let text = synthesis_sidecar_json(&rec);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["family"], "constant_precession");
        assert!((value["C"].as_f64().unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(value["axis"].as_array().unwrap().len(), 3);

        let rec = synthesis::w_curve::<f64>(3, &[0.12, 0.16], 6.0, 64).unwrap();
        let value: serde_json::Value = serde_json::from_str(&synthesis_sidecar_json(&rec)).unwrap();
        assert_eq!(value["family"], "w_curve");
        assert!(value["C"].is_null());
        assert!(value["axis"].is_null());
    }

    #[test]
    fn diagnostics_table_controls_the_sigma_column() {
        let d = dir();
        let path = d.path().join("diag.csv");
        let table = DiagnosticsTable {
            s: vec![0.0, 0.5],
            sum_g2: vec![5.0, 5.0],
            angle_to_axis: None,
            sigma: Some(vec![-0.5, -0.5]),
            gn_residual: vec![1e-9, 2e-9],
        };
        write_diagnostics_csv(&path, &table).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("s,sumG2,angle_to_axis,sigma,Gn_residual\n"));
        assert!(text.contains("nan"));

        let table = DiagnosticsTable {
            sigma: None,
            ..table
        };
        write_diagnostics_csv(&path, &table).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("s,sumG2,angle_to_axis,Gn_residual\n"));
    }

    #[test]
    fn writes_leave_no_temp_files_behind() {
        let d = dir();
        let path = d.path().join("out.csv");
        let rec = synthesis::w_curve::<f64>(3, &[0.12, 0.16], 6.0, 64).unwrap();
        write_curve_csv(&path, &rec.curve).unwrap();
        write_curve_csv(&path, &rec.curve).unwrap();
        let entries: Vec<_> = std::fs::read_dir(d.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        assert_eq!(entries, vec!["out.csv".to_string()]);
    }
}
