use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use galilean_core::connection::{extract_invariants, verify_structure_equations, CurvatureInvariants};
use galilean_core::geodesy::{develop, integrate_geodesic, Truncation};
use galilean_core::jetconn::appendix_check;
use galilean_core::model::is_straight_line;
use galilean_core::ChartPoint;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::points::{parse_grid, parse_point};
use crate::system::load_system;

/// Half-width of the box random check points are drawn from.
pub const CHECK_BOX: f64 = 1.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    CheckFailed = 1,
    InputError = 2,
    BlowUp = 3,
}

/// Shortest representation that parses back to the same double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn coord_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("x{i}")));
    h.extend((1..=n).map(|i| format!("y{i}")));
    h
}

fn coord_fields(p: &ChartPoint) -> Vec<String> {
    p.coords().into_iter().map(fmt_f64).collect()
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().flexible(true).from_writer(out)
}

fn write_json(out: &mut dyn Write, value: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    /// System file (JSON).
    pub file: PathBuf,
    /// Number of random points.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Also compare the frame torsion with the curvature invariants.
    #[arg(long)]
    pub appendix: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

/// One line of a check report. Rows without a limit are informational.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub name: &'static str,
    pub value: f64,
    pub limit: Option<f64>,
}

impl ReportRow {
    pub fn passed(&self) -> bool {
        self.limit.is_none_or(|l| self.value <= l)
    }
}

pub struct CheckOutcome {
    pub rows: Vec<ReportRow>,
    pub points_checked: usize,
    pub skipped: usize,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.points_checked > 0 && self.skipped == 0 && self.rows.iter().all(ReportRow::passed)
    }
}

/// Runs the structure-equation checks (and optionally the frame-torsion
/// cross-check) at seeded random points.
pub fn run_check(args: &CheckArgs) -> Result<CheckOutcome> {
    let sys = load_system(&args.file)?;
    let conn = sys.connection()?;
    let points = conn.sample_points(args.points, args.seed, CHECK_BOX)?;
    let report = verify_structure_equations(&conn, &points, args.tol);
    let tol = Some(args.tol);
    let mut rows = vec![
        ReportRow { name: "dtau", value: report.dtau, limit: tol },
        ReportRow { name: "omega", value: report.omega, limit: tol },
        ReportRow { name: "omega_oracle", value: report.omega_oracle, limit: tol },
        ReportRow { name: "phi_oracle", value: report.phi_oracle, limit: tol },
        ReportRow { name: "phi_phi", value: report.phi_phi, limit: tol },
    ];
    let mut skipped = report.skipped.len();
    if args.appendix {
        let app = appendix_check(&conn, &points);
        rows.extend([
            ReportRow { name: "torsion_formula", value: app.formula_residual, limit: tol },
            ReportRow { name: "horizontal_torsion", value: app.horizontal_torsion_residual, limit: tol },
            ReportRow { name: "vertical_torsion", value: app.vertical_torsion, limit: None },
            ReportRow { name: "max_commutator", value: app.max_commutator, limit: None },
        ]);
        skipped += app.skipped.len();
    }
    Ok(CheckOutcome { rows, points_checked: report.points_checked, skipped })
}

pub fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> Result<Status> {
    let outcome = run_check(args)?;
    let verdict = |r: &ReportRow| match (r.limit, r.passed()) {
        (None, _) => "info",
        (Some(_), true) => "pass",
        (Some(_), false) => "fail",
    };
    match args.format {
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["residual", "max_abs", "tol", "status"])?;
            for r in &outcome.rows {
                let limit = r.limit.map(fmt_f64).unwrap_or_default();
                w.write_record([r.name, &fmt_f64(r.value), &limit, verdict(r)])?;
            }
            w.write_record(["points_checked", &outcome.points_checked.to_string(), "", "info"])?;
            w.write_record(["points_skipped", &outcome.skipped.to_string(), "", "info"])?;
            w.flush()?;
        }
        Format::Json => {
            let mut rows: Vec<Value> = outcome
                .rows
                .iter()
                .map(|r| json!({"residual": r.name, "max_abs": r.value, "tol": r.limit, "status": verdict(r)}))
                .collect();
            rows.push(
                json!({"residual": "points_checked", "max_abs": outcome.points_checked, "tol": null, "status": "info"}),
            );
            rows.push(json!({"residual": "points_skipped", "max_abs": outcome.skipped, "tol": null, "status": "info"}));
            write_json(out, &Value::Array(rows))?;
        }
    }
    Ok(if outcome.passed() { Status::Pass } else { Status::CheckFailed })
}

#[derive(Args, Debug, Clone)]
#[command(group = clap::ArgGroup::new("where").required(true).multiple(true))]
pub struct InvariantsArgs {
    pub file: PathBuf,
    /// A point such as `t=0,x=[2],y=[1]`; may be repeated.
    #[arg(long, group = "where")]
    pub at: Vec<String>,
    /// `lo:hi:count`, a tensor grid over every chart coordinate.
    #[arg(long, group = "where", allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

fn tensor_header(n: usize) -> Vec<String> {
    let mut h = Vec::new();
    let two = |name: &str, h: &mut Vec<String>| {
        for i in 1..=n {
            for j in 1..=n {
                h.push(format!("{name}[{i}][{j}]"));
            }
        }
    };
    let three = |name: &str, h: &mut Vec<String>| {
        for i in 1..=n {
            for j in 1..=n {
                for k in 1..=n {
                    h.push(format!("{name}[{i}][{j}][{k}]"));
                }
            }
        }
    };
    two("D", &mut h);
    three("Q", &mut h);
    two("P", &mut h);
    three("T", &mut h);
    h
}

fn tensor_values(inv: &CurvatureInvariants) -> Vec<f64> {
    let n = inv.dim();
    let mut v = Vec::new();
    let two = |m: &nalgebra::DMatrix<f64>, v: &mut Vec<f64>| {
        for i in 0..n {
            for j in 0..n {
                v.push(m[(i, j)]);
            }
        }
    };
    let three = |t: &[nalgebra::DMatrix<f64>], v: &mut Vec<f64>| {
        for m in t {
            for j in 0..n {
                for k in 0..n {
                    v.push(m[(j, k)]);
                }
            }
        }
    };
    two(&inv.d, &mut v);
    three(&inv.q, &mut v);
    two(&inv.p, &mut v);
    three(&inv.torsion, &mut v);
    v
}

fn nested(values: &[f64], n: usize, rank: usize) -> Value {
    if rank == 1 {
        return json!(values);
    }
    let stride = values.len() / n;
    Value::Array(values.chunks(stride).map(|c| nested(c, n, rank - 1)).collect())
}

pub struct InvariantsOutcome {
    pub points: Vec<ChartPoint>,
    pub rows: Vec<std::result::Result<CurvatureInvariants, String>>,
}

pub fn run_invariants(args: &InvariantsArgs) -> Result<InvariantsOutcome> {
    let sys = load_system(&args.file)?;
    let n = sys.n();
    let conn = sys.connection()?;
    let mut points = args
        .at
        .iter()
        .map(|s| parse_point(s, n).with_context(|| format!("in --at {s:?}")))
        .collect::<Result<Vec<_>>>()?;
    if let Some(g) = &args.grid {
        points.extend(parse_grid(g, n)?);
    }
    conn.curvature();
    let rows = points
        .par_iter()
        .map(|p| {
            let inv = extract_invariants(&conn, p).map_err(|e| e.to_string())?;
            if inv.is_finite() {
                Ok(inv)
            } else {
                Err("nonfinite invariant".to_string())
            }
        })
        .collect();
    Ok(InvariantsOutcome { points, rows })
}

pub fn cmd_invariants(args: &InvariantsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<Status> {
    let outcome = run_invariants(args)?;
    let n = outcome.points.first().map_or(0, ChartPoint::dim);
    let failures = outcome.rows.iter().filter(|r| r.is_err()).count();
    match args.format {
        Format::Csv => {
            let mut w = csv_writer(out);
            let mut header = coord_header(n);
            let tensors = tensor_header(n);
            let width = tensors.len();
            header.extend(tensors);
            header.push("status".into());
            w.write_record(&header)?;
            for (p, row) in outcome.points.iter().zip(&outcome.rows) {
                let mut fields = coord_fields(p);
                match row {
                    Ok(inv) => {
                        fields.extend(tensor_values(inv).into_iter().map(fmt_f64));
                        fields.push("ok".into());
                    }
                    Err(e) => {
                        fields.extend(std::iter::repeat_n(String::new(), width));
                        fields.push(format!("error: {e}"));
                    }
                }
                w.write_record(&fields)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rows = outcome
                .points
                .iter()
                .zip(&outcome.rows)
                .map(|(p, row)| {
                    let mut obj = json!({"t": p.t, "x": p.x, "y": p.y});
                    match row {
                        Ok(inv) => {
                            let v = tensor_values(inv);
                            let (d, rest) = v.split_at(n * n);
                            let (q, rest) = rest.split_at(n * n * n);
                            let (pm, t) = rest.split_at(n * n);
                            obj["D"] = nested(d, n, 2);
                            obj["Q"] = nested(q, n, 3);
                            obj["P"] = nested(pm, n, 2);
                            obj["T"] = nested(t, n, 3);
                            obj["status"] = json!("ok");
                        }
                        Err(e) => obj["status"] = json!(format!("error: {e}")),
                    }
                    obj
                })
                .collect();
            write_json(out, &Value::Array(rows))?;
        }
    }
    if failures > 0 {
        writeln!(err, "warning: {failures} point(s) could not be evaluated")?;
    }
    Ok(Status::Pass)
}

#[derive(Args, Debug, Clone)]
pub struct GeodesicArgs {
    pub file: PathBuf,
    /// Initial point such as `t=0,x=[0],y=[1]`.
    #[arg(long)]
    pub init: String,
    /// Length of the parameter interval.
    #[arg(long)]
    pub end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Also develop the curve into the model space.
    #[arg(long)]
    pub develop: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

pub struct GeodesicOutcome {
    pub samples: Vec<(f64, ChartPoint)>,
    pub developed: Option<Vec<galilean_core::model::ModelPoint>>,
    pub straight_line_residual: Option<f64>,
    pub truncation: Option<Truncation>,
    /// Why the development could not be completed.
    pub develop_error: Option<String>,
}

pub fn run_geodesic(args: &GeodesicArgs) -> Result<GeodesicOutcome> {
    let sys = load_system(&args.file)?;
    let init = parse_point(&args.init, sys.n()).context("in --init")?;
    let curve = integrate_geodesic(&sys.system, &init, args.end, args.step)?;
    let mut outcome = GeodesicOutcome {
        samples: Vec::new(),
        developed: None,
        straight_line_residual: None,
        truncation: None,
        develop_error: None,
    };
    if args.develop {
        let conn = sys.connection()?;
        match develop(&conn, &curve) {
            Ok(dev) => {
                let projected = dev.projected();
                if projected.len() >= 3 {
                    outcome.straight_line_residual = Some(is_straight_line(&projected, f64::INFINITY)?.max_violation);
                }
                outcome.developed = Some(projected.into_iter().map(|(_, p)| p).collect());
            }
            Err(e) => outcome.develop_error = Some(e.to_string()),
        }
    }
    outcome.samples = curve.samples;
    outcome.truncation = curve.truncation;
    Ok(outcome)
}

pub fn cmd_geodesic(args: &GeodesicArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<Status> {
    let outcome = run_geodesic(args)?;
    let n = outcome.samples[0].1.dim();
    let last = outcome.samples.len() - 1;
    let status = |k: usize| match (&outcome.truncation, k == last) {
        (Some(t), true) => format!("truncated: {t}"),
        _ => "ok".to_string(),
    };
    match args.format {
        Format::Csv => {
            {
                let mut w = csv_writer(out);
                let mut header = vec!["s".to_string()];
                header.extend(coord_header(n));
                if outcome.developed.is_some() {
                    header.extend(coord_header(n).into_iter().map(|c| format!("dev_{c}")));
                }
                header.push("status".into());
                w.write_record(&header)?;
                for (k, (s, p)) in outcome.samples.iter().enumerate() {
                    let mut fields = vec![fmt_f64(*s)];
                    fields.extend(coord_fields(p));
                    if let Some(dev) = &outcome.developed {
                        let m = &dev[k];
                        fields.push(fmt_f64(m.t));
                        fields.extend(m.x.iter().chain(m.y.iter()).map(|v| fmt_f64(*v)));
                    }
                    fields.push(status(k));
                    w.write_record(&fields)?;
                }
                w.flush()?;
            }
            if let Some(r) = outcome.straight_line_residual {
                writeln!(out, "# straight_line_residual {}", fmt_f64(r))?;
            }
        }
        Format::Json => {
            let mut rows: Vec<Value> = outcome
                .samples
                .iter()
                .enumerate()
                .map(|(k, (s, p))| {
                    let mut obj = json!({"s": s, "t": p.t, "x": p.x, "y": p.y, "status": status(k)});
                    if let Some(dev) = &outcome.developed {
                        let m = &dev[k];
                        obj["dev"] = json!({"t": m.t, "x": m.x.as_slice(), "y": m.y.as_slice()});
                    }
                    obj
                })
                .collect();
            if outcome.developed.is_some() {
                rows.push(json!({"summary": {"straight_line_residual": outcome.straight_line_residual}}));
            }
            write_json(out, &Value::Array(rows))?;
        }
    }
    if let Some(e) = &outcome.develop_error {
        writeln!(err, "error: development failed: {e}")?;
    }
    if let Some(t) = &outcome.truncation {
        writeln!(err, "error: integration {t}")?;
    }
    Ok(if outcome.truncation.is_some() || outcome.develop_error.is_some() { Status::BlowUp } else { Status::Pass })
}
