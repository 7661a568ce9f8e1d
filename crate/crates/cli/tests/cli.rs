use std::path::PathBuf;
use std::process::{Command, Output};

fn systems_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../systems")
}

fn system(name: &str) -> String {
    systems_dir().join(format!("{name}.json")).to_string_lossy().into_owned()
}

fn galilean(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_galilean")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Rows of a CSV output, skipping the header and comment lines.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn field(row: &[String], i: usize) -> f64 {
    row[i].parse().unwrap()
}

#[test]
fn check_free_particle_is_exact() {
    let o = galilean(&["check", &system("free_particle")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("residual,max_abs,tol,status\n"));
    for row in rows(&out).iter().filter(|r| r[3] != "info") {
        assert!(field(row, 1) <= 1e-14, "{row:?}");
        assert_eq!(row[3], "pass");
    }
}

#[test]
fn check_passes_with_appendix() {
    for name in ["harmonic_oscillator", "pendulum_drag", "normalized_planar"] {
        let o = galilean(&["check", &system(name), "--appendix", "--points", "20"]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        let out = stdout(&o);
        assert!(out.contains("\ntorsion_formula,"), "{out}");
        assert!(out.contains("\nhorizontal_torsion,"), "{out}");
    }
}

#[test]
fn asymmetric_qsym_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"n": 2, "gamma": ["0", "0"], "Qsym": [[["0","0"],["0","0"]], [["0","x1"],["0","0"]]]}"#)
        .unwrap();
    let o = galilean(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("symmetry violation at (2,1,2)"), "{}", stderr(&o));
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_expr = dir.path().join("expr.json");
    std::fs::write(&bad_expr, r#"{"n": 1, "gamma": ["x1 +"]}"#).unwrap();
    assert_eq!(galilean(&["check", bad_expr.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(galilean(&["check", "/nonexistent/system.json"]).status.code(), Some(2));
    assert_eq!(galilean(&["invariants", &system("free_particle")]).status.code(), Some(2));
    assert_eq!(galilean(&["invariants", &system("free_particle"), "--at", "x=[1,2]"]).status.code(), Some(2));
    assert_eq!(galilean(&["bogus"]).status.code(), Some(2));
}

#[test]
fn invariants_csv() {
    let o = galilean(&["invariants", &system("nonlinear_damping"), "--at", "t=0,x=[2],y=[1]", "--at", "x=[0.3]"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("t,x1,y1,D[1][1],Q[1][1][1],P[1][1],T[1][1][1],status\n"), "{out}");
    let rows = rows(&out);
    assert_eq!(rows.len(), 2);
    assert!((field(&rows[0], 5) - 0.5).abs() <= 1e-8);
    // P = x²/4 − y/2
    assert!((field(&rows[1], 5) - 0.0225).abs() <= 1e-12);
    assert_eq!(rows[0][7], "ok");
}

#[test]
fn invariants_oscillator_grid() {
    let o = galilean(&["invariants", &system("harmonic_oscillator"), "--grid", "-1:1:3"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = rows(&stdout(&o));
    assert_eq!(rows.len(), 27);
    for row in &rows {
        assert!((field(row, 5) + 1.0).abs() <= 1e-9, "{row:?}");
        assert_eq!(field(row, 3), 0.0);
    }
}

#[test]
fn invariants_json_matches_csv() {
    let args = ["invariants", &system("normalized_coupled"), "--at", "t=0.1,x=[0.2,-0.3],y=[0.4,0.5]"];
    let csv = galilean(&args);
    let json = galilean(&[&args[..], &["--format", "json"]].concat());
    assert_eq!(json.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    let entry = &value[0];
    let header: Vec<String> = stdout(&csv).lines().next().unwrap().split(',').map(str::to_owned).collect();
    let row = &rows(&stdout(&csv))[0];
    for (name, cell) in header.iter().zip(row) {
        let Some(rest) = name.strip_prefix(|c| c == 'D' || c == 'Q' || c == 'P' || c == 'T') else { continue };
        let key = &name[..1];
        let idx: Vec<usize> =
            rest.trim_matches(|c| c == '[' || c == ']').split("][").map(|s| s.parse::<usize>().unwrap() - 1).collect();
        let mut v = &entry[key];
        for i in idx {
            v = &v[i];
        }
        let (a, b) = (v.as_f64().unwrap(), cell.parse::<f64>().unwrap());
        assert!((a - b).abs() <= 1e-15 * (1.0 + b.abs()), "{name}: {a} vs {b}");
    }
}

#[test]
fn free_particle_geodesic_is_linear() {
    let o = galilean(&["geodesic", &system("free_particle"), "--init", "y=[1]", "--end", "1", "--step", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = rows(&stdout(&o));
    assert_eq!(rows.len(), 101);
    for row in &rows {
        assert!((field(row, 2) - field(row, 0)).abs() <= 1e-12, "{row:?}");
    }
}

#[test]
fn oscillator_quarter_period() {
    let o = galilean(&[
        "geodesic",
        &system("harmonic_oscillator"),
        "--init",
        "y=[1]",
        "--end",
        &std::f64::consts::FRAC_PI_2.to_string(),
        "--develop",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows = rows(&out);
    let last = rows.last().unwrap();
    assert!((field(last, 2) - 1.0).abs() <= 1e-6, "{last:?}");
    let residual: f64 = out.lines().last().unwrap().strip_prefix("# straight_line_residual ").unwrap().parse().unwrap();
    assert!(residual <= 1e-5);
}

#[test]
fn blow_up_exits_three() {
    let o = galilean(&["geodesic", &system("quadratic_drag"), "--init", "y=[-2]", "--end", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert!(out.lines().last().unwrap().contains("truncated"), "{out}");
    assert!(!stderr(&o).is_empty());
}

#[test]
fn geodesic_json() {
    let o = galilean(&[
        "geodesic",
        &system("coupled_oscillators"),
        "--init",
        "x=[0.1,0.2],y=[0,1]",
        "--end",
        "0.1",
        "--step",
        "0.01",
        "--develop",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let items = value.as_array().unwrap();
    assert_eq!(items.len(), 12);
    assert_eq!(items[0]["dev"]["t"], 0.0);
    assert!(items[11]["summary"]["straight_line_residual"].as_f64().unwrap() <= 1e-5);
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["check", "PATH", "--points", "30", "--seed", "7", "--appendix"],
        vec!["geodesic", "PATH", "--init", "x=[0.1],y=[0.2]", "--end", "0.5", "--develop"],
    ] {
        let path = system("pendulum_drag");
        let args: Vec<&str> = args.iter().map(|a| if *a == "PATH" { path.as_str() } else { a }).collect();
        assert_eq!(galilean(&args).stdout, galilean(&args).stdout);
    }
}
