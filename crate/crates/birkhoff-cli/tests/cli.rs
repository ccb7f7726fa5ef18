use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn birkhoff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_birkhoff")).args(args).env("BIRKHOFF_THREADS", "1").output().unwrap()
}

fn cfg(name: &str) -> String {
    configs().join(name).to_str().unwrap().to_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn malformed_json_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"type\":\"constant\"").unwrap();
    let out = dir.path().join("s.csv");
    let o = birkhoff(&["spectrum", "--potential", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!out.exists());

    let o = birkhoff(&["estimates", "--family", &cfg("family-quick.json"), "--theorems", "b-est,nope", "--out", "x.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn low_n_max_is_raised_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = birkhoff(&["spectrum", "--potential", &cfg("constant.json"), "--nmax", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("raised to 6"), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("n,lambda_minus,lambda_plus,lambda_dot,tau,gamma,collapsed"));
    // 2·6 + 1 rows plus the header
    assert_eq!(text.lines().count(), 14);
    let zero = text.lines().find(|l| l.starts_with("0,")).unwrap();
    let fields: Vec<&str> = zero.split(',').collect();
    assert!((fields[1].parse::<f64>().unwrap() + 0.5).abs() < 1e-10);
    assert!((fields[5].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = birkhoff(&[
            "actions",
            "--potential",
            &cfg("trigonometric.json"),
            "--nmax",
            "12",
            "--method",
            "both",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn discriminant_grid_and_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = birkhoff(&["discriminant", "--potential", &cfg("constant.json"), "--grid", &cfg("grid.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 + 101);
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert!((first[2] - 2.0 * 0.5f64.cosh()).abs() < 1e-9);

    let grid = dir.path().join("far.json");
    std::fs::write(&grid, r#"{"points":[[1e9,0]]}"#).unwrap();
    let o = birkhoff(&["discriminant", "--potential", &cfg("constant.json"), "--grid", grid.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let diag: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(diag["kind"], "lambda-cap");
    assert_eq!(diag["subcommand"], "discriminant");
}

#[test]
fn hierarchy_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.json");
    let o = birkhoff(&["hierarchy", "--potential", &cfg("constant.json"), "--kmax", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["1"]["re"], 0.25);
    assert_eq!(v["3"]["re"], 0.0625);
}

#[test]
fn ls_check_and_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ls.csv");
    let o = birkhoff(&[
        "ls-check",
        "--potential",
        &cfg("constant.json"),
        "--n",
        "4..6",
        "--weight",
        &cfg("weight-sobolev.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(",pass,")).count(), 3);

    let out = dir.path().join("report.json");
    let o = birkhoff(&["estimates", "--family", &cfg("family-quick.json"), "--theorems", "b-est,act-west", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let reports = v.as_array().unwrap();
    // b-est: 3 values of m × 2 directions; act-west: 2 weights × 2 directions
    assert_eq!(reports.len(), 10);
    for r in reports {
        assert_eq!(r["perPotential"].as_array().unwrap().len(), 4);
        assert!(r["empiricalConstant"].as_f64().unwrap().is_finite());
        assert_eq!(r["passed"], true);
    }
}

#[test]
fn quick_verification_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let o = birkhoff(&["verify-all", "--config", &cfg("verify-quick.json"), "--out", out.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.contains(" PASS ")).count(), 10);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 10);
}
