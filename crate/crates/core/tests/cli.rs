use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn meandim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meandim"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn build(dir: &TempDir, name: &str, spec: &str) -> PathBuf {
    let spec_path = dir.path().join(format!("{name}.spec.json"));
    let out = dir.path().join(format!("{name}.map.json"));
    fs::write(&spec_path, spec).unwrap();
    let o = meandim(&["build", p(&spec_path), "-o", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn build_phi_and_tent() {
    let dir = TempDir::new().unwrap();
    let phi = build(
        &dir,
        "phi",
        r#"{"construction":"phi_sr","s":1,"r":"1","K":4}"#,
    );
    let art: serde_json::Value = serde_json::from_str(&fs::read_to_string(&phi).unwrap()).unwrap();
    assert!(art["summary"].as_str().unwrap().contains("K=4"));
    // four blocks of 3, 9, 27, 81 legs plus the endpoints
    assert_eq!(
        art["map"]["nodes"].as_array().unwrap().len(),
        3 + 9 + 27 + 81 + 2
    );

    let tent = build(&dir, "tent", r#"{"construction":"tent_g"}"#);
    let art: serde_json::Value = serde_json::from_str(&fs::read_to_string(&tent).unwrap()).unwrap();
    assert_eq!(art["map"]["nodes"].as_array().unwrap().len(), 4);
}

#[test]
fn build_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"construction\": \"phi_sr\",\n  \"s\": 1,, }").unwrap();
    let o = meandim(&["build", p(&bad), "-o", p(&dir.path().join("x.json"))]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    fs::write(&bad, r#"{"construction":"phi_sr","s":1,"r":0.5,"K":4}"#).unwrap();
    let o = meandim(&["build", p(&bad), "-o", p(&dir.path().join("x.json"))]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("refused"));

    // blocks that do not fit in the unit cube
    fs::write(
        &bad,
        r#"{"construction":"cube","m":2,"rule":"quadratic","B":"1","K":3}"#,
    )
    .unwrap();
    let o = meandim(&["build", p(&bad), "-o", p(&dir.path().join("x.json"))]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("does not fit"), "{}", stderr(&o));
}

#[test]
fn verify_passes_and_catches_corruption() {
    let dir = TempDir::new().unwrap();
    let phi = build(
        &dir,
        "phi",
        r#"{"construction":"phi_sr","s":1,"r":"1","K":3}"#,
    );
    let o = meandim(&["verify", p(&phi)]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    let cube = build(
        &dir,
        "cube",
        r#"{"construction":"cube","m":2,"rule":"power","r":"1","B":"1/2","K":2}"#,
    );
    let o = meandim(&["verify", p(&cube)]);
    assert!(o.status.success(), "{}", stdout(&o));

    let text = fs::read_to_string(&phi).unwrap();
    let mut art: serde_json::Value = serde_json::from_str(&text).unwrap();
    art["map"]["values"][1] = serde_json::Value::String("1/2".into());
    let corrupt = dir.path().join("corrupt.json");
    fs::write(&corrupt, serde_json::to_string(&art).unwrap()).unwrap();
    let o = meandim(&["verify", p(&corrupt)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL rebuild"));
}

#[test]
fn estimate_writes_csv_and_summary() {
    let dir = TempDir::new().unwrap();
    let phi = build(
        &dir,
        "phi",
        r#"{"construction":"phi_sr","s":1,"r":"1","K":3}"#,
    );
    let csv = dir.path().join("h.csv");
    let o = meandim(&[
        "estimate",
        p(&phi),
        "--mdim",
        "H",
        "--k-max",
        "1",
        "--n-max",
        "2",
        "--out",
        p(&csv),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "k,n,eps,dim,normalized");
    assert_eq!(rows.len(), 5);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(csv.with_extension("json")).unwrap()).unwrap();
    assert!(summary["lower"].as_f64().unwrap() <= summary["upper"].as_f64().unwrap());
    assert_eq!(summary["stages"].as_array().unwrap().len(), 4);
}

#[test]
fn budget_override_truncates_estimates() {
    let dir = TempDir::new().unwrap();
    let phi = build(
        &dir,
        "phi",
        r#"{"construction":"phi_sr","s":1,"r":"1","K":3}"#,
    );
    let o = Command::new(env!("CARGO_BIN_EXE_meandim"))
        .args(["estimate", p(&phi), "--mdim", "H", "--n-max", "2"])
        .env("MEANDIM_BUDGET", "100")
        .output()
        .unwrap();
    assert!(!o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("k,n,eps,dim,normalized\n0,1,"), "{text}");
    assert!(text.lines().last().unwrap().starts_with("# truncated:"));
}

#[test]
fn detect_predict_splice_cube() {
    let dir = TempDir::new().unwrap();
    let tent = build(&dir, "tent", r#"{"construction":"tent_g"}"#);
    let o = meandim(&[
        "detect",
        p(&tent),
        "--j",
        "0,1",
        "--legs",
        "0,1/3,2/3,1",
        "--eps",
        "1/10",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "refused");
    assert_eq!(v["refusal"]["condition"], "containment");

    let o = meandim(&["predict", "power_law", "1", "1"]);
    assert_eq!(stdout(&o).trim(), "exact=1/2 value=0.500000000000000");
    assert!(!meandim(&["predict", "power_law", "1", "0.5"])
        .status
        .success());

    let out = dir.path().join("spliced.json");
    let o = meandim(&[
        "splice",
        "--p",
        "1/2",
        "--a",
        "1/2",
        "--eps",
        "1/10",
        "-o",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cert: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(cert["delta"], "1/32");
    assert!(meandim(&["verify", p(&out)]).status.success());

    let o = meandim(&["cube", "--m", "2", "--r", "1", "--k-max", "10"]);
    let text = stdout(&o);
    let last: f64 = text
        .lines()
        .last()
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((last - 1.0).abs() < 0.05, "{text}");
}
