use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_grassmann-gauge"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn build(name: &str, extra: &[&str]) -> Output {
    let path = config(name);
    let mut args = vec!["gauge", "build", "--config", path.to_str().unwrap(), "--format", "json"];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn qk_spectrum() {
    let out = run(&["forms", "spectrum", "--group", "qk", "--m", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema_version"], "grassmann-gauge/spectrum/1");
    let mut got: Vec<(u64, String)> = v["forms"][0]["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            (
                e["multiplicity"].as_u64().unwrap(),
                format!("{:.9}", e["ratio"].as_f64().unwrap()),
            )
        })
        .collect();
    got.sort();
    assert_eq!(
        got,
        vec![
            (3, "-1.666666667".to_string()),
            (10, "1.000000000".to_string()),
            (15, "-0.333333333".to_string())
        ]
    );
}

#[test]
fn g2_dims() {
    let out = run(&["forms", "spectrum", "--group", "g2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[ok] multiplicities [7, 14]"), "{text}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["forms", "spectrum", "--group", "qk", "--m", "0"]).status.code(), Some(2));
    assert_eq!(run(&["forms", "spectrum", "--group", "qk"]).status.code(), Some(2));
    assert_eq!(run(&["forms", "spectrum", "--group", "e8"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "all", "--only", "13"]).status.code(), Some(2));
    let out = run(&["gauge", "build", "--config", "/nonexistent.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn worked_example() {
    let out = build("worked_halfflat.toml", &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema_version"], "grassmann-gauge/report/1");
    assert_eq!(v["C_e_A"][0]["label"], "C^1,1");
    assert_eq!(v["C_e_A"][0]["value"], "[[0, x[1,2]], [0, 0]]");
    assert_eq!(v["C_e_A"][1]["value"], "[[0, -x[1,1]], [0, 0]]");
    assert_eq!(v["phi_steps"], 1);
    let a_pp = v["prepotential"].as_str().unwrap();
    assert_eq!(v["A_mm"].as_str().unwrap(), a_pp.replace("u[+,", "u[-,"));
    assert_eq!(v["verdicts"]["half_flat"], true);
    assert_eq!(v["verdicts"]["ym_zero"], true);
    assert_eq!(v["passed"], true);
}

#[test]
fn wrong_charge_is_rejected() {
    let out = build("wrong_charge.toml", &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("charge check failed: ∂₀A₊₊ ≠ 2A₊₊"), "{err}");
}

#[test]
fn spin3_configs() {
    let out = build("spin3_1partial.toml", &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdicts"]["ym_zero"], true);
    assert_eq!(v["verdicts"]["f2_zero"], true);
    let out = build("spin3_0partial.toml", &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdicts"]["f0_zero"], true);
    let out = build("spin3_0partial.toml", &["--mode", "1partial"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mode_and_degree_overrides() {
    let out = build("worked_halfflat.toml", &["--mode", "diagonal"]);
    assert_eq!(out.status.code(), Some(2));
    let path = config("rank3_halfflat.toml");
    let out = bin()
        .args(["gauge", "build", "--config", path.to_str().unwrap()])
        .env("GG_MAX_DEGREE", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bin()
        .args(["gauge", "build", "--config", path.to_str().unwrap()])
        .env("GG_MAX_DEGREE", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn text_and_json_verdicts_agree() {
    let path = config("series.toml");
    let text = run(&["gauge", "build", "--config", path.to_str().unwrap()]);
    let v = json(&build("series.toml", &[]));
    let t = String::from_utf8(text.stdout).unwrap();
    assert_eq!(v["truncation_order"], 3);
    assert!(t.contains("series truncated at order 3"));
    for c in v["checks"].as_array().unwrap() {
        let mark = if c["passed"].as_bool().unwrap() { "ok" } else { "FAIL" };
        assert!(t.contains(&format!("[{mark}] {}", c["name"].as_str().unwrap())));
    }
}

#[test]
fn report_written_to_file() {
    let dir = std::env::temp_dir().join(format!("gg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let target = dir.join("report.json");
    let out = build("worked_halfflat.toml", &["--output", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(written, json(&out));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_subset_json() {
    let out = run(&["verify", "all", "--only", "2,4,12", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema_version"], "grassmann-gauge/verify/1");
    assert_eq!(v["passed_count"], 3);
    let ids: Vec<u64> = v["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![2, 4, 12]);
}

#[test]
fn verify_catches_eps_sign_fault() {
    let out = run(&["verify", "all", "--only", "8,12", "--eps", "0,1,1,0"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[ 8] FAIL worked half-flat example"), "{text}");
    assert!(text.contains("[12] FAIL negative controls"), "{text}");
}
