use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyclecover"))
        .args(args)
        .env_remove("CYCLECOVER_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn quintic_four_point_bound() {
    let v = json(&["bound", "-m", "5", "-a", "1,1,1,2", "-c", "4", "--json"]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "bound");
    assert_eq!(v["outputs"]["B"], 2);
    assert_eq!(v["outputs"]["genus"], 4);
    assert_eq!(v["outputs"]["ordinary"], false);
    assert!(v.get("timing_ms").is_none());
}

#[test]
fn prime_instead_of_class() {
    let v = json(&["bound", "-m", "5", "-a", "1,1,1,2", "-p", "19", "--json"]);
    assert_eq!(v["outputs"]["class"]["c"], 4);
    assert_eq!(
        run(&["bound", "-m", "5", "-a", "1,1,1,2", "-p", "21"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn quintic_four_point_certify() {
    let v = json(&["certify", "-m", "5", "-a", "1,1,1,2", "-c", "4", "--json"]);
    assert_eq!(
        v["outputs"]["kind"]["verdict"],
        "CertifiedNoGoodDegeneration"
    );
    assert_eq!(v["outputs"]["splits"].as_array().unwrap().len(), 3);
    let text = run(&["certify", "-m", "5", "-a", "1,1,1,2", "-c", "4"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("verdict: CertifiedNo"));
}

#[test]
fn exit_codes() {
    let out = run(&["bound", "-m", "6", "-a", "2,4", "-c", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("disconnected"));
    assert_eq!(
        run(&["bound", "-m", "5", "-a", "1,1"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["bound", "-m", "5", "-a", "1,1,1,2", "-c", "5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["search", "-m", "9", "-r", "6", "--budget", "10"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["prank", "-m", "5", "-a", "1,1,1,2", "-p", "101", "--budget", "100"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn budget_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_cyclecover"))
        .args(["search", "-m", "7", "-r", "4", "-c", "2"])
        .env("CYCLECOVER_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_has_one_row_per_orbit() {
    let out = run(&["bound", "-m", "5", "-a", "1,1,1,2", "-c", "4", "--csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "type,c,orbit,size,min_dim,B,genus,ordinary");
    assert_eq!(lines.len(), 3);
}

#[test]
fn search_is_byte_identical() {
    let args = ["search", "-m", "7", "-r", "4", "-c", "2", "--json"];
    let a = run(&args);
    let b = run(&[
        "--workers",
        "1",
        "search",
        "-m",
        "7",
        "-r",
        "4",
        "-c",
        "2",
        "--json",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&["search", "-m", "5", "-r", "4", "-c", "4", "--json"]);
    let hits = v["outputs"]["hits"].as_array().unwrap();
    assert!(hits
        .iter()
        .any(|h| h["type"]["a"] == serde_json::json!([1, 1, 1, 2])));
    let v = json(&["search", "-m", "5", "-r", "4", "-c", "1", "--json"]);
    assert!(v["outputs"]["hits"].as_array().unwrap().is_empty());
}

#[test]
fn sampled_prank_is_reproducible() {
    let args = [
        "prank", "-m", "5", "-a", "1,1,1,2", "-p", "11", "--seed", "9", "--json",
    ];
    let a = run(&args);
    assert_eq!(a.stdout, run(&args).stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 9);
    assert_eq!(v["outputs"]["strategy"], "count");
    let fixed = json(&[
        "prank", "-m", "3", "-a", "1,1,1", "-p", "7", "--points", "0,1,2", "--json",
    ]);
    assert_eq!(fixed["outputs"]["sigma"], 1);
    assert!(fixed.get("seed").is_none());
}

#[test]
fn checkpoint_resume_matches_fresh_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("search.jsonl");
    let p = path.to_str().unwrap();
    let args = [
        "search", "--m-min", "5", "--m-max", "7", "-r", "4", "--json",
    ];
    let fresh = run(&args);
    let mut with = args.to_vec();
    with.extend(["--checkpoint", p]);
    let first = run(&with);
    let resumed = run(&with);
    assert_eq!(fresh.stdout, first.stdout);
    assert_eq!(fresh.stdout, resumed.stdout);
    let lines = std::fs::read_to_string(&path).unwrap();
    assert_eq!(lines.lines().count(), 4);
    for line in lines.lines() {
        let rec: Value = serde_json::from_str(line).unwrap();
        assert_eq!(rec["schema_version"], 1);
    }
    let other = run(&["search", "-m", "5", "-r", "4", "--checkpoint", p]);
    assert_eq!(other.status.code(), Some(1));
}

#[test]
fn timing_is_opt_in() {
    let v = json(&[
        "genus",
        "-m",
        "31",
        "-a",
        "1,2,4,8,16",
        "--json",
        "--timing",
    ]);
    assert_eq!(v["outputs"]["genus"], 45);
    assert!(v["timing_ms"].is_u64());
}

#[test]
fn families_and_verification() {
    let v = json(&["family", "mersenne", "-f", "5", "--json"]);
    let verdicts = v["outputs"]["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 4);
    assert!(verdicts
        .iter()
        .all(|x| x["verdict"]["kind"]["verdict"] == "CertifiedNoGoodDegeneration"));
    let v = json(&["family", "power", "-m", "11", "--alpha", "3", "--json"]);
    assert_eq!(v["outputs"]["verdicts"].as_array().unwrap().len(), 4);
    let v = json(&["verify", "combilem", "-f", "7", "--json"]);
    assert_eq!(v["outputs"]["checked"], v["outputs"]["passed"]);
    let v = json(&["verify", "boundlem", "-f", "7", "--json"]);
    assert!(v["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["B"] == 315 && r["genus"] == 315));
    let v = json(&[
        "verify",
        "invariants",
        "--m-max",
        "8",
        "--r-max",
        "4",
        "--json",
    ]);
    assert!(v["outputs"]["types"].as_u64().unwrap() > 0);
    let v = json(&["verify", "baddeg", "-f", "5", "--s1", "0,1", "--json"]);
    assert_eq!(v["outputs"]["d_s"], 22);
}

#[test]
fn compare_reports_bound() {
    let v = json(&[
        "compare", "-m", "5", "-a", "1,1,3", "-p", "19", "-e", "2", "--points", "0,1,2", "--json",
    ]);
    assert_eq!(v["outputs"]["sigma"], 0);
    assert_eq!(v["outputs"]["B"], 0);
    assert_eq!(v["outputs"]["consistent"], true);
}
