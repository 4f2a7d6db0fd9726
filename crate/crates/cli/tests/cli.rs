use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gpiverify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpiverify"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn run_to_file(args: &[&str], path: &Path) -> (i32, String) {
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    full.extend(["--out", p]);
    let out = gpiverify(&full);
    (out.status.code().unwrap(), fs::read_to_string(path).unwrap_or_default())
}

#[test]
fn sos_verify_all_lists_seven_verified_certificates() {
    let out = gpiverify(&["sos", "verify", "--all"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema"], 1);
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 7);
    assert!(checks.iter().all(|c| c["status"] == "verified"));
    assert_eq!(r["summary"]["pass"], 7);
    assert!(r["timing"].is_null());
}

#[test]
fn sos_verify_with_brackets() {
    let out = gpiverify(&["sos", "verify", "--m2", "4", "--bracket"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["checks"][1]["check"], "bracket_positivity");
    assert_eq!(r["checks"][1]["subject"]["scale"], "1/315");
}

#[test]
fn mri_violation_search_for_1_1() {
    let out = gpiverify(&["check", "mri", "--m2", "1", "--m3", "1", "--find-violation"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["checks"][0]["status"], "verified");
    assert_eq!(r["checks"][0]["witnesses"][0]["at"], "x=1");
}

#[test]
fn g_compare_reference_reports_scalar() {
    let out = gpiverify(&["expand", "g", "--compare-reference"]);
    assert_eq!(out.status.code(), Some(0));
    let subject = &report(&out)["checks"][0]["subject"];
    assert_eq!(subject["scalar"], "960751264112640000");
    assert_eq!(subject["reference_constant_term"], "148260632637820250986905600");
    assert!(subject["reference_min_coefficient"].as_str().unwrap().parse::<u128>().unwrap() > 0);
}

#[test]
fn failing_check_exits_1_and_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let (code, text) = run_to_file(&["check", "mri", "--m2", "1", "--m3", "1", "--x", "1"], &path);
    assert_eq!(code, 1);
    let r: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(r["summary"]["fail"], 1);
    assert_eq!(r["checks"][0]["subject"]["lhs"], "5/9");
}

#[test]
fn indeterminate_exits_2_and_still_writes_report() {
    // A coarse enclosure with no refinement cannot resolve G near its sign change.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let args = [
        "scan", "g_negative", "--m2", "1", "--m3", "1", "--z-lo", "1/10", "--z-hi", "3/20", "--grid", "3",
        "--width", "1", "--refine-max", "0",
    ];
    let (code, text) = run_to_file(&args, &path);
    assert_eq!(code, 2);
    let r: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(r["summary"]["indeterminate"], 1);
    assert_eq!(r["checks"][0]["subject"]["indeterminate"], "3");
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        &["check", "gpi"][..],
        &["check", "bogus"],
        &["scan", "nope", "--m2", "1", "--m3", "1"],
        &["params", "show", "--m2", "0", "--m3", "1"],
        &["expand", "h", "--m2", "9"],
        &["check", "gpi", "--m2", "1", "--m3", "1", "--x", "one"],
        &["check", "hfri", "--m2", "1", "--m3", "1", "--z", "1"],
        &[],
    ] {
        let out = gpiverify(args);
        assert_eq!(out.status.code(), Some(64), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(gpiverify(&["--help"]).status.code(), Some(0));
    assert_eq!(gpiverify(&["check", "--help"]).status.code(), Some(0));
    assert_eq!(gpiverify(&["--version"]).status.code(), Some(0));
}

#[test]
fn io_errors_exit_74() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let m = missing.to_str().unwrap();
    let bad_out = dir.path().join("no/such/dir/r.json");
    assert_eq!(gpiverify(&["sos", "verify", "--file", m]).status.code(), Some(74));
    assert_eq!(gpiverify(&["params", "show", "--config", m]).status.code(), Some(74));
    let out = gpiverify(&["params", "show", "--m2", "1", "--m3", "1", "--out", bad_out.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(74));
}

#[test]
fn certificate_file_with_mismatch_reports_residual() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    fs::write(
        &path,
        r#"{"ring":["b"],"target":{"vars":["b"],"terms":[{"c":"1","e":[2]},{"c":"1","e":[0]}]},
            "squares":[{"lambda":"1","poly":{"vars":["b"],"terms":[{"c":"1","e":[1]}]}}]}"#,
    )
    .unwrap();
    let out = gpiverify(&["sos", "verify", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["checks"][0]["status"], "residual_nonzero");
    assert_eq!(r["checks"][0]["residual"]["terms"][0]["c"], "1");
}

#[test]
fn reports_are_byte_identical_across_runs_and_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["scan", "g_negative", "--m2", "8", "--m3", "8", "--grid", "21"],
        &["check", "hfri", "--m2", "3", "--m3", "3", "--grid", "21"],
        &["sos", "verify", "--all", "--bracket"],
        &["oracle", "compare", "--y2", "1", "--y3", "1", "--samples", "200000"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let mut outputs = Vec::new();
        for jobs in ["1", "4", "4"] {
            let path = dir.path().join(format!("r{i}_{}.json", outputs.len()));
            let mut full = args.to_vec();
            full.extend(["--jobs", jobs]);
            let (code, text) = run_to_file(&full, &path);
            assert_eq!(code, 0, "{args:?}");
            outputs.push(text);
        }
        assert_eq!(outputs[0], outputs[1], "{args:?}");
        assert_eq!(outputs[1], outputs[2], "{args:?}");
    }
}

#[test]
fn config_file_supplies_parameters_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"m2": 1, "m3": 5, "width": "1/1000"}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let r = report(&gpiverify(&["params", "show", "--config", c]));
    assert_eq!(r["run"]["m3"], 5);
    assert_eq!(r["run"]["width"], "1/1000");
    assert_eq!(r["checks"][0]["subject"]["r"], "34");
    let r = report(&gpiverify(&["params", "show", "--config", c, "--m3", "6"]));
    assert_eq!(r["run"]["m3"], 6);
    fs::write(&cfg, r#"{"m2": 1, "unknown": true}"#).unwrap();
    assert_eq!(gpiverify(&["params", "show", "--config", c]).status.code(), Some(64));
}

#[test]
fn run_config_is_embedded_with_defaults() {
    let r = report(&gpiverify(&["scan", "h_seventh", "--m2", "8", "--m3", "12"]));
    let run = &r["run"];
    assert_eq!(run["command"], serde_json::json!(["scan", "h_seventh"]));
    assert_eq!(run["grid"], 51);
    assert_eq!(run["width"], "1/1000000");
    assert_eq!(run["refine_max"], 20);
    assert!(run.get("jobs").is_none());
    assert_eq!(r["checks"][0]["status"], "holds");
}

#[test]
fn timing_is_opt_in() {
    let r = report(&gpiverify(&["params", "show", "--m2", "1", "--m3", "1", "--timing"]));
    assert!(r["timing"]["elapsed_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn real_violation_search() {
    let out = gpiverify(&["check", "gpi-real", "--y2", "4", "--y3", "4.3", "--find-violation"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["checks"][0]["status"], "verified");
}
