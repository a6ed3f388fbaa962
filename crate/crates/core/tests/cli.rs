use std::process::{Command, Output};

use serde_json::Value;

fn datadump(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_datadump"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = datadump(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn second_best_discrimination_example() {
    let v = json(&["second-best", "--sigma-mu-sq", "1", "--cost", "0.04", "--lambda", "0.5", "--format", "json"]);
    let r = &v["result"];
    assert_eq!(r["regime"], "Discrimination");
    assert!((f(&r["db"]["n0"]) - 1.293).abs() < 1e-3);
    assert!((f(&r["db"]["n1"]) - 2.926).abs() < 1e-3);
    assert_eq!(f(&r["menu"]["plan_l"]["q1"]), 0.0);
}

#[test]
fn compare_reports_over_storage() {
    let v = json(&["compare", "--sigma-mu-sq", "2", "--cost", "0.1", "--lambda", "0.5"]);
    assert!(f(&v["result"]["delta_total"]) > 0.0);
}

#[test]
fn composition_reversal_with_either_variance_flag() {
    let by_var = json(&["second-best", "--sigma-mu-sq", "1.44", "--cost", "0.3", "--lambda", "0.27"]);
    let by_sd = json(&["second-best", "--sigma-mu", "1.2", "--cost", "0.3", "--lambda", "0.27"]);
    assert_eq!(by_var["result"]["composition_reversed"], true);
    assert_eq!(by_sd["result"]["composition_reversed"], true);
    let (a, b) = (&by_var["result"]["db"], &by_sd["result"]["db"]);
    assert!((f(&a["n0"]) - f(&b["n0"])).abs() < 1e-9);
}

#[test]
fn json_round_trips_bit_for_bit() {
    let out = datadump(&["compare", "--sigma-mu-sq", "2", "--cost", "0.1", "--lambda", "0.5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed: Value = serde_json::from_str(&text).unwrap();
    let again: Value = serde_json::from_str(&serde_json::to_string_pretty(&parsed).unwrap()).unwrap();
    assert_eq!(parsed, again);
    // The printed n0 reproduces the solver's f64 exactly.
    let p = datadump::ModelParams::new(2.0, 0.1, 0.5).unwrap();
    let sb = datadump::second_best::solve_second_best(&p, false, 1e-9).unwrap();
    assert_eq!(f(&parsed["result"]["sb"]["db"]["n0"]).to_bits(), sb.db.n0.to_bits());
}

#[test]
fn sweep_csv_schema_and_precision() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = datadump(&[
        "--format", "csv", "--output", path.to_str().unwrap(),
        "sweep", "--axis", "lambda", "--from", "0.05", "--to", "0.95", "--steps", "10",
        "--sigma-mu-sq", "1", "--cost", "0.04",
    ]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header.join(","),
        "axis_value,regime,n0_fb,n1_fb,profit_fb,n0_sb,n1_sb,q0_L,q1_L,q0_S,q1_S,p_L,p_S,profit_sb,lambda_star,total_fb,total_sb"
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    let lambdas: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(lambdas.windows(2).all(|w| w[0] < w[1]));
    for cell in rows[3].iter().skip(2) {
        let digits = cell.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count();
        assert!(digits >= 12, "{cell}");
    }
}

#[test]
fn sweep_json_rows_in_input_order() {
    let v = json(&["sweep", "--axis", "cost", "--from", "0.01", "--to", "0.5", "--steps", "5", "--sigma-mu-sq", "1", "--lambda", "0.5"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(f(&rows[0]["axis_value"]), 0.01);
    assert_eq!(f(&rows[4]["axis_value"]), 0.5);
}

#[test]
fn invalid_arguments_exit_2() {
    for args in [
        &["second-best", "--sigma-mu-sq", "-1", "--cost", "0.04", "--lambda", "0.5"][..],
        &["second-best", "--sigma-mu-sq", "1", "--sigma-mu", "1", "--cost", "0.04", "--lambda", "0.5"],
        &["second-best", "--sigma-mu-sq", "1", "--cost", "0.04"],
        &["first-best", "--sigma-mu-sq", "1", "--cost", "0.04", "--lambda", "1.5"],
        &["menu", "--sigma-mu-sq", "1", "--cost", "0.04", "--lambda", "0.5", "--n0", "-1", "--n1", "1"],
        &["beta-second-best", "--r", "0.4", "--s", "0.1", "--p-r", "0.25", "--sigma-sq", "1", "--cost", "0.01"],
        &["no-such-command"],
    ] {
        let out = datadump(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn non_convergence_exits_3() {
    let out = datadump(&["--tol", "1e-300", "first-best", "--sigma-mu-sq", "1", "--cost", "0.04", "--lambda", "0.5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn beta_commands() {
    let v = json(&["beta-second-best", "--r", "0.1", "--s", "0.4", "--p-r", "0.4", "--sigma-sq", "1", "--cost", "0.01"]);
    assert_eq!(v["result"]["regime"], "Exclusion");
    assert!((f(&v["result"]["n_store"]) - (32.8f64.sqrt() - 1.0)).abs() < 1e-9);
    let v = json(&["beta-first-best", "--r", "0.1", "--s", "0.4", "--p-r", "0.25", "--sigma-sq", "1", "--cost", "0.01"]);
    assert!((f(&v["result"]["n_star"]) - (33.5f64.sqrt() - 1.0)).abs() < 1e-9);
}

#[test]
fn curves_and_menu_emit_data() {
    let v = json(&["curves", "--level", "0.5", "--n0-max", "5", "--points", "11", "--sigma-mu-sq", "1", "--cost", "0.04", "--lambda", "0.5"]);
    assert!(v["result"].is_object() || v["result"].is_array());
    let v = json(&["menu", "--n0", "1", "--n1", "1", "--sigma-mu-sq", "1", "--cost", "0.04", "--lambda", "0.5"]);
    assert_eq!(v["result"]["pooled"], false);
}

#[test]
fn output_is_deterministic() {
    let args = ["validate", "--draws", "20000", "--seed", "7", "--format", "json"];
    let (a, b) = (datadump(&args), datadump(&args));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn help_lists_defaults() {
    let out = datadump(&["validate", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("default: 1000000") && text.contains("default: 0"), "{text}");
}
