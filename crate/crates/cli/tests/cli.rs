use std::process::{Command, Output};

use mvgamma::oracle::read_batch;
use serde_json::Value;

fn mvgamma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvgamma")).args(args).env_remove("MVGAMMA_THREADS").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = mvgamma(&all);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn temp(name: &str, text: &str) -> String {
    let p = std::env::temp_dir().join(format!("mvgamma-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const TWO_BLOCK: &str = "1,0.3,0.16,0.28;0.3,1,0.192,0.336;0.16,0.192,1,0.28;0.28,0.336,0.28,1";

#[test]
fn maxrho_reports_convergence_and_sufficient_condition() {
    let v = json(&["maxrho", "--theta", "0.5,0.5,0.5", "--d", "0.3,0.3,0.3"]);
    assert_eq!(v["below_one"], true);
    assert_eq!(v["sufficient_condition"], true);
    // All scaled values are 0.15, maximum at the origin: (1 − det Θ̃)².
    let s: f64 = 1.0 - (1.0 - 3.0 * 0.0225 + 2.0 * 0.15f64.powi(3));
    assert!((v["max_rho_sq"].as_f64().unwrap() - s * s).abs() < 1e-15);
    let text = String::from_utf8(mvgamma(&["maxrho", "--theta", "0.5,0.5,0.5", "--d", "0.3,0.3,0.3"]).stdout).unwrap();
    assert!(text.contains("below_one: true"));
}

#[test]
fn bad_diagonal_is_bad_input() {
    let f = temp("bad.txt", "2\n0.9 0.5\n0.5 1\n");
    let o = mvgamma(&["cdf", "--matrix", &f, "--x", "1,1", "--alpha", "1"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not a correlation matrix: diagonal"));
}

#[test]
fn matrix_files_take_comments() {
    let f = temp("ok.txt", "# path correlation\n3\n1 0.5 0.25  # row 1\n0.5 1 0.5\n0.25 0.5 1\n");
    let v = json(&["cdf", "--matrix", &f, "--x", "1,1.5,2", "--alpha", "1"]);
    assert_eq!(v["structure"]["kind"], "tree");
    assert_eq!(v["method"], "tree integration");
}

#[test]
fn cdf_detects_structures_in_order() {
    let one = json(&["cdf", "--inline", "1,0.3,0.2;0.3,1,0.6;0.2,0.6,1", "--x", "1,1.5,2", "--alpha", "1"]);
    assert_eq!(one["structure"]["kind"], "one-factorial");
    let two = json(&["cdf", "--inline", TWO_BLOCK, "--x", "1,1.5,2,1", "--alpha", "1"]);
    assert_eq!(two["structure"]["kind"], "two-block");
    assert_eq!(two["method"], "two-block Laguerre series");
    let three = json(&["cdf", "--inline", TWO_BLOCK, "--x", "1,1.5,2,1", "--alpha", "1", "--structure", "three-block"]);
    assert_eq!(three["structure"]["kind"], "three-block");
    let (a, b) = (two["result"]["value"].as_f64().unwrap(), three["result"]["value"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
}

#[test]
fn marginals_drop_infinite_coordinates() {
    let full = json(&["cdf", "--inline", TWO_BLOCK, "--x", "1,inf,2,1", "--alpha", "1"]);
    assert_eq!(full["marginal"], serde_json::json!([1, 3, 4]));
    let sub = json(&["cdf", "--inline", "1,0.16,0.28;0.16,1,0.28;0.28,0.28,1", "--x", "1,2,1", "--alpha", "1"]);
    assert_eq!(full["result"]["value"], sub["result"]["value"]);
}

#[test]
fn exit_codes() {
    let unstructured = "1,0.3,0.24,0.2;0.3,1,0.2,0.24;0.24,0.2,1,0.48;0.2,0.24,0.48,1";
    assert_eq!(code(&mvgamma(&["cdf", "--inline", unstructured, "--x", "1,1,1,1", "--alpha", "1"])), 1);
    assert_eq!(code(&mvgamma(&["cdf", "--inline", "1,0.5;0.5,1", "--x", "1", "--alpha", "1"])), 1);
    let cut = mvgamma(&["cdf", "--inline", TWO_BLOCK, "--x", "1,1.5,2,1", "--alpha", "1", "--structure", "three-block", "--max-degree", "1"]);
    assert_eq!(code(&cut), 2);
    assert_eq!(code(&mvgamma(&["cdf", "--inline", "1,0.5;0.5,1", "--x", "1,1", "--alpha", "1", "--tol", "2"])), 3);
    assert_eq!(code(&mvgamma(&["frobnicate"])), 3);
    assert_eq!(code(&mvgamma(&["cdf", "--x", "1,1", "--alpha", "1"])), 3);
    assert_eq!(code(&mvgamma(&["--help"])), 0);
}

#[test]
fn help_names_the_formulas() {
    let help = |cmd: &str| String::from_utf8(mvgamma(&[cmd, "--help"]).stdout).unwrap();
    assert!(help("cdf").contains("Laguerre series"));
    assert!(help("cdf").contains("two-factorial integral"));
    assert!(help("excess").contains("power bound"));
    assert!(help("check").contains("three-event"));
    assert!(help("maxrho").contains("sufficient condition"));
}

#[test]
fn counterexample_preset() {
    let args = ["check", "--preset", "three-event-counterexample", "--samples", "1000000", "--seed", "42"];
    let v = json(&args);
    for c in v["orthant"].as_array().unwrap() {
        assert_eq!(c["verdict"], "holds");
    }
    for form in ["cancelling_form", "three_event_sum"] {
        let c = &v[form];
        assert!(c["margin"].as_f64().unwrap().abs() < 1e-4);
        assert!(c["abs_uncertainty"].as_f64().unwrap() > 0.0);
    }
    assert_eq!(v["preset"], "three-event-counterexample");
}

#[test]
fn structured_output_is_reproducible_and_thread_independent() {
    let args = ["sample", "--inline", "1,0.5,0.2;0.5,1,0.4;0.2,0.4,1", "--nu", "3", "--samples", "200000", "--seed", "9", "--x", "2,3,2.5", "--t", "0.1,0.2,0.3", "--format", "json"];
    let run = |threads: &str| Command::new(env!("CARGO_BIN_EXE_mvgamma")).args(args).env("MVGAMMA_THREADS", threads).output().unwrap();
    let a = run("1");
    let b = run("4");
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v["laplace"]["z"].as_f64().unwrap().abs() < 4.0);
    assert_eq!(serde_json::to_string_pretty(&v).unwrap() + "\n", String::from_utf8(a.stdout).unwrap());
    assert_eq!(code(&run("many")), 3);
}

#[test]
fn sample_writes_a_readable_batch() {
    let out = std::env::temp_dir().join(format!("mvgamma-cli-{}-batch.bin", std::process::id()));
    let o = mvgamma(&["sample", "--inline", "1,0.5;0.5,1", "--nu", "2", "--samples", "20000", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let cols = read_batch(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(cols.seed, 3);
    assert_eq!(cols.columns[0].len(), 20000);
}

#[test]
fn fit_and_excess() {
    let f = json(&["fit", "--inline", TWO_BLOCK, "--blocks", "2,2"]);
    assert_eq!(f["theta_within_bound"], true);
    assert!(f["slack"]["max_slack"].as_f64().unwrap() >= 0.0);
    let e = json(&["excess", "--inline", TWO_BLOCK, "--blocks", "2,2", "--x", "1,1.5,2,1", "--alpha", "1"]);
    assert_eq!(e["certificate"]["verdict"], "holds");
    let p = json(&["excess", "--inline", "1,0.3,0.2;0.3,1,0.6;0.2,0.6,1", "--blocks", "1,2", "--x", "1,1.5,2", "--power-b", "2,2,3", "--alpha", "1"]);
    assert_eq!(p["bound"], "power bound");
    assert!(p["certificate"]["margin"].as_f64().unwrap() > 0.0);
}

#[test]
fn mmatrix_reports_signature() {
    let v = json(&["mmatrix", "--inline", "1,-0.5,0.25;-0.5,1,-0.5;0.25,-0.5,1"]);
    assert_eq!(v["inverse_is_m_matrix"], false);
    assert_eq!(v["signature"], serde_json::json!([1, -1, 1]));
}

#[test]
fn verify_suite_passes() {
    let v = json(&["verify", "--samples", "1000000"]);
    assert_eq!(v["all_passed"], true, "{v:#}");
}
