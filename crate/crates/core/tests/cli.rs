use std::process::{Command, Output};

use serde_json::Value;

fn qam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qam"))
        .args(args)
        .env("QAM_LOG", "quiet")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let o = qam(args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

const LSE0_2: &str = r#"{"variant":"lse0","dim":2}"#;

#[test]
fn mean_examples() {
    let o = qam(&["mean", "--spec", r#"{"variant":"power","p":0}"#, "--xs", "1,4", "--w", "0.5,0.5"]);
    assert_eq!(stdout(&o), "2.0\n");
    // weights default to uniform
    let o = qam(&["mean", "--spec", r#"{"variant":"power","p":1}"#, "--xs", "1,2,6"]);
    assert_eq!(stdout(&o), "3.0\n");
    let v = json_ok(&["mean", "--spec", r#"{"variant":"lse"}"#, "--xs", "-1,2"]);
    let expected = ((-1f64).exp() * 0.5 + 2f64.exp() * 0.5).ln();
    assert!((num(&v) - expected).abs() < 1e-15);
}

#[test]
fn validation_errors_exit_2_and_name_the_field() {
    let o = qam(&["mean", "--spec", r#"{"variant":"nope"}"#, "--xs", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("qam mean: spec:"), "{}", stderr(&o));

    let o = qam(&["mean", "--spec", r#"{"variant":"power","p":1}"#, "--xs", "1,x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("qam mean: xs:"));

    let o = qam(&["mean", "--spec", r#"{"variant":"power","p":1}"#, "--xs", "1,2", "--w", "0.2,0.2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("qam mean: w:"));

    let o = qam(&["average", "--generator", "/no/such/file.json", "--points", "[[1]]"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("generator: cannot read"));

    assert_eq!(qam(&["frobnicate"]).status.code(), Some(2));

    let o = qam(&["spd-geomean", "--p", "[[1,2],[2,1]]", "--q", "[[1,0],[0,1]]"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("qam spd-geomean: p:"));
}

#[test]
fn non_convergence_exits_3_with_trace() {
    let o = qam(&[
        "barycenter", "--generator", LSE0_2, "--points", "[[0,1],[2,-1],[1,3]]", "--max-iter", "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("no convergence after 1 iterations"));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["converged"], Value::Bool(false));
    assert_eq!(v["residuals"].as_array().unwrap().len(), 2);

    let o = qam(&["spd-geomean", "--p", "[[4,1],[1,3]]", "--q", "[[1,0],[0,2]]", "--max-iter", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("qam spd-geomean: max-iter:"));
}

#[test]
fn barycenter_converges() {
    let v = json_ok(&["barycenter", "--generator", LSE0_2, "--points", "[[0,1],[2,-1],[1,3]]", "--w", "0.2,0.3,0.5"]);
    assert_eq!(v["converged"], Value::Bool(true));
    assert!(num(&v["residual"]) <= 1e-10);
}

#[test]
fn spd_methods_agree() {
    let args = |m| ["spd-geomean", "--p", r#"{"dim":2,"entries":[4,1,1,3]}"#, "--q", "[[1,0.2],[0.2,2]]", "--method", m];
    let a = json_ok(&args("ahm"));
    let c = json_ok(&args("closed"));
    for (x, y) in a["limit"]["entries"].as_array().unwrap().iter().zip(c["limit"]["entries"].as_array().unwrap()) {
        assert!((num(x) - num(y)).abs() < 1e-12);
    }
    assert!(num(&a["final_gap"]) <= 1e-12);
}

#[test]
fn average_centroid_divergence() {
    let quad = r#"{"variant":"quadratic","q":[[1,0],[0,1]],"c":[0,0]}"#;
    let v = json_ok(&["average", "--generator", quad, "--points", "[[0,0],[2,4]]"]);
    assert_eq!(v["mean"], serde_json::json!([1.0, 2.0]));

    let v = json_ok(&["centroid", "--generator", LSE0_2, "--points", "[[0,0],[1,-1]]", "--side", "right"]);
    assert_eq!(v["theta"], serde_json::json!([0.5, -0.5]));

    // B between exp potentials on one axis: e^a − e^b − (a − b) e^b
    let sep = r#"{"variant":"separable","axes":[{"variant":"lse"}]}"#;
    let v = json_ok(&["divergence", "--generator", sep, "--a", "1", "--b", "-0.5"]);
    let expected = 1f64.exp() - (-0.5f64).exp() - 1.5 * (-0.5f64).exp();
    assert!((num(&v["value"]) - expected).abs() < 1e-14);
    let parts = &v["parts"];
    assert!((num(&parts["left"]) + num(&parts["right"]) - num(&parts["inner"]) - expected).abs() < 1e-14);

    let v = json_ok(&["divergence", "--generator", sep, "--kind", "jeffreys", "--a", "1", "--b", "-0.5"]);
    assert!((num(&v["value"]) - 1.5 * (1f64.exp() - (-0.5f64).exp())).abs() < 1e-14);
    assert_eq!(v["parts"], Value::Null);
}

#[test]
fn mixtures_and_jsd() {
    let v = json_ok(&["mix", "--spec", r#"{"variant":"power","p":1}"#, "--densities", "[[0.2,0.8],[0.6,0.4]]"]);
    let d: Vec<f64> = v["density"].as_array().unwrap().iter().map(num).collect();
    assert!((d[0] - 0.4).abs() < 1e-15 && (d[1] - 0.6).abs() < 1e-15);
    assert_eq!(num(&v["normalizer"]), 1.0);

    let v = json_ok(&["jsd", "--p", "1,0", "--q", "0,1"]);
    assert!((num(&v["value"]) - std::f64::consts::LN_2).abs() < 1e-15);
    assert!((num(&v["entropy_form"]) - std::f64::consts::LN_2).abs() < 1e-15);

    let v = json_ok(&["jsd", "--p", "0.3,0.7", "--q", "0.6,0.4", "--g-spec", r#"{"variant":"power","p":1}"#]);
    assert_eq!(v["nonnegativity_guaranteed"], Value::Bool(true));
    let plain = json_ok(&["jsd", "--p", "0.3,0.7", "--q", "0.6,0.4"]);
    assert!((num(&v["value"]) - num(&plain["value"])).abs() < 1e-15);

    let v = json_ok(&["jsd", "--p", "0.3,0.7", "--q", "0.6,0.4", "--alpha", "-1", "--beta", "0.5"]);
    assert!((num(&v["value"]) - num(&plain["value"])).abs() < 1e-15);
}

#[test]
fn csv_outputs() {
    let o = qam(&["simplex-geodesic", "--alpha", "-1", "--p", "0.5,0.5", "--q", "0.1,0.9", "--samples", "4"]);
    assert_eq!(
        stdout(&o),
        "t,p1,p2\n0.0,0.5,0.5\n0.25,0.40000000000000002,0.59999999999999998\n0.5,0.29999999999999999,0.69999999999999996\n0.75,0.20000000000000001,0.80000000000000004\n1.0,0.10000000000000001,0.90000000000000002\n"
    );

    let o = qam(&["geodesic", "--generator", r#"{"variant":"quadratic","q":[[1]],"c":[0]}"#, "--p", "0", "--q", "1", "--samples", "2"]);
    assert_eq!(stdout(&o), "t,theta1,eta1\n0.0,0.0,0.0\n0.5,0.5,0.5\n1.0,1.0,1.0\n");

    let o = qam(&["--format", "csv", "mix", "--spec", r#"{"variant":"power","p":1}"#, "--densities", "[[0.25,0.75],[0.75,0.25]]"]);
    assert_eq!(stdout(&o), "key,value\ndensity.0,0.5\ndensity.1,0.5\nnormalizer,1.0\n");
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("qam-cli-{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let o = qam(&["--output", p, "mean", "--spec", r#"{"variant":"power","p":-1}"#, "--xs", "2,6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "3.0\n");
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn check_reports_are_machine_readable() {
    let v = json_ok(&["check", "invariance"]);
    assert_eq!(v["suite"], "invariance");
    assert_eq!(v["passed"], Value::Bool(true));
    for item in v["checks"].as_array().unwrap() {
        assert!(item["measured"].is_number() && item["threshold"].is_number());
    }
}
