use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_putlab");

fn putlab(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn construct_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let rr = dir.path().join("rr.json");
    let o = putlab(&["construct", "wang", "--m", "2", "--n", "1", "--D", "0.25", "--out", path(&rr)]);
    assert_eq!(o.status.code(), Some(0));
    let o = putlab(&["eval", path(&rr), "--dp"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "dp 1.098612288668\n");

    let id = dir.path().join("id.json");
    putlab(&["construct", "identity", "--m", "3", "--out", path(&id)]);
    assert_eq!(stdout(&putlab(&["eval", path(&id), "--dp"])), "dp inf\n");
}

#[test]
fn uniform_mechanism_leaks_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.json");
    putlab(&["construct", "uniform", "--m", "3", "--out", path(&u)]);
    let o = putlab(&[
        "eval",
        path(&u),
        "--dp",
        "--adp",
        "0.1",
        "--max-info",
        "--ml",
        "--rdp",
        "2",
        "--sibson",
        "2",
        "--mi",
        "--prior",
        "0.2,0.3,0.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().all(|l| l.ends_with(" 0.000000000000")), "{text}");
}

#[test]
fn eval_without_prior_names_the_notion() {
    let dir = tempfile::tempdir().unwrap();
    let rr = dir.path().join("rr.json");
    putlab(&["construct", "wang", "--m", "2", "--D", "0.25", "--out", path(&rr)]);
    let o = putlab(&["eval", path(&rr), "--sibson", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sibson(2)"));
}

#[test]
fn parse_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(putlab(&["eval", path(&bad), "--dp"]).status.code(), Some(2));
    assert_eq!(putlab(&["eval", "/nonexistent/q.json", "--dp"]).status.code(), Some(2));
    assert_eq!(putlab(&["nonsense"]).status.code(), Some(2));
    assert_eq!(putlab(&[]).status.code(), Some(2));
    assert_eq!(putlab(&["--help"]).status.code(), Some(0));
}

#[test]
fn construct_optimal_ml_reaches_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.json");
    let o = putlab(&["construct", "optimal-ml", "--prior", "0.4,0.3,0.2,0.1", "--D", "0.2", "--out", path(&q)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(&format!("ml {:.12}", 2.5f64.ln())));
    let o = putlab(&["eval", path(&q), "--ml"]);
    assert_eq!(stdout(&o), format!("ml {:.12}\n", 2.5f64.ln()));
}

#[test]
fn construct_relabels_unsorted_priors() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.json");
    let o = putlab(&["construct", "optimal-ml", "--prior", "0.1,0.3,0.4,0.2", "--D", "0.2", "--out", path(&q)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("expected distortion 0.200000000000"), "{text}");
    assert!(text.contains(&format!("ml {:.12}", 2.5f64.ln())), "{text}");
}

#[test]
fn construct_qdelta_matrix() {
    let o = putlab(&["construct", "qdelta", "--m", "3", "--delta", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let q = putlab::model::Mechanism::from_json(&stdout(&o)).unwrap();
    assert_eq!(q.rows(), vec![vec![1.0, 0.0, 0.0], vec![0.9, 0.1, 0.0], vec![0.9, 0.0, 0.1]]);
}

#[test]
fn construct_range_violations_exit_two() {
    assert_eq!(putlab(&["construct", "wang", "--m", "2", "--D", "1.5"]).status.code(), Some(2));
    assert_eq!(putlab(&["construct", "optimal-ml", "--prior", "0.4,0.3,0.2,0.1", "--D", "0.6"]).status.code(), Some(2));
    assert_eq!(putlab(&["construct", "qdelta", "--m", "3"]).status.code(), Some(2));
}

#[test]
fn curve_csv_shape() {
    let o =
        putlab(&["curve", "--m", "2", "--class1", "--dp", "--ml", "--start", "0.25", "--stop", "0.5", "--points", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let expected = format!(
        "D,notion,lower,upper,exact\n0.250000000000,dp,{0},{0},true\n0.250000000000,ml,{1},{1},true\n\
         0.500000000000,dp,0.000000000000,0.000000000000,true\n0.500000000000,ml,0.000000000000,0.000000000000,true\n",
        format!("{:.12}", 3f64.ln()),
        format!("{:.12}", 1.5f64.ln())
    );
    assert_eq!(stdout(&o), expected);
}

#[test]
fn curve_usage_errors() {
    assert_eq!(putlab(&["curve", "--m", "2", "--class1", "--dp", "--points", "0"]).status.code(), Some(2));
    assert_eq!(
        putlab(&["curve", "--m", "2", "--class1", "--dp", "--start", "0.5", "--stop", "0.2"]).status.code(),
        Some(2)
    );
    assert_eq!(putlab(&["curve", "--m", "2", "--class1"]).status.code(), Some(2));
    assert_eq!(putlab(&["curve", "--dp"]).status.code(), Some(2));
    assert_eq!(putlab(&["curve", "--prior", "0.4,0.3,0.2,0.1", "--class1", "--m", "4", "--dp"]).status.code(), Some(2));
}

#[test]
fn curve_global_and_composed_settings() {
    let o = putlab(&[
        "curve",
        "--setting",
        "global",
        "--m",
        "2",
        "--n",
        "2",
        "--class1",
        "--dp",
        "--start",
        "0.5",
        "--stop",
        "0.5",
        "--points",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().nth(1).unwrap(), format!("0.500000000000,dp,{0:.12},{0:.12},true", 3f64.ln()));
    let o = putlab(&[
        "curve",
        "--setting",
        "composed",
        "--n",
        "3",
        "--prior",
        "0.4,0.3,0.2,0.1",
        "--ml",
        "--start",
        "0.6",
        "--stop",
        "0.6",
        "--points",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o).lines().nth(1).unwrap(),
        format!("0.600000000000,ml,{0:.12},{0:.12},true", 3.0 * 2.5f64.ln())
    );
}

#[test]
fn curve_writes_gnuplot_script() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let gp = dir.path().join("c.gp");
    let o = putlab(&[
        "curve",
        "--m",
        "3",
        "--class1",
        "--dp",
        "--mi",
        "--points",
        "5",
        "--out",
        path(&csv),
        "--gnuplot",
        path(&gp),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let script = std::fs::read_to_string(&gp).unwrap();
    assert!(script.contains("plot ") && script.contains("'mi'") && script.contains(path(&csv)));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 11);
}

#[test]
fn verify_usage_and_restriction() {
    assert_eq!(putlab(&["verify", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(putlab(&["verify", "--only", "bogus"]).status.code(), Some(2));
    let o = putlab(&["verify", "--seed", "1", "--trials", "5", "--only", "ml"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let entries = report["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    assert!(entries.iter().all(|e| e["notion"] == "ml" && e["max_dev"].as_f64().unwrap() < 1e-5));
}

#[test]
fn compose_reports_law_and_realization() {
    let dir = tempfile::tempdir().unwrap();
    let rr = dir.path().join("rr.json");
    putlab(&["construct", "wang", "--m", "2", "--D", "0.25", "--out", path(&rr)]);
    let o = putlab(&["compose", path(&rr), "--n", "3", "--dp", "--ml"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains(&format!("dp law {0:.12} realized {0:.12}", 3f64.ln())), "{text}");
    assert!(text.contains(&format!("ml law {0:.12} realized {0:.12}", 3.0 * 1.5f64.ln())), "{text}");
}

#[test]
fn cap_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let rr = dir.path().join("rr.json");
    putlab(&["construct", "wang", "--m", "2", "--D", "0.25", "--out", path(&rr)]);
    let o = Command::new(BIN).args(["compose", path(&rr), "--n", "3", "--dp"]).env("PUTLAB_CAP", "4").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("realized -"));
    let o = Command::new(BIN)
        .args(["construct", "uniform", "--m", "2", "--n", "3"])
        .env("PUTLAB_CAP", "4")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
