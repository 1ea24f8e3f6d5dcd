use std::path::Path;
use std::process::{Command, Output};

fn chainsys(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chainsys")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_robot_predicts_sharp_rate() {
    let o = chainsys(&["analyze", "--model", "robot"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["n_phi"], 2);
    assert_eq!(v["result"]["tm"], "Certified");
    assert_eq!(v["result"]["predicted_rate"], "t^{-1/2} sharp");
    assert_eq!(v["config"]["seed"], 0);
}

#[test]
fn analyze_rejects_inadmissible_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"schema":1,"label":"bad","m":2,
            "A0":[[[0,0],[1,0]],[[-1,0],[-1,0]]],
            "A1":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#,
    )
    .unwrap();
    let o = chainsys(&["analyze", "--file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no characteristic function"));
}

#[test]
fn config_errors_exit_two() {
    for args in [
        vec!["simulate", "--model", "robot", "--p", "7"],
        vec!["simulate", "--model", "nope"],
        vec!["simulate", "--model", "robot", "--N", "1..4"],
        vec!["simulate", "--model", "robot", "--tol", "bogus=1"],
        vec!["simulate"],
        vec!["frobnicate"],
    ] {
        assert_eq!(chainsys(&args).status.code(), Some(2), "{args:?}");
    }
}

fn simulate_to(path: &Path) {
    let o = chainsys(&[
        "simulate", "--model", "robot", "--kind", "circulant", "--N", "4..512", "--p", "2", "--t", "1e2:1e4:40",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_then_fit_recovers_half() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    simulate_to(&csv);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# chainsys "));
    assert!(text.lines().any(|l| l == "t,lower,upper,N,p,kind"));
    assert!(text.lines().any(|l| l.ends_with(",sup,2,circulant")));
    let o = chainsys(&["fit", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let alpha = v["result"]["alpha"].as_f64().unwrap();
    assert!((0.45..=0.55).contains(&alpha), "alpha = {alpha}");
}

#[test]
fn identical_config_reproduces_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    simulate_to(&path);
    let first = std::fs::read(&path).unwrap();
    simulate_to(&path);
    assert_eq!(first, std::fs::read(&path).unwrap());
    // mixed norm with random probes, seeded
    let args = ["simulate", "--model", "platoon_pair", "--params", "2,1,1", "--kind", "onesided", "--p", "1", "--N", "8,16", "--t", "1:100:4", "--seed", "7"];
    assert_eq!(stdout(&chainsys(&args)), stdout(&chainsys(&args)));
}

#[test]
fn spectrum_csv_has_tags() {
    let o = chainsys(&["spectrum", "--model", "robot", "--N", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("re,im,tag"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().any(|r| r.ends_with(",a0")));
    assert!(rows.iter().any(|r| r.contains(",omega:")));
    assert_eq!(rows.iter().filter(|r| r.contains(",circulant:N=4:")).count(), 4);
}

#[test]
fn cesaro_difference_is_inverse_n() {
    let o = chainsys(&["cesaro", "--model", "robot", "--p", "1", "--x0", "1;-1", "--tol", "n_max=200"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# class O(1/n)"));
    let row = text.lines().find(|l| l.starts_with("4,")).unwrap();
    assert_eq!(row, "4,5e-1");
}

#[test]
fn laurent_requires_p2() {
    let o = chainsys(&["simulate", "--model", "robot", "--kind", "laurent", "--p", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
