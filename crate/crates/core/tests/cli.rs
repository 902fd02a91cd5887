use std::path::Path;
use std::process::{Command, Output};

const PLANE: &str = r#"{
  "grid": {"dim": 1, "n": 64, "length": 6.283185307179586},
  "gamma": 2.0,
  "eps_list": [0.2, 0.1, 0.05],
  "initial": {"kind": "plane_wave", "amplitude": [1.0, 0.0], "k": [1.0]},
  "t_end": 0.5,
  "samples": 3,
  "output": {"prefix": "pw"}
}"#;

fn kglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kglab")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_writes_records_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "pw.json", PLANE);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(kglab(&["run", &cfg, "--out-dir", a.to_str().unwrap()]).status.code(), Some(0));
    let out = kglab(&["--threads", "1", "run", &cfg, "--out-dir", b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for eps in ["0.2", "0.1", "0.05"] {
        let name = format!("pw_eps{eps}.csv");
        let x = std::fs::read(a.join(&name)).unwrap();
        assert_eq!(x, std::fs::read(b.join(&name)).unwrap());
        assert!(a.join(format!("pw_eps{eps}.json")).exists());
        assert!(a.join(format!("pw_eps{eps}_H.dat")).exists());
    }

    let csvs: Vec<String> =
        ["0.2", "0.1", "0.05"].iter().map(|e| a.join(format!("pw_eps{e}.csv")).to_str().unwrap().to_string()).collect();
    let mut args = vec!["fit"];
    args.extend(csvs.iter().map(String::as_str));
    args.extend(["--quantity", "n3", "--t", "0.5"]);
    let out = kglab(&args);
    assert_eq!(out.status.code(), Some(0));
    let fit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(fit["slope"].is_f64() && fit["r2"].is_f64());
    assert_eq!(fit["excluded"], 0);
    let out = kglab(&["fit", &csvs[0], "--quantity", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"grid": {"dim": 1}}"#);
    assert_eq!(kglab(&["run", &bad]).status.code(), Some(2));
    let unordered = write(dir.path(), "u.json", &PLANE.replace("[0.2, 0.1, 0.05]", "[0.1, 0.2]"));
    assert_eq!(kglab(&["run", &unordered]).status.code(), Some(2));
    assert_eq!(kglab(&["verify", "bogus"]).status.code(), Some(2));
    assert_eq!(kglab(&["run", "/nonexistent/config.json"]).status.code(), Some(2));
}

#[test]
fn aborted_run_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // eps = 0.01 needs mode 100, beyond the Nyquist limit of 64 points.
    let cfg = write(dir.path(), "pw.json", &PLANE.replace("[0.2, 0.1, 0.05]", "[0.1, 0.01]"));
    let out = kglab(&["run", &cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let csv = std::fs::read_to_string(dir.path().join("pw_eps0.01.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn verify_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = kglab(&["verify", "equivalence", "--seed", "0x2a", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify_equivalence.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 42);
    assert_eq!(report["passed"], true);
}
