//! Runs the `bethe` binary: exit codes, error payloads and file output.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_bethe");
const CONFIGS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn json(out: &[u8]) -> serde_json::Value {
    serde_json::from_slice(out).expect("stdout is JSON")
}

#[test]
fn verify_writes_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!("{CONFIGS}/default.toml");
    let paths: Vec<_> = ["a.json", "b.json"].iter().map(|n| dir.path().join(n)).collect();
    for p in &paths {
        let out = run(&["verify", "--config", &config, "--jobs", "2", "--output", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
    let (a, b) = (std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
    assert_eq!(a, b);
    let report = json(&a);
    assert_eq!(report["pass"], true);
    assert!(report["passed"].as_u64().unwrap() >= 30);
    assert_eq!(report["config"]["solver"]["rng_seed"], 7);
}

#[test]
fn scalar_on_reflection_config() {
    let out = run(&["scalar", "--config", &format!("{CONFIGS}/reflection.toml")]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out.stdout);
    let values = report["sections"][0]["values"].as_array().unwrap();
    let det = values.iter().find(|v| v["name"] == "det").unwrap();
    assert!(det["value"]["re"].is_f64() && det["value"]["im"].is_f64());
}

#[test]
fn method_override_and_table_format() {
    let out = run(&["scalar", "--config", &format!("{CONFIGS}/default.toml"), "--methods", "det,hny:3", "--format", "table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("hny:3 vs det"));
    assert!(!text.contains("action"));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // A tolerance far below rounding error makes the cross-method delta fail.
    let config = write(
        dir.path(),
        "c.toml",
        "[model]\nc = 1.0\ntheta = [[0.1, 0.2], [-0.3, 0.1], [0.2, -0.2], [-0.1, -0.3]]\n\n\
         [solver]\nn = 2\nrng_seed = 3\n\n[task]\nmethods = [\"det\", \"sum\"]\ntol = 1e-300\n",
    );
    let out = run(&["scalar", "--config", &config]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out.stdout)["pass"], false);
}

#[test]
fn config_errors_exit_two_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[model]\nc = 1.0\nmode = \"reflection\"\ntheta = [0.0, 0.0]\nxi_minus = 0.3\n[solver]\nn = 1\n", "xi_plus required"),
        ("[model]\nc = 1.0\ntheta = [0.0, 0.0]\nbogus = 1\n[solver]\nn = 1\n", "unknown field"),
        ("[model]\nc = 0.0\ntheta = [0.0, 0.0]\n[solver]\nn = 1\n", "model.c"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let config = write(dir.path(), &format!("{i}.toml"), text);
        let out = run(&["solve", "--config", &config]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        let err = json(&out.stdout);
        assert_eq!(err["error"]["kind"], "config");
        assert!(err["error"]["message"].as_str().unwrap().contains(needle), "{err}");
    }
    let out = run(&["scalar", "--config", &format!("{CONFIGS}/default.toml"), "--methods", "det,nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_two_with_kind() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.toml", "[model]\nc = 1.0\ntheta = [0.0, 0.0]\n[solver]\nn = 1\n[task]\nroot_index = 5\n");
    let out = run(&["solve", "--config", &config]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["scalar", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out.stdout)["error"]["kind"], "invalid_argument");
}
