//! End-to-end acceptance: runs the `verify` suite on the shipped default
//! config and prints one PASS/FAIL line per criterion.

use std::time::Instant;

use bethe::cli::{execute, parse_config, Command, ExecOptions, Report, Section};

const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.toml");

/// (criterion, description, report section, runtime budget in seconds)
const CRITERIA: [(u32, &str, &str, f64); 7] = [
    (1, "algebra: RTT, reflection equations, vacuum, commutativity < 1e-11", "algebra", 10.0),
    (2, "single action: literal operators vs expansion coefficients < 1e-10", "single action", 10.0),
    (3, "symmetrized forms: hny(m) = det = residue sum < 1e-9, sum rule < 1e-10, n <= 4", "symmetrized forms", 30.0),
    (4, "multiple action coefficient = determinant < 1e-8 (periodic n <= 3, reflection n <= 2)", "multiple action", 60.0),
    (5, "oracle: ratio independent of u, equals lambda2(x), orthogonality", "oracle", 60.0),
    (6, "norm: stable coinciding limit, consistent with oracle self-pairing", "norm", 20.0),
    (7, "solver: root -c/2 at N=2, root count = highest-weight count at N=4", "solver", 30.0),
];

fn section<'a>(report: &'a Report, name: &str) -> Option<&'a Section> {
    report.sections.iter().find(|s| s.name == name)
}

#[test]
fn acceptance() {
    let cfg = parse_config(DEFAULT_CONFIG).expect("default config parses");
    let start = Instant::now();
    let first = execute(&cfg, Command::Verify, &ExecOptions::default()).expect("verify runs");
    let elapsed = start.elapsed().as_secs_f64();

    let mut failures = Vec::new();
    for (id, what, name, budget) in CRITERIA {
        // The whole suite is timed; it must fit each criterion's own budget.
        let (ok, detail) = match section(&first, name) {
            Some(s) if s.comparisons.is_empty() => (false, "no checks ran".to_string()),
            Some(s) => {
                let failed: Vec<_> = s.comparisons.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
                let worst = s.comparisons.iter().map(|c| c.rel_err / c.tol).fold(0.0, f64::max);
                let timing = elapsed < budget;
                let detail = format!(
                    "{} checks, worst err/tol {worst:.1e}, suite {elapsed:.2}s (budget {budget}s){}",
                    s.comparisons.len(),
                    if failed.is_empty() { String::new() } else { format!(", failed: {}", failed.join("; ")) }
                );
                (failed.is_empty() && timing, detail)
            }
            None => (false, format!("section `{name}` missing")),
        };
        println!("criterion {id}: {} — {what} ({detail})", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures.push(id);
        }
    }

    let second = execute(&cfg, Command::Verify, &ExecOptions::default()).expect("verify runs");
    let identical = first.to_json() == second.to_json();
    println!(
        "criterion 8: {} — determinism: two verify runs give byte-identical reports ({} bytes)",
        if identical { "PASS" } else { "FAIL" },
        first.to_json().len()
    );
    if !identical {
        failures.push(8);
    }

    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
