use std::sync::Arc;

use minorbit::config::{Overrides, RunConfig};
use minorbit::lambda::LambdaFamily;
use minorbit::lie::build_named;
use minorbit::orbit::OrbitRing;
use minorbit::report::{Report, Status};
use minorbit::suites::run;

fn config(algebra: &str, suites: &str, max_degree: usize) -> RunConfig {
    Overrides {
        algebra: Some(algebra.into()),
        suites: Some(suites.into()),
        max_degree: Some(max_degree),
        ..Default::default()
    }
    .resolve()
    .unwrap()
}

/// Report lines with timing fields removed.
fn body(r: &Report) -> Vec<serde_json::Value> {
    r.to_jsonl()
        .unwrap()
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            if let Some(o) = v.as_object_mut() {
                o.remove("elapsed_ms");
            }
            v
        })
        .collect()
}

fn cache_outcomes(r: &Report) -> Vec<String> {
    r.checks
        .iter()
        .filter(|c| c.suite == "cache")
        .map(|c| c.witness.as_ref().unwrap()["outcome"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn sl3_full_run_to_degree_three() {
    let r = run(&config("sl3", "all", 3)).unwrap();
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    let s = r.summary();
    assert!(s.pass >= 40, "{s:?}");
    assert!(r.checks.iter().any(|c| c.status == Status::Pass && c.name.contains("associativity")));
}

#[test]
fn same_config_same_report() {
    let c = config("sp4", "lie,scalars,lambda,star", 2);
    assert_eq!(body(&run(&c).unwrap()), body(&run(&c).unwrap()));
}

#[test]
fn second_run_reuses_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config("sl3", "lambda", 2);
    c.cache_dir = Some(dir.path().to_path_buf());
    let first = run(&c).unwrap();
    assert!(cache_outcomes(&first).iter().all(|o| o == "built"));
    let second = run(&c).unwrap();
    let outcomes = cache_outcomes(&second);
    assert_eq!(outcomes.len(), 5);
    assert!(outcomes.iter().all(|o| o == "hit"));
    assert!(second.passed());

    c.seed = 99;
    assert!(cache_outcomes(&run(&c).unwrap()).iter().all(|o| o == "built"));
}

#[test]
fn unwritable_cache_dir_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("file");
    std::fs::write(&file, "").unwrap();
    let mut c = config("sp2", "lambda", 2);
    c.cache_dir = Some(file.join("cache"));
    let r = run(&c).unwrap();
    assert!(r.passed());
    assert!(cache_outcomes(&r)[0].starts_with("memory"));
}

#[test]
fn lambda_does_not_depend_on_the_sampling_seed() {
    let spec = Arc::new(build_named("sl3").unwrap());
    let a = OrbitRing::build(spec.clone(), 2, 1, 1.25).unwrap();
    let b = OrbitRing::build(spec, 2, 2024, 1.5).unwrap();
    let la = LambdaFamily::solve(&a, 2, 1).unwrap();
    let lb = LambdaFamily::solve(&b, 2, 77).unwrap();
    for (x, y) in la.slices.iter().zip(&lb.slices) {
        assert_eq!(x.ops, y.ops);
        assert_eq!(x.nullity, 1);
    }
}

#[test]
fn failures_carry_witnesses_and_the_summary_is_last() {
    let mut r = Report::new(serde_json::json!({}));
    r.check("lie", "x", "y", false, Some(serde_json::json!({"lhs": 1, "rhs": 2})), std::time::Instant::now());
    let text = r.to_jsonl().unwrap();
    let last: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["summary"]["fail"], 1);
    assert!(text.contains("\"rhs\":2"));
}
