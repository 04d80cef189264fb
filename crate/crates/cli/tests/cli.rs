use std::process::{Command, Output};

fn minorbit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minorbit"))
        .args(args)
        .env_remove("MINORBIT_CACHE_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_sp2_moyal_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.jsonl");
    let o = minorbit(&["verify", "--algebra", "sp2", "--suites", "moyal", "--max-degree", "6", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(report).unwrap();
    assert!(text.contains("C_2 on quadratic generators"));
    assert!(text.lines().last().unwrap().contains("\"summary\""));
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(minorbit(&["verify", "--algebra", "sl3", "--suites", "bogus"]).status.code(), Some(2));
    assert_eq!(minorbit(&["verify", "--algebra", "g2"]).status.code(), Some(2));
    assert_eq!(minorbit(&["verify", "--max-degree", "0"]).status.code(), Some(2));
    assert_eq!(minorbit(&["verify", "--config", "/nonexistent/run.conf"]).status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "algebra = sp2\nsuites = scalars\nmax_degree = 9\n").unwrap();
    let o = minorbit(&["constants", "--config", conf.to_str().unwrap(), "--max-degree", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn constants_rows() {
    let o = minorbit(&["constants", "--algebra", "sl3", "--max-degree", "2"]);
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert!(rows[0].starts_with("p,"));
    assert_eq!(rows[1], "0,1,0,0,-1/8,,0,0,1");
    let p1: Vec<&str> = rows[2].split(',').collect();
    assert_eq!((p1[3], p1[4], p1[5], p1[8]), ("3/2", "-1/24", "-3/16", "3/16"));

    let sp2 = stdout(&minorbit(&["constants", "--algebra", "sp2", "--max-degree", "2", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&sp2).unwrap();
    assert_eq!(v[2]["zeta_p"], "-3/4");
    assert_eq!(v[2]["norm_muY_p"], "3/32");

    let sl4 = stdout(&minorbit(&["constants", "--algebra", "sl4", "--max-degree", "6"]));
    let so6 = stdout(&minorbit(&["constants", "--algebra", "so6", "--max-degree", "6"]));
    assert_eq!(sl4, so6);
}

#[test]
fn gram_and_kernel_exports() {
    let o = minorbit(&["gram", "--algebra", "sp2", "--max-degree", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("degree,index,pivot\n0,0,1\n"));
    assert_eq!(out.lines().count(), 1 + 1 + 3 + 5);

    let o = minorbit(&["kernel", "--algebra", "sl3", "--max-degree", "2", "--pairs", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["exact_failures"].as_array().unwrap().len(), 0);
}

#[test]
fn cache_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = minorbit(&["cache", "build", "--algebra", "sp2", "--max-degree", "2", "--cache-dir", d]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().all(|l| l.starts_with("built")));
    let listed = stdout(&minorbit(&["cache", "list", "--cache-dir", d]));
    assert_eq!(listed.lines().count(), 5);
    let o = minorbit(&["verify", "--algebra", "sp2", "--max-degree", "2", "--suites", "lambda", "--cache-dir", d, "--report", &format!("{d}/r.jsonl")]);
    assert_eq!(o.status.code(), Some(0));
    let report = std::fs::read_to_string(format!("{d}/r.jsonl")).unwrap();
    assert!(report.contains("\"cached\":true"));
    assert!(stdout(&minorbit(&["cache", "clear", "--cache-dir", d])).contains("removed 5"));
    assert_eq!(minorbit(&["cache", "build", "--algebra", "sp2"]).status.code(), Some(2));
}
