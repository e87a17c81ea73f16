use std::path::Path;
use std::process::{Command, Output};

fn csp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csp"))
        .args(args)
        .env_remove("CSP_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn solve_wheel_seven() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "wheel7.json");
    assert_eq!(csp(&["gen", "wheel", "--n", "7", "-o", &file]).status.code(), Some(0));
    let out = csp(&["solve", &file]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("value: Ended(-5)"), "{text}");
    assert!(text.lines().any(|l| l == "RESULT value=Ended(-5)"));
}

#[test]
fn solve_writes_a_policy() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "w.json");
    let pol = path(dir.path(), "w.policy.json");
    csp(&["gen", "wheel", "--n", "3", "-o", &file]);
    assert_eq!(csp(&["solve", &file, "--policy", &pol]).status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&pol).unwrap()).unwrap();
    assert!(!rows.as_array().unwrap().is_empty());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "w.json");
    // even wheel and missing arguments are usage errors
    assert_eq!(csp(&["gen", "wheel", "--n", "4", "-o", &file]).status.code(), Some(2));
    assert_eq!(csp(&[]).status.code(), Some(2));
    assert_eq!(csp(&["solve", "/no/such/file.json"]).status.code(), Some(2));
    csp(&["gen", "wheel", "--n", "9", "-o", &file]);
    assert_eq!(csp(&["solve", &file, "--budget", "5"]).status.code(), Some(3));
    let env = Command::new(env!("CARGO_BIN_EXE_csp"))
        .args(["solve", &file])
        .env("CSP_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(3));
}

#[test]
fn greedy_match_on_a_star() {
    let dir = tempfile::tempdir().unwrap();
    let file = path(dir.path(), "s.json");
    assert_eq!(csp(&["gen", "star", "--rays", "1:1/1:1", "-o", &file]).status.code(), Some(0));
    let out = csp(&["match", &file, "--i", "greedy", "--ii", "greedy"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("RESULT outcome=Ended(0)"), "{}", stdout(&out));
    let out = csp(&["match", &file, "--i", "stolen:optimal", "--ii", "optimal"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(csp(&["match", &file, "--i", "nonsense", "--ii", "greedy"]).status.code(), Some(2));
}

#[test]
fn reduce_with_audit() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "f.q3cnf");
    std::fs::write(&f, "p q3cnf 1 1\nq e\n1 -1 1 0\n").unwrap();
    let out_file = path(dir.path(), "f.json");
    let out = csp(&["reduce", &f, "-o", &out_file, "--audit"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("padded: n=1 m=1 -> n=4 m=3"), "{text}");
    assert!(text.contains("vertex_count_closed_form") && text.contains("delta=66"), "{text}");
    assert!(text.contains("RESULT audit=pass"));
    let labels = std::fs::read_to_string(format!("{out_file}.labels")).unwrap();
    assert!(labels.lines().any(|l| l.ends_with(" v_I main")), "{labels}");
    std::fs::write(&f, "p q3cnf 2 1\nq e e\n1 2 0\n").unwrap();
    assert_eq!(csp(&["reduce", &f, "-o", &out_file]).status.code(), Some(2));
}

#[test]
fn small_verify_runs() {
    for suite in ["tree-margin", "bipartite-no-loss", "star-greedy", "reduction-audit"] {
        let out = csp(&["verify", "--suite", suite, "--max-n", "5", "--samples", "5", "--sequential"]);
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains("RESULT status=pass"));
    }
    assert_eq!(csp(&["verify", "--suite", "bogus"]).status.code(), Some(2));
}

#[test]
fn catalog_status_matches_library() {
    let missing = !csp_core::catalog::catalog_gaps().is_empty();
    let dir = tempfile::tempdir().unwrap();
    let out = csp(&["gen", "catalog", "-o", &dir.path().to_string_lossy()]);
    assert_eq!(out.status.code(), Some(if missing { 1 } else { 0 }));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let rows = manifest.as_array().unwrap();
    assert!(rows.iter().any(|r| r["name"] == "wheel-5" && r["status"] == "verified"));
    assert!(dir.path().join("zugzwang.json").exists());
    let out = csp(&["verify", "--suite", "catalog"]);
    assert_eq!(out.status.code(), Some(if missing { 1 } else { 0 }));
}
