use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn crep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_min_all_text() {
    let o = crep(&["solve", "--mode", "min-all", &fixture("birds.kb")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1 0 1\n1 1 0\n");
}

#[test]
fn solve_all_json_with_limit() {
    let o = crep(&["solve", "--mode", "all", "--limit", "2", "--json", &fixture("birds.kb")]);
    assert_eq!(
        stdout(&o),
        "{\"ordering\":\"all\",\"bound\":3,\"solutions\":[[1,0,1],[1,0,2]],\"minimal_sum\":2,\"truncated\":true}\n"
    );
}

#[test]
fn solve_penguins_min() {
    let o = crep(&["solve", "--mode", "min", &fixture("penguins.kb")]);
    assert_eq!(stdout(&o), "1 2 2 1 1\n");
}

#[test]
fn infeasible_and_degenerate_exit_one() {
    let o = crep(&["solve", "--mode", "min-all", &fixture("contradictory.kb")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: infeasible_within_bound"));
    let o = crep(&["solve", "--mode", "pareto", &fixture("degenerate.kb")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate_rule: rule 2"));
}

#[test]
fn parse_errors_exit_two_with_position() {
    let dir = std::env::temp_dir().join(format!("crep-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.kb");
    std::fs::write(&path, "vars: a, b\nrule: (c | a)\n").unwrap();
    let o = crep(&["solve", "--mode", "min", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2, column 8"), "{o:?}");
    assert_eq!(
        crep(&["solve", "--mode", "nope", &fixture("birds.kb")]).status.code(),
        Some(2)
    );
}

#[test]
fn query_reports_ranks() {
    let o = crep(&["query", "--min", "(f | p)", &fixture("penguins.kb")]);
    let text = stdout(&o);
    assert!(text.starts_with("REJECTED\n"));
    assert!(text.contains("kappa(verifying) = 2\nkappa(falsifying) = 1\n"));
    let o = crep(&["query", "--vector", "1,2,2,1,1", "(w | k)", &fixture("penguins.kb")]);
    let text = stdout(&o);
    assert!(text.starts_with("ACCEPTED\n"));
    assert!(text.contains("kappa(verifying) = 0\nkappa(falsifying) = 1\n"));
}

#[test]
fn show_ocf_table() {
    let o = crep(&["show-ocf", "--vector", "1,2,2,1,1", &fixture("penguins.kb")]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 33);
    assert_eq!(lines[1], "p b f w k       2");
    assert_eq!(lines[32], "-p -b -f -w -k  0");
    let o = crep(&["show-ocf", "--vector", "1,2", &fixture("penguins.kb")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_lists_rejected_rules() {
    let o = crep(&["check", "--vector", "1,0,1", &fixture("birds.kb")]);
    assert_eq!((o.status.code(), stdout(&o)), (Some(0), "VALID\n".to_string()));
    let o = crep(&["check", "--vector", "0,0,1", &fixture("birds.kb")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("INVALID\nrule 1 not accepted: (f | b)"));
}

#[test]
fn bench_writes_csv() {
    let o = crep(&["bench", "--n-from", "1", "--n-to", "2"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "kb_name,vars,conditionals,operation,wall_time_s,solutions_found"
    );
    assert!(lines[1].starts_with("\"kb(1,1)\",2,1,min-all,"));
    assert_eq!(lines.len(), 3);
}
