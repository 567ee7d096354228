use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn prodap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prodap")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn construct_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let run = prodap(&["construct", "--n", "50", "--verify", "--out", p(&out)]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let v = json(&out);
    assert_eq!(v["m"], 195);
    assert_eq!(v["witnesses"].as_object().unwrap().len(), 195);
}

#[test]
fn exit_codes_for_bad_input_and_capacity() {
    assert_eq!(code(&prodap(&["construct", "--n", "2"])), 2);
    assert_eq!(code(&prodap(&["pipeline", "--in", "/nonexistent/instance.json"])), 2);
    assert_eq!(code(&prodap(&["construct", "--n", "100000000000"])), 3);
    assert_eq!(code(&prodap(&["convex-demo", "--desc", "1,2"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"field": "integer", "elements": ["1", "1"]}"#).unwrap();
    assert_eq!(code(&prodap(&["find-ap", "--in", p(&bad)])), 2);
}

#[test]
fn graph_cycles_irregular_chain() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.json");
    let run = prodap(&["graph", "--in", &data("theorem2_n100.json"), "--out", p(&graph)]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let cycles = dir.path().join("cy.json");
    assert_eq!(code(&prodap(&["cycles", "--graph", p(&graph), "--k", "3", "--out", p(&cycles)])), 0);
    let v = json(&cycles);
    assert!(!v["audits"].as_array().unwrap().is_empty());
    assert!(v["failures"].as_array().unwrap().is_empty());
    let irr = dir.path().join("ir.json");
    assert_eq!(code(&prodap(&["irregular", "--in", p(&graph), "--out", p(&irr)])), 0);
    assert_eq!(json(&irr)["forest"], true);
}

#[test]
fn descriptor_must_match_the_graph() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.json");
    assert_eq!(code(&prodap(&["graph", "--in", &data("theorem2_n100.json"), "--out", p(&graph)])), 0);
    // the graph carries 1..460, not 2..461
    let ap = dir.path().join("ap.json");
    std::fs::write(&ap, r#"{"D": "1", "r": "2", "d": "1", "L": 460}"#).unwrap();
    let run = prodap(&["cycles", "--graph", p(&graph), "--ap", p(&ap), "--k", "2"]);
    assert_eq!(code(&run), 2);
    assert!(String::from_utf8_lossy(&run.stderr).contains("is not term"));
}

#[test]
fn pipeline_and_instances_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("q.json");
    assert_eq!(code(&prodap(&["instance", "--kind", "quadratic-demo", "--out", p(&inst)])), 0);
    assert_eq!(std::fs::read(&inst).unwrap(), std::fs::read(data("quadratic_demo.json")).unwrap());
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    assert_eq!(code(&prodap(&["pipeline", "--in", p(&inst), "--seed", "1", "--out", p(&a)])), 0);
    assert_eq!(code(&prodap(&["pipeline", "--in", p(&inst), "--seed", "1", "--out", p(&b)])), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(json(&a)["green"], true);
}

#[test]
fn rationalize_then_reduce() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    assert_eq!(code(&prodap(&["rationalize", "--in", &data("quadratic_demo.json"), "--out", p(&out)])), 0);
    let v = json(&out);
    let inst = dir.path().join("rational.json");
    std::fs::write(&inst, serde_json::to_string_pretty(&v["instance"]).unwrap()).unwrap();
    let red = dir.path().join("red.json");
    let run = prodap(&["reduce", "--in", p(&inst), "--out", p(&red)]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    assert!(json(&red)["desc"]["L"].as_u64().unwrap() >= 3);
}

#[test]
fn study_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let args = ["study", "--sizes", "10,20", "--trials", "2", "--seed", "9", "--out", p(&csv)];
    assert_eq!(code(&prodap(&args)), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("generator,n,"));
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 2);
    assert!(dir.path().join("s.csv.meta.json").exists());
    let first = text.clone();
    assert_eq!(code(&prodap(&args)), 0);
    let strip = |t: &str| t.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    // elapsed_ms is the only column allowed to differ
    assert_eq!(strip(&first), strip(&std::fs::read_to_string(&csv).unwrap()));
}

#[test]
fn convex_demo_and_find_ap() {
    let run = prodap(&["convex-demo", "--desc", "2,3,5,10"]);
    assert_eq!(code(&run), 0);
    let v: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(v["expected"], "100");
    let run = prodap(&["find-ap", "--in", &data("theorem2_n100.json"), "--mode", "exact"]);
    assert_eq!(code(&run), 0);
    let v: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert!(v["length"].as_u64().unwrap() >= 460);
}
