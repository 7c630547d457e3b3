use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;

fn spantree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spantree"))
        .args(args)
        .env_remove("SPANTREE_MEMORY_BUDGET")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is a JSON report")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn first_marked_run_succeeds() {
    let o = spantree(&["run", "--problem", "first-marked", "--n", "4", "--epsilon", "0.05"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["runs"].as_array().unwrap().len(), 16);
    assert!(r["summary"]["min_success"].as_f64().unwrap() >= 0.96);
    assert_eq!(r["summary"]["all_correct"], true);
    for key in ["parameters", "witness", "kernel"] {
        assert!(r[key].is_object(), "{key}");
    }
    assert!(r["runs"][0]["counts"]["queries"].as_u64().unwrap() > 0);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let args = ["run", "--problem", "bipartite", "--n", "4", "--seed", "3", "--edge-probability", "0.5"];
    let a = spantree(&args);
    let b = spantree(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("\"epsilon\": 5.0000000000000003e-2"));
}

#[test]
fn bfs_from_a_graph_file_lists_the_forest() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "p3.txt", "3 2\n1 2\n2 3\n");
    let o = spantree(&["run", "--problem", "bfs", "--graph", &g]);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&o)["post_process"], serde_json::json!({ "edges": [[1, 2], [2, 3]] }));

    let m = write(dir.path(), "k3.txt", "3\n011\n101\n110\n");
    let o = spantree(&["run", "--problem", "bipartite", "--graph", &m]);
    assert_eq!(report(&o)["post_process"], serde_json::json!({ "flag": false }));
}

#[test]
fn errors_have_distinct_exit_codes() {
    let o = spantree(&["run", "--problem", "first-marked", "--n", "4", "--epsilon", "0.5"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ε"));

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "3 1\n1 7\n");
    assert_eq!(code(&spantree(&["run", "--problem", "bfs", "--graph", &bad])), 2);

    let o = spantree(&["run", "--problem", "bfs", "--n", "3", "--budget", "100"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));

    let o = Command::new(env!("CARGO_BIN_EXE_spantree"))
        .args(["run", "--problem", "first-marked", "--n", "3"])
        .env("SPANTREE_MEMORY_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(code(&o), 4);

    let missing = dir.path().join("missing.txt");
    assert_eq!(code(&spantree(&["run", "--problem", "bfs", "--graph", missing.to_str().unwrap()])), 5);
    let o = spantree(&["run", "--problem", "first-marked", "--n", "3", "--input", "0120"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn config_files_in_toml_and_json() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c4.txt", "4 4\n1 2\n2 3\n3 4\n4 1\n");
    let out = dir.path().join("report.json");
    let toml = write(
        dir.path(),
        "run.toml",
        &format!("problem = \"cycle\"\ngraph = \"c4.txt\"\nepsilon = 0.1\noutput = {:?}\n", out.to_str().unwrap()),
    );
    let o = spantree(&["run", "--config", &toml]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["post_process"], serde_json::json!({ "flag": true }));
    assert_eq!(r["parameters"]["epsilon"].as_f64(), Some(0.1));

    let json = write(dir.path(), "run.json", r#"{"problem": "first-marked", "n": 3, "epsilon": 0.1}"#);
    let o = spantree(&["run", "--config", &json, "--epsilon", "0.05"]);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&o)["parameters"]["epsilon"].as_f64(), Some(0.05));

    let typo = write(dir.path(), "typo.json", r#"{"problm": "bfs"}"#);
    assert_eq!(code(&spantree(&["run", "--config", &typo])), 2);
}

#[test]
fn quick_verification_passes_in_under_a_minute() {
    let start = Instant::now();
    let o = spantree(&["verify", "--quick"]);
    assert!(start.elapsed() < Duration::from_secs(60));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let table = String::from_utf8(o.stdout).unwrap();
    for suite in ["span-program", "kernel", "reflection", "spectral", "frontend"] {
        assert!(table.contains(suite), "{suite}");
    }
    assert!(!table.contains("FAIL"));
}

#[test]
fn corrupted_matrix_fails_the_kernel_suite() {
    let o = spantree(&["verify", "--quick", "--corrupt"]);
    assert_ne!(code(&o), 0);
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.lines().any(|l| l.starts_with("kernel") && l.contains("FAIL")));
    assert!(table.lines().filter(|l| l.starts_with("frontend")).all(|l| l.contains("pass")));
}

#[test]
fn tree_and_matrix_dumps() {
    let o = spantree(&["tree", "--problem", "first-marked", "--n", "3"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("tree n=3 l=2 m=4"));

    let o = spantree(&["matrix", "--problem", "first-marked", "--n", "3"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().count() > 10);
    assert_eq!(code(&spantree(&["matrix", "--problem", "cycle", "--n", "3", "--epsilon", "0.9"])), 3);
}
