use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_degsample")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Compares against `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {name}"));
    assert_eq!(actual, expected, "output differs from golden file {name}");
}

fn lines(s: &str) -> Vec<String> {
    s.lines().map(str::to_string).collect()
}

/// The path join `R(A,B) ⋈ S(B,C)` over the fixture CSVs, by hand.
fn path_join() -> BTreeSet<String> {
    ["1,x,p", "1,x,q", "1,y,p", "2,x,p", "2,x,q", "3,z,r"].iter().map(|s| s.to_string()).collect()
}

#[test]
fn sample_join_is_deterministic_and_in_the_join() {
    let args = ["--seed", "7", "sample-join", "--spec", &data("path.json"), "--count", "5"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let rows = lines(&a);
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| path_join().contains(r)));
    golden("sample_join_seed7.txt", &a);
}

#[test]
fn parallel_race_samples_join_results() {
    let out = stdout(&["--parallel", "sample-join", "--spec", &data("path.json"), "--count", "20"]);
    assert!(lines(&out).iter().all(|r| path_join().contains(r)));
}

#[test]
fn enumerate_and_permute_match_the_join() {
    let all = stdout(&["enumerate", "--spec", &data("path.json")]);
    assert_eq!(lines(&all).into_iter().collect::<BTreeSet<_>>(), path_join());
    let perm = lines(&stdout(&["--seed", "3", "sample-join", "--spec", &data("path.json"), "--mode", "permute"]));
    assert_eq!(perm.len(), 6);
    assert_eq!(perm.into_iter().collect::<BTreeSet<_>>(), path_join());
}

#[test]
fn estimate_reports_the_output_size() {
    assert_eq!(stdout(&["estimate", "--spec", &data("path.json")]).trim(), "6");
    assert_eq!(stdout(&["sample-join", "--spec", &data("path.json"), "--mode", "estimate"]).trim(), "6");
    let j: serde_json::Value =
        serde_json::from_str(&stdout(&["--format", "json", "estimate", "--spec", &data("path.json")])).unwrap();
    assert_eq!(j["estimate"], 6);
}

#[test]
fn bound_report_for_a_spec() {
    let out = stdout(&["bound", "--spec", &data("path.json")]);
    let j: serde_json::Value = serde_json::from_str(&out).unwrap();
    // ν_A + ν_B ≤ 2, ν_B + ν_C ≤ 2, ν_B ≤ 1, ν_C ≤ 1 has optimum 3.
    assert_eq!(j["log2"]["exact"], serde_json::json!(["3", "1"]));
    assert_eq!(j["polymatroid"]["exact"], serde_json::json!(["3", "1"]));
    assert_eq!(j["acyclic"], true);
    golden("bound_path.json", &out);
}

#[test]
fn bound_for_patterns() {
    let tri = data("triangle.el");
    let j: serde_json::Value =
        serde_json::from_str(&stdout(&["bound", "--pattern", &tri, "--undirected", "--m", "1024", "--lambda", "16"]))
            .unwrap();
    assert_eq!(j["log2"]["exact"], serde_json::json!(["14", "1"]));
    assert_eq!(j["regime"], "m-lambda");
    let j: serde_json::Value =
        serde_json::from_str(&stdout(&["bound", "--pattern", &tri, "--directed", "--m", "1024", "--lambda", "256"]))
            .unwrap();
    assert_eq!(j["log2"]["exact"], serde_json::json!(["15", "1"]));
    assert_eq!(j["route"], "lp-plus");
}

#[test]
fn subgraph_sampling_outputs_occurrences() {
    let out = stdout(&[
        "--seed",
        "5",
        "sample-subgraph",
        "--graph",
        &data("graph.el"),
        "--pattern",
        &data("triangle.el"),
        "--count",
        "10",
    ]);
    // Triangles of the fixture graph: {x,y,z} and {x,z,w}.
    for row in lines(&out) {
        let mut v: Vec<&str> = row.split(',').collect();
        v.sort_unstable();
        assert!(v == ["x", "y", "z"] || v == ["w", "x", "z"], "{row}");
    }
    golden("sample_subgraph_seed5.txt", &out);
    let out = stdout(&[
        "--format",
        "json",
        "sample-subgraph",
        "--graph",
        &data("digraph.el"),
        "--pattern",
        &data("triangle.el"),
        "--directed",
    ]);
    let j: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert!(j["a"].is_string() && j["b"].is_string() && j["c"].is_string());
}

#[test]
fn empty_occurrence_set_prints_empty() {
    let out = run(&["sample-subgraph", "--graph", &data("tree.el"), "--pattern", &data("triangle.el")]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "EMPTY\n");
}

#[test]
fn enumerate_occurrences() {
    let out = stdout(&["enumerate", "--graph", &data("graph.el"), "--pattern", &data("triangle.el")]);
    assert_eq!(lines(&out).len(), 2);
    let out = stdout(&["enumerate", "--graph", &data("digraph.el"), "--pattern", &data("triangle.el"), "--directed"]);
    assert_eq!(lines(&out).len(), 1);
}

#[test]
fn decompose_prints_components_and_rho() {
    let out = stdout(&["decompose", "--pattern", &data("triangle.el")]);
    assert!(out.ends_with("rho* = 3/2\n"));
    golden("decompose_triangle.txt", &out);
    let out = stdout(&["decompose", "--pattern", &data("path2.el")]);
    assert!(out.ends_with("rho* = 2\n"));
}

#[test]
fn gen_is_reproducible_and_readable() {
    let out = stdout(&["gen", "--kind", "clique-union", "--m", "144", "--lambda", "8"]);
    assert!(out.starts_with("# clique-union m=144 lambda=8 k=3 vertices=40 edges=140 certified=true\n"));
    assert_eq!(out.lines().count(), 141);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.el");
    stdout(&["gen", "--kind", "clique-union", "--m", "144", "--lambda", "8", "--out", path.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), out);
    let tri = stdout(&["enumerate", "--graph", path.to_str().unwrap(), "--pattern", &data("triangle.el")]);
    assert_eq!(tri.lines().count(), 5 * 56);
    golden("gen_tripartite.txt", &stdout(&["gen", "--kind", "tripartite", "--m", "256", "--lambda", "16"]));
}

#[test]
fn verify_tightness_suite_passes() {
    let out = stdout(&["verify", "--suite", "tightness"]);
    assert_eq!(out.lines().count(), 2);
    assert!(out.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn bench_reports_fewer_attempts_with_degree_constraints() {
    let out = stdout(&["bench", "--log-m", "10", "--successes", "300"]);
    let rows = lines(&out);
    assert_eq!(rows[0], "instance,sampler,log2_bound,samples_per_sec,attempts_per_success");
    let attempts = |r: &str| r.rsplit(',').next().unwrap().parse::<f64>().unwrap();
    assert!(rows[1].contains("degree-constrained") && rows[2].contains("cardinality-only"));
    assert!(attempts(&rows[2]) >= attempts(&rows[1]));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["sample-join"]).status.code(), Some(2));
    assert_eq!(run(&["bound", "--spec", &data("malformed.json")]).status.code(), Some(2));
    assert_eq!(run(&["bound", "--spec", &data("missing.json")]).status.code(), Some(3));
    assert_eq!(run(&["bound", "--spec", &data("unguarded.json")]).status.code(), Some(4));
    let lambda = ["sample-subgraph", "--graph", &data("graph.el"), "--pattern", &data("triangle.el"), "--lambda", "2"];
    assert_eq!(run(&lambda).status.code(), Some(4));
}

#[test]
fn dump_index_stats_goes_to_stderr() {
    let out = run(&["sample-join", "--spec", &data("path.json"), "--dump-index-stats"]);
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("index: 4 constraints"));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);
}
