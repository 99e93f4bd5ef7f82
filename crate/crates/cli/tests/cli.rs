use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropgraph")).args(args).env_remove("TROPGRAPH_MAX_ITERS").output().unwrap()
}

fn run_ok(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let doc =
        serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (out.status.code().unwrap(), doc)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn f(name: &str) -> String {
    fixture(name).display().to_string()
}

fn rat(v: &Value) -> (i64, i64) {
    let s = v.as_str().unwrap();
    match s.split_once('/') {
        Some((p, q)) => (p.parse().unwrap(), q.parse().unwrap()),
        None => (s.parse().unwrap(), 1),
    }
}

#[test]
fn zero_x_is_independent_with_bounds_around_half() {
    let (code, doc) = run_ok(&["indep", &f("zero_x.bundle.json"), "--emit-cert", "--emit-points"]);
    assert_eq!(code, 0);
    assert_eq!(doc["verdict"], "independent");
    let (lo, hi) = (rat(&doc["rho_bounds"][0]), rat(&doc["rho_bounds"][1]));
    assert!(lo.0 * 2 <= lo.1 && hi.0 * 2 >= hi.1, "{lo:?} {hi:?}");
    assert_eq!(doc["permutation"]["unique"], true);
}

#[test]
fn separate_graph_and_function_files() {
    let (code, doc) = run_ok(&["indep", "--graph", &f("unit.json"), &f("zero.json"), &f("x.json")]);
    assert_eq!((code, doc["verdict"].as_str()), (0, Some("independent")));
}

#[test]
fn dependent_family_reports_coefficients() {
    let (code, doc) = run_ok(&["indep", &f("dependent.bundle.json")]);
    assert_eq!(code, 0);
    assert_eq!(doc["verdict"], "dependent");
    assert_eq!(doc["coefficients"]["x"], "-1/2");
}

#[test]
fn single_function_is_an_input_error() {
    let out = run(&["indep", &f("single.bundle.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("at least 2"));
}

#[test]
fn malformed_input_reports_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"graph\": \"unit.json\",\n \"generators\": [}").unwrap();
    let out = run(&["indep", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn ranks() {
    let (code, doc) = run_ok(&["rank", &f("zero_x.bundle.json")]);
    assert_eq!((code, doc["rank"].as_u64()), (0, Some(2)));
    let (_, doc) = run_ok(&["rank", &f("single.bundle.json")]);
    assert_eq!(doc["rank"], 1);
    let (_, doc) = run_ok(&["rank", &f("three_slopes.bundle.json")]);
    let lower = doc["rank"].as_u64().or(doc["lower"].as_u64()).unwrap();
    assert!(lower >= 3);
}

#[test]
fn game_subcommands() {
    let (code, doc) = run_ok(&["game", "solve", &f("self_loop.game.json")]);
    assert_eq!((code, doc["verdict"].as_str()), (0, Some("positive")));
    let (code, doc) = run_ok(&["game", "verify", &f("zero_x.game.json"), &f("zero_x.eigenpair.json")]);
    assert_eq!((code, doc["valid"].as_bool()), (0, Some(true)));
    let (_, doc) = run_ok(&["game", "oracle", &f("zero_x.game.json")]);
    assert_eq!(doc["mean_payoffs"]["1"], "1/2");
    let out = run(&["game", "oracle", &f("oversized.game.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cap"));
}

#[test]
fn unresolved_exits_with_two_and_honours_the_iteration_variable() {
    let out = Command::new(env!("CARGO_BIN_EXE_tropgraph"))
        .args(["game", "solve", &f("mixed.game.json")])
        .env("TROPGRAPH_MAX_ITERS", "300")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["verdict"], "unresolved");
    assert_eq!(doc["iterations"], 300);
    assert_eq!((doc["lower"].as_str(), doc["upper"].as_str()), (Some("-1"), Some("1")));
}

#[test]
fn emitted_certificates_verify() {
    let dir = tempfile::tempdir().unwrap();
    for bundle in ["zero_x.bundle.json", "dependent.bundle.json"] {
        let game = dir.path().join("game.json");
        let (_, doc) = run_ok(&["indep", &f(bundle), "--emit-cert", "--emit-game", game.to_str().unwrap()]);
        let cert = dir.path().join("cert.json");
        std::fs::write(&cert, doc["certificate"].to_string()).unwrap();
        let (code, check) = run_ok(&["game", "verify", game.to_str().unwrap(), cert.to_str().unwrap()]);
        assert_eq!((code, check["valid"].as_bool()), (0, Some(true)), "{bundle}");
    }
}

#[test]
fn matrix_gadget_writes_k2_files() {
    let dir = tempfile::tempdir().unwrap();
    let (code, doc) = run_ok(&["gadget", "matrix", &f("matrix2.json"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!((code, doc["generators"].as_u64()), (0, Some(2)));
    let inst: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("instance.json")).unwrap()).unwrap();
    assert_eq!(inst["graph"]["vertices"], serde_json::json!(["v1", "v2"]));
    assert_eq!(inst["provenance"]["w_{1,2}"], "e1,2@1");
    let (_, rank) = run_ok(&["rank", dir.path().join("instance.json").to_str().unwrap()]);
    assert_eq!(rank["rank"], 2);
}

#[test]
fn infeasible_system_gives_an_independent_completion() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let (code, doc) = run_ok(&["gadget", "csp", &f("infeasible.csp.json"), "--complete", "--decide", "--out", out_dir]);
    assert_eq!(code, 0);
    assert_eq!(doc["feasibility"]["verdict"], "infeasible");
    let inst: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("instance.json")).unwrap()).unwrap();
    assert_eq!(inst["provenance"]["E_{1,2,3}"], "E1,2,3");
    let (code, verdict) = run_ok(&["indep", dir.path().join("completed.json").to_str().unwrap()]);
    assert_eq!((code, verdict["verdict"].as_str()), (0, Some("independent")));
}

#[test]
fn positive_cycle_is_rejected() {
    let out = run(&["gadget", "csp", &f("positive_cycle.csp.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("> 0"));
}

#[test]
fn eval_and_divisor() {
    let (_, doc) = run_ok(&["eval", "--graph", &f("unit.json"), "--function", &f("tent.json"), "e@1/4", "v"]);
    assert_eq!(doc["values"]["e@1/4"], "1/4");
    assert_eq!(doc["values"]["v"], "0");
    let (_, doc) =
        run_ok(&["divisor", "--graph", &f("unit.json"), "--function", &f("x.json"), "--check", &f("u.divisor.json")]);
    assert_eq!(doc["divisor"], serde_json::json!({"u": -1, "v": 1}));
    assert_eq!(doc["degree"], 0);
    assert_eq!(doc["in_riemann_roch"], true);
    let (_, doc) = run_ok(&["divisor", "--graph", &f("unit.json"), "--function", &f("zero.json")]);
    assert_eq!(doc["divisor"], serde_json::json!({}));
}

#[test]
fn plot_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("f.svg");
    run_ok(&["eval", "--graph", &f("unit.json"), "--function", &f("tent.json"), "u", "--plot", svg.to_str().unwrap()]);
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("polyline"));
}

#[test]
fn seeded_generation_is_reproducible() {
    let a = run(&["gen", "family", "--seed", "7", "--kind", "independent"]);
    let b = run(&["gen", "family", "--seed", "7", "--kind", "independent"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, run(&["gen", "family", "--seed", "8", "--kind", "independent"]).stdout);
}

#[test]
fn outputs_match_golden_files_byte_for_byte() {
    let cases: [(&[&str], &str); 5] = [
        (&["indep", &f("zero_x.bundle.json"), "--emit-cert", "--emit-points"], "indep_zero_x.json"),
        (&["rank", &f("three_slopes.bundle.json")], "rank_three_slopes.json"),
        (&["gadget", "matrix", &f("matrix2.json")], "gadget_matrix2.json"),
        (&["divisor", "--graph", &f("unit.json"), "--function", &f("tent.json")], "divisor_tent.json"),
        (&["game", "solve", &f("self_loop.game.json")], "game_self_loop.json"),
    ];
    for (args, name) in cases {
        let first = run(args).stdout;
        assert_eq!(first, run(args).stdout, "{name} not deterministic");
        assert_eq!(String::from_utf8(first).unwrap(), golden(name), "{name}");
    }
}
