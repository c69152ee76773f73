use std::path::PathBuf;
use std::process::{Command, Output};

use causal_id::estimand::{estimands_equal_numerically, parse_estimand};
use causal_id::graph::parse_graph;
use causal_id::identify::{id_algorithm, IdentifyResult, Query};
use causal_id::oracle::{Cardinalities, ScmJoints};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_causal-id")).args(args).output().unwrap();
    let code = out.status.code().unwrap();
    assert!([0, 1, 3].contains(&code), "unexpected exit code {code} for {args:?}");
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn temp_graph(name: &str, text: &str) -> String {
    let path = std::env::temp_dir().join(format!("causal-id-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn identify(graph: &str, treatment: &str, outcome: &str, extra: &[&str]) -> Output {
    let g = fixture(graph);
    let mut args = vec!["identify", "--graph", &g, "--treatment", treatment, "--outcome", outcome];
    args.extend(extra);
    run(&args)
}

#[test]
fn identify_adjustment_graph() {
    let out = identify("fig1b.g", "A", "Y", &[]);
    assert_eq!(code(&out), 0);
    let g = parse_graph(&std::fs::read_to_string(fixture("fig1b.g")).unwrap()).unwrap().into_admg();
    let emitted = parse_estimand(stdout(&out).trim(), g.names()).unwrap();
    let adjustment = parse_estimand("sum_{c} p(Y | a, c) p(c)", g.names()).unwrap();
    let sampler = ScmJoints::new(g.canonical_dag(), Cardinalities::default());
    assert!(estimands_equal_numerically(&emitted, &adjustment, &sampler, 100, 0).unwrap());
}

#[test]
fn identify_bow_reports_hedge() {
    let out = identify("bow.g", "A", "Y", &[]);
    assert_eq!(code(&out), 3);
    assert_eq!(stdout(&out), "not identifiable\nhedge: inner {Y} outer {A, Y}\n");
    let out = identify("bow.g", "A", "Y", &["--format", "json"]);
    assert_eq!(
        json(&out),
        serde_json::json!({"identifiable": false, "hedge": {"inner": ["Y"], "outer": ["A", "Y"]}})
    );
}

#[test]
fn identify_instrument_graph_adds_diagnostic() {
    let out = identify("fig1c.g", "A", "Y", &[]);
    assert_eq!(code(&out), 3);
    assert_eq!(stderr(&out), "not identifiable; graph contains instrument candidate Z\n");
    assert!(stderr(&identify("bow.g", "A", "Y", &[])).is_empty());
}

#[test]
fn identify_json_round_trips() {
    for (graph, t, o) in [("fig2.g", "B,D", "Y"), ("fig1d.g", "A", "Y"), ("fig1b.g", "A=a0", "Y")] {
        let out = identify(graph, t, o, &["--format", "json"]);
        assert_eq!(code(&out), 0);
        let doc = json(&out);
        assert_eq!(doc["identifiable"], true);
        assert!(doc.get("hedge").is_none());
        let g = parse_graph(&std::fs::read_to_string(fixture(graph)).unwrap()).unwrap().into_admg();
        let q = Query {
            treatments: t.split(',').map(|s| causal_id::identify::Treatment::parse(s).unwrap()).collect(),
            outcomes: vec![o.to_string()],
        };
        let IdentifyResult::Estimand(expected) = id_algorithm(&g, &q).unwrap() else { panic!() };
        let parsed = parse_estimand(doc["estimand"].as_str().unwrap(), g.names()).unwrap();
        assert_eq!(parsed, expected);
    }
}

#[test]
fn identify_output_is_byte_identical_across_runs() {
    for format in ["text", "json"] {
        let a = identify("fig2.g", "B,D", "Y", &["--format", format]);
        let b = identify("fig2.g", "B,D", "Y", &["--format", format]);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn input_errors_exit_one() {
    let bad = temp_graph("syntax.g", "A -> Y\nA => Y\n");
    let out = run(&["identify", "--graph", &bad, "--treatment", "A", "--outcome", "Y"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("line 2, column"), "{}", stderr(&out));

    let cyclic = temp_graph("cycle.g", "A -> B\nB -> A\n");
    assert_eq!(code(&run(&["districts", "--graph", &cyclic])), 1);

    assert_eq!(code(&identify("fig1b.g", "Q", "Y", &[])), 1);
    assert_eq!(code(&identify("fig1b.g", "A", "A", &[])), 1);
    assert_eq!(code(&identify("missing.g", "A", "Y", &[])), 1);

    let undeclared = temp_graph("strict.g", "node A\nA -> Y\n");
    let out = run(&["districts", "--graph", &undeclared, "--strict"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("line 2"));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["identify"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    let g = fixture("fig1b.g");
    for bad in [["--trials", "0"], ["--tol", "0"], ["--tol", "-1"]] {
        let mut args = vec!["verify", "--graph", &g, "--treatment", "A", "--outcome", "Y"];
        args.extend(bad);
        assert_eq!(code(&run(&args)), 1);
    }
    let help = run(&["verify", "--help"]);
    assert_eq!(code(&help), 0);
    let text = stdout(&help);
    for default in ["[default: 100]", "[default: 0]", "[default: 0.000000001]"] {
        assert!(text.contains(default), "missing {default} in\n{text}");
    }
    assert_eq!(code(&run(&["--version"])), 0);
}

fn dsep(graph: &str, x: &str, y: &str, z: Option<&str>) -> Output {
    let g = fixture(graph);
    let mut args = vec!["dsep", "--graph", &g, "--x", x, "--y", y];
    if let Some(z) = z {
        args.extend(["--z", z]);
    }
    run(&args)
}

#[test]
fn dsep_verdicts() {
    let out = dsep("chain.g", "A", "C", Some("B"));
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "true\n"));
    let out = dsep("collider.g", "A", "C", Some("B"));
    assert_eq!((code(&out), stdout(&out).as_str()), (3, "false\n"));
    let out = dsep("fig1c.g", "Z", "C", None);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "true\n"));
    assert_eq!(code(&dsep("fig1c.g", "Z", "C", Some("A"))), 3);
    assert_eq!(code(&dsep("fig1c.g", "Z", "Y", Some(""))), 3);
    assert_eq!(code(&dsep("chain.g", "A", "C", Some("A"))), 1);
    assert_eq!(code(&dsep("chain.g", "A", "Q", None)), 1);
    let g = fixture("chain.g");
    let out = run(&["dsep", "--graph", &g, "--x", "A", "--y", "C", "--z", "B", "--format", "json"]);
    assert_eq!(json(&out), serde_json::json!({"separated": true}));
}

fn verify(graph: &str, t: &str, extra: &[&str]) -> Output {
    let g = fixture(graph);
    let mut args = vec!["verify", "--graph", &g, "--treatment", t, "--outcome", "Y"];
    args.extend(extra);
    run(&args)
}

#[test]
fn verify_front_door_and_longitudinal() {
    let out = verify("fig1d.g", "A", &["--trials", "100", "--seed", "7", "--tol", "1e-9"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("result: pass"));

    let out = verify("fig2.g", "B,D", &["--trials", "100", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["pass"], true);
    let trials = doc["trials"].as_array().unwrap();
    assert_eq!(trials.len(), 100);
    let seeds: Vec<u64> = trials.iter().map(|t| t["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, (0..100).collect::<Vec<_>>());
    assert!(doc["max_abs_error"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn verify_pinned_value_and_failure() {
    assert_eq!(code(&verify("fig1b.g", "A=1", &["--trials", "3"])), 0);
    assert_eq!(code(&verify("fig1b.g", "A=2", &["--trials", "3"])), 1);
    // A tolerance below rounding error turns the verdict negative.
    let out = verify("fig2.g", "B,D", &["--trials", "20", "--tol", "1e-300"]);
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).contains("result: fail"));
}

#[test]
fn verify_refuses_non_identifiable_queries() {
    let out = verify("bow.g", "A", &[]);
    assert_eq!(code(&out), 3);
    assert!(!stdout(&out).contains("trials"));
}

#[test]
fn verify_output_is_byte_identical_across_runs() {
    let a = verify("fig1d.g", "A", &["--trials", "10", "--seed", "3", "--format", "json"]);
    let b = verify("fig1d.g", "A", &["--trials", "10", "--seed", "3", "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn districts_and_canonical_form() {
    let g = fixture("fig2.g");
    let out = run(&["districts", "--graph", &g]);
    assert_eq!(stdout(&out), "{A, C, D, Y}\n{B}\n");
    let out = run(&["districts", "--graph", &fixture("fig1d.g"), "--format", "json"]);
    assert_eq!(json(&out), serde_json::json!({"districts": [["A", "Y"], ["W"]]}));

    let out = run(&["print-canonical", "--graph", &g]);
    assert_eq!(code(&out), 0);
    let original = parse_graph(&std::fs::read_to_string(&g).unwrap()).unwrap().into_admg();
    let canonical = parse_graph(&stdout(&out)).unwrap();
    assert_eq!(canonical.into_admg(), original);
}
