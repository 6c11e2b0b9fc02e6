//! End-to-end tests of the command-line interface: exit codes, JSON
//! envelopes, file outputs, and determinism.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contextlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_env(args: &[&str], envs: &[(&str, &str)]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contextlab"))
        .args(args)
        .envs(envs.iter().map(|(k, v)| (k.to_string(), v.to_string())))
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("no signal")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&o.stdout)
        )
    })
}

fn path_str(p: &Path) -> String {
    p.to_str().expect("utf8 path").to_string()
}

fn sha_of(path: &Path) -> String {
    let bytes = fs::read(path).expect("readable");
    let mut h = Sha256::new();
    h.update(&bytes);
    format!("{:x}", h.finalize())
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&run(&[])), 64);
    assert_eq!(code(&run(&["decide", "--bogus-flag", "x.json"])), 64);
    assert_eq!(code(&run(&["frobnicate"])), 64);
}

#[test]
fn missing_and_malformed_files_exit_64() {
    assert_eq!(code(&run(&["validate", "/no/such/file.json"])), 64);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "this is not json").unwrap();
    assert_eq!(code(&run(&["validate", &path_str(&bad)])), 64);
    assert_eq!(
        code(&run(&["decide", "--theory", "ks", &path_str(&bad)])),
        64
    );
}

#[test]
fn validate_accepts_the_pr_box_and_embeds_the_hash() {
    let path = common::fixture("prbox.json");
    let out = run(&["validate", &path_str(&path)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["command"], "validate");
    assert_eq!(v["valid"], true);
    assert_eq!(v["nondisturbing"], true);
    assert_eq!(v["input_sha256"], Value::String(sha_of(&path)));
}

#[test]
fn validate_flags_bad_weights_as_falsifier() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lopsided.json");
    fs::write(
        &path,
        r#"{
  "observables": [{ "name": "q", "outcomes": ["-1", "+1"] }],
  "contexts": [
    { "name": "c", "observables": ["q"], "distribution": { "-1": "1/2", "+1": "3/4" } }
  ]
}"#,
    )
    .unwrap();
    let out = run(&["validate", &path_str(&path)]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["valid"], false);
    assert!(!v["violations"].as_array().unwrap().is_empty());

    // decide refuses the same file as a domain error unless told otherwise
    assert_eq!(code(&run(&["decide", "--theory", "ks", &path_str(&path)])), 65);
    let forced = run(&["decide", "--theory", "ks", "--no-validate", &path_str(&path)]);
    assert_eq!(code(&forced), 0);
    assert_eq!(stdout_json(&forced)["verdict"], "contextual");
}

#[test]
fn decide_ks_flags_the_pr_box_deterministically() {
    let path = common::fixture("prbox.json");
    let first = run(&["decide", "--theory", "ks", &path_str(&path)]);
    assert_eq!(code(&first), 0);
    let v = stdout_json(&first);
    assert_eq!(v["command"], "decide");
    assert_eq!(v["theory"], "ks");
    assert_eq!(v["verdict"], "contextual");
    assert!(v["certificate"].as_array().is_some());
    assert_eq!(v["input_sha256"], Value::String(sha_of(&path)));

    let second = run(&["decide", "--theory", "ks", &path_str(&path)]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn decide_ks_on_disturbing_input_exits_65_with_witness() {
    let path = common::fixture("disturbing1.json");
    let out = run(&["decide", "--theory", "ks", &path_str(&path)]);
    assert_eq!(code(&out), 65);
    let v = stdout_json(&out);
    assert!(v["error"].as_str().unwrap().contains("disturbing"));
    let w = &v["witness"];
    assert!(w["context_a"].is_string() && w["context_b"].is_string());
    assert!(w["marginal_a"] != w["marginal_b"]);
}

#[test]
fn decide_cbd2_accepts_disturbing_input() {
    let path = common::fixture("disturbing1.json");
    let out = run(&["decide", "--theory", "cbd2", &path_str(&path)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["theory"], "cbd2");
    assert_eq!(v["verdict"], "noncontextual");
    assert!(v["witness"].is_object());
}

#[test]
fn decide_dumps_the_constraint_system_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let tsv = dir.path().join("system.tsv");
    let out = run(&[
        "decide",
        "--theory",
        "ks",
        "--dump-lp",
        &path_str(&tsv),
        &path_str(&common::fixture("prbox.json")),
    ]);
    assert_eq!(code(&out), 0);
    let dumped = fs::read_to_string(&tsv).unwrap();
    let header = dumped.lines().next().unwrap();
    assert!(header.contains("17 rows") && header.contains("16 vars"), "{header}");
    assert_eq!(dumped.lines().count(), 18);
}

#[test]
fn low_max_vars_is_a_domain_error() {
    let out = run(&[
        "decide",
        "--theory",
        "ks",
        "--max-vars",
        "4",
        &path_str(&common::fixture("prbox.json")),
    ]);
    assert_eq!(code(&out), 65);
}

#[test]
fn transform_consistify_then_deconsistify_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let spec_c = dir.path().join("consistify.json");
    let spec_d = dir.path().join("deconsistify.json");
    fs::write(&spec_c, r#"{ "transform": "consistify", "criterion": "cbd2" }"#).unwrap();
    fs::write(&spec_d, r#"{ "transform": "deconsistify" }"#).unwrap();
    let consistified = dir.path().join("consistified.json");
    let back = dir.path().join("back.json");

    let input = common::fixture("disturbing1.json");
    let out = run(&[
        "transform",
        "--spec",
        &path_str(&spec_c),
        &path_str(&input),
        "-o",
        &path_str(&consistified),
    ]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&fs::read_to_string(&consistified).unwrap()).unwrap();
    assert!(doc["provenance"].is_object(), "tag must ride along");
    let names: Vec<&str> = doc["observables"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"q1@c1") && names.contains(&"q2@c2"));

    let out = run(&[
        "transform",
        "--spec",
        &path_str(&spec_d),
        &path_str(&consistified),
        "-o",
        &path_str(&back),
    ]);
    assert_eq!(code(&out), 0);
    let original: Value = serde_json::from_str(&fs::read_to_string(&input).unwrap()).unwrap();
    let returned: Value = serde_json::from_str(&fs::read_to_string(&back).unwrap()).unwrap();
    assert_eq!(original, returned);

    // deconsistify without a tag has nothing to undo
    let out = run(&["transform", "--spec", &path_str(&spec_d), &path_str(&input)]);
    assert_eq!(code(&out), 65);
}

#[test]
fn transform_nest_drops_a_context() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("nest.json");
    fs::write(
        &spec,
        r#"{ "transform": "nest", "contexts": ["c12", "c23", "c34"] }"#,
    )
    .unwrap();
    let out = run(&[
        "transform",
        "--spec",
        &path_str(&spec),
        &path_str(&common::fixture("prbox.json")),
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["behavior"]["contexts"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_consistification_passes_on_fixtures() {
    for fixture in ["prbox.json", "disturbing1.json"] {
        let out = run(&[
            "verify-consistification",
            &path_str(&common::fixture(fixture)),
        ]);
        assert_eq!(code(&out), 0, "{fixture}");
        let v = stdout_json(&out);
        assert_eq!(v["all_hold"], true, "{fixture}");
    }
}

#[test]
fn check_principle_flags_the_frozen_violation() {
    let record: Value = serde_json::from_str(
        &fs::read_to_string(common::fixture("cbd2_postprocess_violation.json")).unwrap(),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let behavior = dir.path().join("behavior.json");
    let spec = dir.path().join("transform.json");
    fs::write(&behavior, serde_json::to_string(&record["behavior"]).unwrap()).unwrap();
    fs::write(&spec, serde_json::to_string(&record["transform"]).unwrap()).unwrap();

    let out = run(&[
        "check-principle",
        "--principle",
        "post-process",
        "--spec",
        &path_str(&spec),
        "--theory",
        "cbd2",
        &path_str(&behavior),
    ]);
    assert_eq!(code(&out), 1, "a violated principle is a falsifier");
    let v = stdout_json(&out);
    assert_eq!(v["status"], "violated");
    assert_eq!(v["before"]["verdict"], "noncontextual");
    assert_eq!(v["after"]["verdict"], "contextual");

    // the same spec under the wrong --principle is rejected up front
    let out = run(&[
        "check-principle",
        "--principle",
        "nest",
        "--spec",
        &path_str(&spec),
        "--theory",
        "cbd2",
        &path_str(&behavior),
    ]);
    assert_eq!(code(&out), 65);

    // a respected instance exits zero
    let nest = dir.path().join("nest.json");
    fs::write(&nest, r#"{ "transform": "nest", "contexts": ["c12", "c23", "c34"] }"#).unwrap();
    let out = run(&[
        "check-principle",
        "--principle",
        "nest",
        "--spec",
        &path_str(&nest),
        "--theory",
        "ks",
        &path_str(&common::fixture("prbox.json")),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["status"], "respected");
}

#[test]
fn search_exit_codes_follow_expectation() {
    let dir = tempfile::tempdir().unwrap();

    // this plan finds violations: disturbing repeated pairs, cbd2 theory
    let finds = dir.path().join("finds.json");
    fs::write(
        &finds,
        r#"{
  "theory": "cbd2", "shape": "repeated-pair", "size": 2,
  "condition": "disturbing", "denominator": 4,
  "samples": 60, "seed": 7, "families": ["post-process"]
}"#,
    )
    .unwrap();
    let expected = run(&["search", "--config", &path_str(&finds), "--expect-violations"]);
    assert_eq!(code(&expected), 0);
    let report = stdout_json(&expected);
    assert!(!report["report"]["violations"].as_array().unwrap().is_empty());

    let unexpected = run(&["search", "--config", &path_str(&finds)]);
    assert_eq!(code(&unexpected), 1, "an unexpected find is a falsifier");

    // this plan cannot find anything: ks on noncontextual samples
    let barren = dir.path().join("barren.json");
    fs::write(
        &barren,
        r#"{
  "theory": "ks", "shape": "cycle", "size": 3,
  "condition": "ks-noncontextual", "denominator": 4,
  "samples": 3, "seed": 5
}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["search", "--config", &path_str(&barren)])), 0);
    let exhausted = run(&["search", "--config", &path_str(&barren), "--expect-violations"]);
    assert_eq!(code(&exhausted), 2, "exhaustion is a soft failure");

    // undecidable plan: ks cannot judge disturbing samples
    let undecidable = dir.path().join("undecidable.json");
    fs::write(
        &undecidable,
        r#"{
  "theory": "ks", "shape": "cycle", "size": 3,
  "condition": "unrestricted", "denominator": 4,
  "samples": 3, "seed": 5
}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["search", "--config", &path_str(&undecidable)])), 65);
}

#[test]
fn search_seed_comes_from_the_environment_when_set() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("plan.json");
    fs::write(
        &cfg,
        r#"{
  "theory": "ks", "shape": "cycle", "size": 3,
  "condition": "ks-noncontextual", "denominator": 4,
  "samples": 2, "seed": 5
}"#,
    )
    .unwrap();
    let out = run_env(
        &["search", "--config", &path_str(&cfg)],
        &[("CONTEXTLAB_SEED", "99")],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["report"]["config"]["seed"], 99);

    let out = run_env(
        &["search", "--config", &path_str(&cfg)],
        &[("CONTEXTLAB_SEED", "not-a-number")],
    );
    assert_eq!(code(&out), 64);
}

#[test]
fn numlab_reports_the_arithmetic_story() {
    let out = run(&["numlab", "--nmax", "200"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["equivalence_scan"]["clean"], true);
    assert_eq!(v["injectivity_holds"], true);
    assert_eq!(v["axiom"]["holds"], true);
    assert_eq!(v["transported_axiom"]["smallest"], 9);
    assert_eq!(v["anomaly"]["t_even_at_1"], true);
    assert_eq!(v["anomaly"]["image_is_even"], false);

    assert_eq!(code(&run(&["numlab", "--nmax", "1"])), 65);
}
