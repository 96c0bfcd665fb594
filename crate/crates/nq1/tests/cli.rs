//! End-to-end checks of the `nq1` binary on the corpus documents:
//! deterministic JSON, exit-code contract, and witnesses that re-parse and
//! re-verify. The determinism run doubles as acceptance criterion 9.

use nq1::distribution::Distribution;
use nq1::dsl::{parse_document, parse_vector_field};
use nq1::graded::Signature;
use nq1::sample::SampleConfig;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn run_nq1(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nq1"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with_json(command: &str, file: &Path, out: &Path) -> (Output, String) {
    let output = run_nq1(&[
        command,
        file.to_str().unwrap(),
        "--json",
        out.to_str().unwrap(),
    ]);
    let json = std::fs::read_to_string(out).expect("json written");
    (output, json)
}

#[test]
fn criterion_9_cli_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&str, &str)] = &[
        ("check-q", "su2.nq1"),
        ("build-q", "su2.nq1"),
        ("extract-algebroid", "notinv.nq1"),
        ("analyze-distribution", "su2.nq1"),
        ("analyze-distribution", "notinv_image.nq1"),
        ("analyze-distribution", "tangent_ideal.nq1"),
        ("check-imfoliation", "tangent_ideal.nq1"),
        ("check-action", "notinv.nq1"),
        ("check-action", "notin.nq1"),
        ("check-action", "translation.nq1"),
        ("reduce", "su2.nq1"),
        ("reduce", "su2_full.nq1"),
        ("reduce", "heisenberg_center.nq1"),
        ("reduce", "notinv.nq1"),
        ("reduce", "translation.nq1"),
        ("reduce", "tangent_ideal.nq1"),
    ];
    for (idx, (command, file)) in cases.iter().enumerate() {
        let out1 = dir.path().join(format!("{}-a.json", idx));
        let out2 = dir.path().join(format!("{}-b.json", idx));
        let (o1, j1) = run_with_json(command, &corpus(file), &out1);
        let (o2, j2) = run_with_json(command, &corpus(file), &out2);
        assert_eq!(
            j1, j2,
            "JSON for `nq1 {} {}` differs between runs",
            command, file
        );
        assert_eq!(o1.stdout, o2.stdout, "stdout differs for {} {}", command, file);
        assert_eq!(o1.status.code(), o2.status.code());
        let parsed: serde_json::Value = serde_json::from_str(&j1).expect("valid JSON");
        assert_eq!(parsed["schema"], 1);
        assert_eq!(parsed["command"], *command);
    }
    let elapsed = start.elapsed().as_millis();
    println!("criterion 9: pass ({} ms, {} command runs)", elapsed, cases.len() * 2);
    assert!(elapsed <= 10_000, "criterion 9 exceeded 10 s: {} ms", elapsed);
}

#[test]
fn exit_codes_follow_the_contract() {
    // pass -> 0
    let ok = run_nq1(&["check-q", corpus("su2.nq1").to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));
    // mathematical failure -> 1
    let fail = run_nq1(&["check-action", corpus("notin.nq1").to_str().unwrap()]);
    assert_eq!(fail.status.code(), Some(1));
    let fail2 = run_nq1(&[
        "analyze-distribution",
        corpus("notinv_image.nq1").to_str().unwrap(),
    ]);
    assert_eq!(fail2.status.code(), Some(1));
    // usage problems -> 2
    let missing = run_nq1(&["check-q", "/nonexistent/path.nq1"]);
    assert_eq!(missing.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.nq1");
    std::fs::write(&bad, "manifold { base = }").unwrap();
    let syntax = run_nq1(&["check-q", bad.to_str().unwrap()]);
    assert_eq!(syntax.status.code(), Some(2));
    let no_block = dir.path().join("empty.nq1");
    std::fs::write(&no_block, "").unwrap();
    let unresolved = run_nq1(&["check-q", no_block.to_str().unwrap()]);
    assert_eq!(unresolved.status.code(), Some(2));
}

/// Witnesses printed by failing checks are valid DSL expressions that
/// reproduce the failure when substituted back in.
#[test]
fn witnesses_reparse_and_reverify() {
    let dir = tempfile::tempdir().unwrap();
    let sig = Signature::new(3, 3);
    let cfg = SampleConfig::default();

    // closure witness of the non-closed action
    let out = dir.path().join("notin.json");
    let (_, json) = run_with_json("check-action", &corpus("notin.nq1"), &out);
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    let witness = &parsed["output"]["closure_witness"];
    let left = parse_vector_field(witness["left"].as_str().unwrap(), sig).unwrap();
    let right = parse_vector_field(witness["right"].as_str().unwrap(), sig).unwrap();
    let bracket = parse_vector_field(witness["bracket"].as_str().unwrap(), sig).unwrap();
    assert_eq!(left.commutator(&right), bracket);

    // ... and the bracket really is outside the module
    let doc = parse_document(&std::fs::read_to_string(corpus("notin.nq1")).unwrap()).unwrap();
    let q = doc.resolve_q().unwrap();
    let action_data = doc.action.unwrap();
    let mut gens: Vec<_> = action_data.mu_m1.values().cloned().collect();
    gens.extend(action_data.eta.values().cloned());
    gens.extend(action_data.mu0.values().cloned());
    gens.extend(action_data.eta.values().map(|e| q.commutator(e)));
    let d = Distribution::from_generators(sig, gens).unwrap();
    assert!(!d.membership(&bracket, &cfg).unwrap().member);

    // involutivity witness of the raw image span
    let out = dir.path().join("image.json");
    let (_, json) = run_with_json("analyze-distribution", &corpus("notinv_image.nq1"), &out);
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    let witness = &parsed["output"]["witnesses"]["involutivity"];
    let left = parse_vector_field(witness["left"].as_str().unwrap(), sig).unwrap();
    let right = parse_vector_field(witness["right"].as_str().unwrap(), sig).unwrap();
    let bracket = parse_vector_field(witness["bracket"].as_str().unwrap(), sig).unwrap();
    assert_eq!(left.commutator(&right), bracket);
    let doc =
        parse_document(&std::fs::read_to_string(corpus("notinv_image.nq1")).unwrap()).unwrap();
    let d = Distribution::from_generators(sig, doc.distributions[0].generators.clone()).unwrap();
    assert!(!d.membership(&bracket, &cfg).unwrap().member);
}

/// The reduced algebroid emitted by `reduce` re-parses as a document and
/// round-trips through `build-q`/`check-q`.
#[test]
fn reduce_output_round_trips_through_the_dsl() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reduce.json");
    let (output, json) = run_with_json("reduce", &corpus("heisenberg_center.nq1"), &out);
    assert_eq!(output.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    let manifold = parsed["output"]["reduced"]["manifold"].as_str().unwrap();
    let algebroid = parsed["output"]["reduced"]["algebroid"].as_str().unwrap();
    let text = format!("{}\n{}\n", manifold, algebroid);
    let doc = parse_document(&text).unwrap();
    assert_eq!(doc.signature, Some(Signature::new(0, 2)));
    let a = doc.algebroid.unwrap();
    assert!(a.build_q().is_zero(), "abelian quotient has zero field");

    // rendered reduced document is accepted by check-q
    let reduced_file = dir.path().join("reduced.nq1");
    std::fs::write(&reduced_file, &text).unwrap();
    let check = run_nq1(&["check-q", reduced_file.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0));
}
