use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use sentagg_core::jsonl::parse_jsonl;
use sentagg_core::oracle::{attr_multiset, expand_plan};
use sentagg_core::{
    aggregate, canonicalize, default_lexicon, default_schema, AggregateOptions, DocumentPlan,
};

const BIN: &str = env!("CARGO_BIN_EXE_sentagg");

const REPORT: &str = "This refinement activated DLC for CSAs 3122 and 3130 in the first quarter of 1994 and ALL-DLC for CSA 3134 in 1994 Q3.  It also activated DSS-DLC for CSA 3208 in 1994 Q3.";

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_str()
        .expect("fixture paths are valid UTF-8")
        .to_owned()
}

fn run_with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .as_mut()
        .expect("stdin is piped")
        .write_all(stdin.as_bytes())
        .expect("stdin accepts input");
    child.wait_with_output().expect("binary finishes")
}

fn run(args: &[&str]) -> Output {
    run_with_stdin(args, "")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

#[test]
fn fd_input_realizes_the_report() {
    let out = run(&["--input", &data("corpus.fd"), "--format", "fd"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert_eq!(stdout_of(&out), format!("{}\n", REPORT));
}

#[test]
fn run_subcommand_matches_the_default_invocation() {
    let implicit = run(&["--input", &data("corpus.jsonl")]);
    let explicit = run(&["run", "--input", &data("corpus.jsonl")]);
    assert!(implicit.status.success());
    assert!(explicit.status.success());
    assert_eq!(stdout_of(&implicit), stdout_of(&explicit));
    assert_eq!(stdout_of(&implicit), format!("{}\n", REPORT));
}

#[test]
fn stdin_matches_file_input() {
    let text = std::fs::read_to_string(data("corpus.jsonl")).unwrap();
    let from_stdin = run_with_stdin(&[], &text);
    let from_file = run(&["--input", &data("corpus.jsonl")]);
    assert!(from_stdin.status.success(), "stderr: {}", stderr_of(&from_stdin));
    assert_eq!(stdout_of(&from_stdin), stdout_of(&from_file));
}

#[test]
fn empty_input_emits_nothing_and_succeeds() {
    let out = run(&["--input", &data("empty.jsonl")]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert_eq!(stdout_of(&out), "");
}

#[test]
fn stats_emission_reports_the_aggregation_counts() {
    let out = run(&["--input", &data("corpus.jsonl"), "--emit", "stats"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let stats: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(stats["messages_in"], 4);
    assert_eq!(stats["sentences_out"], 2);
    assert!(stats["aggregated_chars"].as_u64() < stats["baseline_chars"].as_u64());
    assert!(stats["reduction_ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn plan_emission_round_trips_through_the_oracle() {
    let out = run(&["--input", &data("corpus.jsonl"), "--emit", "plan"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let emitted = DocumentPlan::from_json(&stdout_of(&out)).expect("emitted plan parses");

    let schema = default_schema();
    let text = std::fs::read_to_string(data("corpus.jsonl")).unwrap();
    let msgs = canonicalize(parse_jsonl(&text, &schema).unwrap(), &default_lexicon());
    let local = aggregate(&msgs, &schema, &AggregateOptions::default());

    assert_eq!(emitted, local, "emitted plan must equal the in-process plan");
    assert_eq!(
        attr_multiset(&expand_plan(&emitted).unwrap()),
        attr_multiset(&expand_plan(&local).unwrap()),
    );
}

#[test]
fn all_emission_carries_text_plan_and_stats() {
    let out = run(&["--input", &data("corpus.jsonl"), "--emit", "all"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let combined: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(combined["text"], REPORT);
    assert_eq!(combined["stats"]["messages_in"], 4);
    assert!(combined["plan"].is_array());
}

#[test]
fn gen_is_deterministic_and_feeds_back_into_run() {
    let first = run(&["gen", "--seed", "7"]);
    let second = run(&["gen", "--seed", "7"]);
    assert!(first.status.success(), "stderr: {}", stderr_of(&first));
    assert_eq!(stdout_of(&first), stdout_of(&second));

    let corpus = stdout_of(&first);
    let generated = corpus.lines().filter(|l| !l.trim().is_empty()).count();
    let fed = run_with_stdin(&["--emit", "stats"], &corpus);
    assert!(fed.status.success(), "stderr: {}", stderr_of(&fed));
    let stats: serde_json::Value = serde_json::from_str(&stdout_of(&fed)).unwrap();
    assert_eq!(stats["messages_in"], generated as u64);
}

#[test]
fn different_seeds_give_different_corpora() {
    let a = run(&["gen", "--seed", "1"]);
    let b = run(&["gen", "--seed", "2"]);
    assert_ne!(stdout_of(&a), stdout_of(&b));
}

#[test]
fn disabling_sort_and_break_keeps_messages_apart() {
    let out = run(&[
        "--input",
        &data("corpus.jsonl"),
        "--emit",
        "plan",
        "--disable",
        "sort",
        "--disable",
        "break",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let plan = DocumentPlan::from_json(&stdout_of(&out)).unwrap();
    assert_eq!(plan.sentence_count(), 4);
    assert_eq!(plan.clause_count(), 4);
}

#[test]
fn max_clauses_one_splits_every_merged_message() {
    let out =
        run(&["--input", &data("corpus.jsonl"), "--emit", "plan", "--max-clauses", "1"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let plan = DocumentPlan::from_json(&stdout_of(&out)).unwrap();
    assert_eq!(plan.sentence_count(), 3, "merging still folds the adjacent pair");
    assert_eq!(plan.clause_count(), 3);
}

#[test]
fn config_file_switches_every_date_to_short_form() {
    let out = run(&[
        "--input",
        &data("corpus.fd"),
        "--format",
        "fd",
        "--config",
        &data("config_all_short.json"),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert_eq!(
        stdout_of(&out),
        "This refinement activated DLC for CSAs 3122 and 3130 in 1994 Q1 and ALL-DLC for CSA 3134 in 1994 Q3.  It also activated DSS-DLC for CSA 3208 in 1994 Q3.\n"
    );
}

#[test]
fn out_flag_writes_the_file_instead_of_stdout() {
    let target = std::env::temp_dir().join(format!("sentagg-out-{}.txt", std::process::id()));
    let path = target.to_str().unwrap();
    let out = run(&["--input", &data("corpus.jsonl"), "--out", path]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert_eq!(stdout_of(&out), "");
    let written = std::fs::read_to_string(&target).unwrap();
    std::fs::remove_file(&target).ok();
    assert_eq!(written, format!("{}\n", REPORT));
}

#[test]
fn missing_input_is_an_input_error() {
    let missing: PathBuf = std::env::temp_dir().join("sentagg-no-such-input.jsonl");
    let out = run(&["--input", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("error:"));
    assert_eq!(stdout_of(&out), "");
}

#[test]
fn malformed_line_is_an_input_error_with_its_line_number() {
    let out = run(&["--input", &data("bad.jsonl")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("line 2"), "stderr: {}", stderr_of(&out));
}

#[test]
fn rejected_config_is_a_config_error() {
    let out = run(&[
        "--input",
        &data("corpus.jsonl"),
        "--config",
        &data("config_bad.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("error:"), "stderr: {}", stderr_of(&out));
}

#[test]
fn unreadable_config_is_a_config_error() {
    let missing: PathBuf = std::env::temp_dir().join("sentagg-no-such-config.json");
    let out = run(&["--input", &data("corpus.jsonl"), "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
