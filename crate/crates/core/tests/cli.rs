use std::io::Write;
use std::path::PathBuf;
use std::process::Command;

use claimdecomp::cli;
use claimdecomp::dataset::{parse_dataset, Strictness};
use claimdecomp::retrieval::{bm25_scores, Bm25Params, JudgedClaim};
use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> String {
    format!("sh {}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("claimdecomp").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--report", "json"]);
    let (code, out, err) = run(&full);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

fn temp_file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

/// Every subcommand, with a fixed seed, in machine-readable form.
fn invocations() -> Vec<Vec<String>> {
    let ds = data("sample.jsonl");
    let mock = fixture("mock_adapter.sh");
    let (generated, judgments) = (data("generated.jsonl"), data("match_judgments.jsonl"));
    let (pairs, ratings) = (data("pairs.jsonl"), data("ratings.jsonl"));
    let cmds: Vec<Vec<&str>> = vec![
        vec!["stats", "--dataset", &ds],
        vec!["stats", "--dataset", &ds, "--table", "4"],
        vec!["stats", "--dataset", &ds, "--table", "6"],
        vec!["aggregate", "--dataset", &ds, "--table", "5", "--per-claim"],
        vec!["aggregate", "--dataset", &ds, "--baseline", "random-uniform", "--seed", "7"],
        vec!["retrieve", "--dataset", &ds, "--mode", "all"],
        vec!["retrieve", "--dataset", &ds, "--mode", "all", "--scorer", "lexical", "--granularity", "subquestion"],
        vec!["retrieve", "--dataset", &ds, "--baseline", "random", "--mode", "all", "--seed", "3"],
        vec!["retrieve", "--dataset", &ds, "--baseline", "human"],
        vec!["eval-decomp", "--dataset", &ds, "--generated", &generated, "--per-claim", "--judgments", &judgments],
        vec!["agreement", "--pairs", &pairs, "--ratings", &ratings],
        vec!["convert", "--dataset", &ds],
    ];
    let mut out: Vec<Vec<String>> = cmds.into_iter().map(|c| c.into_iter().map(String::from).collect()).collect();
    let scorer = format!("external:{mock}");
    out.push(["retrieve", "--dataset", &ds, "--mode", "all", "--scorer", &scorer, "--converter", &mock].map(String::from).to_vec());
    out
}

#[test]
fn json_output_is_identical_across_runs_and_jobs() {
    for args in invocations() {
        let mut outputs = Vec::new();
        for jobs in ["1", "1", "4"] {
            let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
            a.extend(["--jobs", jobs, "--report", "json"]);
            let (code, out, err) = run(&a);
            assert_eq!(code, 0, "{a:?}: {err}");
            outputs.push(out);
        }
        assert_eq!(outputs[0], outputs[1], "{args:?} differs between runs");
        assert_eq!(outputs[0], outputs[2], "{args:?} differs between job counts");
        assert!(serde_json::from_str::<Value>(&outputs[0]).is_ok());
    }
}

#[test]
fn tsv_and_pretty_render() {
    let ds = data("sample.jsonl");
    let (code, tsv, _) = run(&["aggregate", "--dataset", &ds, "--table", "5", "--report", "tsv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines[0], "method\tmacro_f1\tmicro_f1\tmae");
    assert_eq!(lines.len(), 5);
    let (code, pretty, _) = run(&["aggregate", "--dataset", &ds, "--table", "5"]);
    assert_eq!(code, 0);
    assert!(pretty.starts_with("Veracity prediction\n"));
    assert!(pretty.contains("question-aggregation"));
}

#[test]
fn stats_split_selects_manifest_ids() {
    let v = json(&["stats", "--dataset", &data("sample.jsonl"), "--split", "train"]);
    assert_eq!(v["stats"]["n_claims"], 8);
    assert_eq!(v["split"], "train");
    let (code, _, err) = run(&["stats", "--dataset", &data("sample.jsonl"), "--split", "dev"]);
    assert_eq!(code, 1);
    assert!(err.contains("split `dev`"), "{err}");
}

#[test]
fn aggregate_schema_is_stable() {
    let a = json(&["aggregate", "--dataset", &data("sample.jsonl")]);
    let b = json(&["aggregate", "--dataset", &data("sample.jsonl"), "--table", "5", "--per-claim"]);
    let keys = |v: &Value| v.as_object().unwrap().keys().cloned().collect::<Vec<_>>();
    assert_eq!(keys(&a), keys(&b));
    assert_eq!(a["rows"].as_array().unwrap().len(), 1);
    assert_eq!(b["rows"].as_array().unwrap().len(), 4);
    assert!(a["predictions"].is_null());
    assert_eq!(b["predictions"].as_array().unwrap().len(), 12);
}

#[test]
fn aggregate_with_masks() {
    let mask = temp_file("{\"claim_id\":\"c05\",\"mask\":[false,true,true,true]}\n");
    let v = json(&["aggregate", "--dataset", &data("sample.jsonl"), "--use-mask-file", mask.path().to_str().unwrap(), "--per-claim"]);
    assert_eq!(v["rows"][0]["method"], "question-aggregation-masked");
    let c05 = v["predictions"].as_array().unwrap().iter().find(|p| p["claim_id"] == "c05").unwrap();
    assert_eq!(c05["score"], 1.0);
    assert_eq!(c05["predicted"], "true");

    let bad = temp_file("{\"claim_id\":\"c05\",\"mask\":[true]}\n");
    let (code, _, err) = run(&["aggregate", "--dataset", &data("sample.jsonl"), "--use-mask-file", bad.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("c05"), "{err}");
}

#[test]
fn matrix_file_scorer_matches_builtin_bm25() {
    let text = std::fs::read_to_string(data("sample.jsonl")).unwrap();
    let records = parse_dataset(text.as_bytes(), Strictness::Strict).unwrap().records;
    let mut file = String::new();
    for r in &records {
        let c = JudgedClaim::new(r).unwrap();
        let hyps: Vec<String> = r.annotations[c.annotation_index].subquestions.iter().map(|q| q.text.clone()).collect();
        let affirmative: Vec<String> = hyps
            .iter()
            .map(|q| claimdecomp::codec::question_to_statements(q).map_or_else(|_| q.clone(), |p| p.affirmative))
            .collect();
        let m = bm25_scores(&r.article_paragraphs, &affirmative, Bm25Params::default()).unwrap();
        let mut v: Value = serde_json::from_str(&m.to_json()).unwrap();
        v["claim_id"] = r.id.clone().into();
        v["polarity"] = "affirmative".into();
        file.push_str(&v.to_string());
        file.push('\n');
    }
    let f = temp_file(&file);
    let spec = format!("matrix:{}", f.path().display());
    let from_file = json(&["retrieve", "--dataset", &data("sample.jsonl"), "--scorer", &spec]);
    let builtin = json(&["retrieve", "--dataset", &data("sample.jsonl"), "--scorer", "bm25"]);
    assert_eq!(from_file["rows"], builtin["rows"]);

    // Refute mode needs negated matrices the file does not have.
    let (code, _, err) = run(&["retrieve", "--dataset", &data("sample.jsonl"), "--scorer", &spec, "--mode", "refute"]);
    assert_eq!(code, 1);
    assert!(err.contains("negated"), "{err}");
}

#[test]
fn external_scorer_runs_through_cli() {
    let scorer = format!("external:{}", fixture("mock_adapter.sh"));
    let v = json(&["retrieve", "--dataset", &data("sample.jsonl"), "--scorer", &scorer, "--pool", "2"]);
    assert_eq!(v["scorer"], "mock-nli");
    assert_eq!(v["n_claims"], 12);
}

#[test]
fn external_scorer_that_exits_is_a_protocol_error() {
    let scorer = format!("external:{}", fixture("exit_immediately.sh"));
    let (code, out, err) = run(&["retrieve", "--dataset", &data("sample.jsonl"), "--scorer", &scorer]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("external scorer") && err.contains("closed"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn external_converter_fills_gaps() {
    let v = json(&["convert", "--question", "Did Joe vote?", "--question", "Is the tax rising?", "--converter", &fixture("mock_adapter.sh")]);
    let rows = v["conversions"].as_array().unwrap();
    assert_eq!(rows[0]["provenance"], "external");
    assert_eq!(rows[1]["provenance"], "rule-based");
    assert_eq!(rows[1]["negated"], "The tax is not rising.");
    let plain = json(&["convert", "--question", "Did Joe vote?"]);
    assert!(plain["conversions"][0]["affirmative"].is_null());
    assert!(plain["conversions"][0]["error"].is_string());
}

#[test]
fn retrieval_negation_coverage() {
    let plain = json(&["retrieve", "--dataset", &data("sample.jsonl"), "--mode", "refute"]);
    assert!(plain["missing_negations"].as_u64().unwrap() > 0);
    let conv = json(&["retrieve", "--dataset", &data("sample.jsonl"), "--mode", "refute", "--converter", &fixture("mock_adapter.sh")]);
    assert_eq!(conv["missing_negations"], 0);
}

#[test]
fn eval_decomp_with_similarity_matrices() {
    let m = temp_file(concat!(
        "{\"claim_id\":\"c01\",\"matrix\":[[1.0,0.0,0.0],[0.0,0.5,0.0]]}\n",
        "{\"claim_id\":\"c03\",\"matrix\":[[0.2,0.6]]}\n",
    ));
    let gen = temp_file(concat!(
        "{\"claim_id\":\"c01\",\"questions\":[\"a?\",\"b?\"]}\n",
        "{\"claim_id\":\"c03\",\"questions\":[\"c?\"]}\n",
    ));
    let sim = format!("matrix:{}", m.path().display());
    let v = json(&["eval-decomp", "--dataset", &data("sample.jsonl"), "--generated", gen.path().to_str().unwrap(), "--sim", &sim, "--reference", "first"]);
    assert_eq!(v["matching"]["mean"], (0.75 + 0.6) / 2.0);
    assert!(v["recall"].is_null());
}

#[test]
fn agreement_kappa_variants() {
    let r = temp_file("[\"x\",\"x\"]\n[\"x\",\"y\"]\n[\"y\",\"x\"]\n[\"y\",\"y\"]\n");
    let path = r.path().to_str().unwrap();
    let v = json(&["agreement", "--ratings", path, "--kappa", "cohen"]);
    assert_eq!(v["kappa"]["value"], 0.0);
    let u = temp_file("[\"x\",\"x\"]\n[\"x\",\"x\"]\n");
    let v = json(&["agreement", "--ratings", u.path().to_str().unwrap()]);
    assert!(v["kappa"]["value"].is_null());
    assert!(v["kappa"]["undefined"].is_string());
}

#[test]
fn usage_errors_exit_2() {
    let ds = data("sample.jsonl");
    for args in [
        vec!["frobnicate"],
        vec!["stats", "--dataset", &ds, "--bogus"],
        vec!["stats", "--dataset", &ds, "--table", "9"],
        vec!["aggregate", "--dataset", &ds, "--unknown", "maybe"],
        vec!["retrieve", "--dataset", &ds, "--k", "many"],
        vec!["retrieve", "--dataset", &ds, "--scorer", "tfidf"],
        vec!["retrieve", "--dataset", &ds, "--decomp", "claim", "--mode", "merged"],
        vec!["stats", "--dataset", "/nonexistent/d.jsonl"],
        vec!["stats"],
        vec!["eval-decomp", "--dataset", &ds],
        vec!["agreement"],
    ] {
        let (code, out, err) = run(&args);
        assert_eq!(code, 2, "{args:?}: {err}");
        assert!(out.is_empty());
        assert!(!err.is_empty());
    }
}

#[test]
fn data_errors_exit_1() {
    let malformed = temp_file("{\"id\": \"x\", \"claim\": \n");
    let (code, _, err) = run(&["stats", "--dataset", malformed.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("line 1"), "{err}");

    let bad_label = temp_file("{\"id\":\"x\",\"claim\":\"c\",\"gold_label\":\"sort-of\",\"annotations\":[]}\n");
    let (code, _, err) = run(&["stats", "--dataset", bad_label.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("sort-of"), "{err}");
}

#[test]
fn lenient_mode_drops_with_warning() {
    let good = std::fs::read_to_string(data("sample.jsonl")).unwrap();
    let first = good.lines().next().unwrap();
    let f = temp_file(&format!("{first}\n{{\"broken\": true}}\n"));
    let (code, out, err) = run(&["stats", "--dataset", f.path().to_str().unwrap(), "--lenient", "--report", "json"]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("warning") && err.contains("line 2"), "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["stats"]["n_claims"], 1);
}

#[test]
fn binary_exit_codes() {
    let bin = PathBuf::from(env!("CARGO_BIN_EXE_claimdecomp"));
    let ok = Command::new(&bin).args(["stats", "--dataset", &data("sample.jsonl"), "--report", "json"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(serde_json::from_slice::<Value>(&ok.stdout).is_ok());
    let help = Command::new(&bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("retrieve"));
    let usage = Command::new(&bin).arg("nope").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let scorer = format!("external:{}", fixture("exit_immediately.sh"));
    let proto = Command::new(&bin).args(["retrieve", "--dataset", &data("sample.jsonl"), "--scorer", &scorer]).output().unwrap();
    assert_eq!(proto.status.code(), Some(1));
}
