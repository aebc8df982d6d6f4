use std::time::{Duration, Instant};

use claimdecomp::codec::{convert_via_external, ExternalConversionError, Provenance};
use claimdecomp::protocol::{ProtocolClient, ProtocolError};
use claimdecomp::retrieval::{retrieve, ExternalScorer, Hypothesis, Mode, RetrievalError, Scorer};
use serde_json::json;

fn fixture(name: &str) -> String {
    format!("sh {}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn mock() -> ProtocolClient {
    ProtocolClient::spawn(&fixture("mock_adapter.sh"), Duration::from_secs(10)).unwrap()
}

#[test]
fn handshake_reports_adapter_info() {
    let c = mock();
    assert_eq!(c.info().name, "mock-nli");
    assert_eq!(c.info().version, "0.1");
    assert!(c.info().bounded);
}

#[test]
fn replies_arrive_in_request_order() {
    let mut c = mock();
    for i in 0..300 {
        let premise = if i % 3 == 0 { "a MATCH here" } else { "nothing" };
        let want = if i % 3 == 0 { 0.9 } else { 0.1 };
        assert_eq!(c.entail(premise, "hypothesis MATCH").unwrap(), want, "request {i}");
    }
}

#[test]
fn remote_error_leaves_connection_usable() {
    let mut c = mock();
    match c.request(&json!({"op": "bogus"})) {
        Err(ProtocolError::Remote(msg)) => assert_eq!(msg, "unsupported op"),
        other => panic!("expected remote error, got {other:?}"),
    }
    assert_eq!(c.entail("MATCH", "h").unwrap(), 0.9);
}

#[test]
fn external_conversion() {
    let mut c = mock();
    let pair = convert_via_external("Are any votes illegally counted in the election?", &mut c).unwrap();
    assert_eq!(pair.affirmative, "Some votes were illegally counted in the election.");
    assert_eq!(pair.negated, "No votes were illegally counted in the election.");
    assert_eq!(pair.provenance, Provenance::External);
}

#[test]
fn interrogative_conversion_is_rejected() {
    let mut c = ProtocolClient::spawn(&fixture("out_of_bounds.sh"), Duration::from_secs(10)).unwrap();
    assert!(matches!(convert_via_external("Is it raining?", &mut c), Err(ExternalConversionError::Interrogative(_))));
}

#[test]
fn process_that_exits_fails_handshake() {
    let err = ProtocolClient::spawn(&fixture("exit_immediately.sh"), Duration::from_secs(10)).unwrap_err();
    assert!(matches!(err, ProtocolError::Closed), "{err:?}");
}

#[test]
fn malformed_handshake() {
    let err = ProtocolClient::spawn(&fixture("bad_handshake.sh"), Duration::from_secs(10)).unwrap_err();
    assert!(matches!(err, ProtocolError::Malformed { .. }), "{err:?}");
}

#[test]
fn process_dying_mid_session() {
    let mut c = ProtocolClient::spawn(&fixture("die_after_hello.sh"), Duration::from_secs(10)).unwrap();
    let err = c.entail("p", "h").unwrap_err();
    assert!(matches!(err, ProtocolError::Closed | ProtocolError::Io(_)), "{err:?}");
}

#[test]
fn stalled_process_times_out() {
    let mut c = ProtocolClient::spawn(&fixture("stall_after_hello.sh"), Duration::from_millis(300)).unwrap();
    let start = Instant::now();
    let err = c.entail("p", "h").unwrap_err();
    assert!(matches!(err, ProtocolError::Timeout(_)), "{err:?}");
    assert!(start.elapsed() < Duration::from_secs(5));
}

#[test]
fn bounded_contract_is_enforced() {
    let mut c = ProtocolClient::spawn(&fixture("out_of_bounds.sh"), Duration::from_secs(10)).unwrap();
    assert!(matches!(c.entail("p", "h"), Err(ProtocolError::Contract(_))));
}

#[test]
fn missing_command_fails() {
    let err = ProtocolClient::spawn("definitely-not-a-command-xyz", Duration::from_secs(5)).unwrap_err();
    assert!(matches!(err, ProtocolError::Closed | ProtocolError::Spawn { .. }), "{err:?}");
}

#[test]
fn pooled_scorer_matches_single_connection() {
    let paragraphs: Vec<String> = (0..7).map(|i| if i % 2 == 0 { format!("p{i} MATCH") } else { format!("p{i}") }).collect();
    let hyps: Vec<String> = vec!["h0".into(), "h1".into(), "h2".into()];
    let single = ExternalScorer::from_clients(vec![mock()]).score(&paragraphs, &hyps).unwrap();
    let pooled = ExternalScorer::spawn(&fixture("mock_adapter.sh"), 3, Duration::from_secs(10)).unwrap();
    assert_eq!(pooled.name(), "mock-nli");
    assert!(pooled.bounded());
    let m = pooled.score(&paragraphs, &hyps).unwrap();
    assert_eq!(m, single);
    for i in 0..7 {
        assert_eq!(m.row_max(i), if i % 2 == 0 { 0.9 } else { 0.1 });
    }
}

#[test]
fn retrieval_through_external_scorer() {
    let paragraphs: Vec<String> = vec!["plain".into(), "MATCH one".into(), "plain".into(), "MATCH two".into()];
    let hyps = vec![Hypothesis { affirmative: "x".into(), negated: Some("not x".into()) }];
    let scorer = ExternalScorer::spawn(&fixture("mock_adapter.sh"), 2, Duration::from_secs(10)).unwrap();
    let r = retrieve(&paragraphs, &hyps, Mode::Merged, &scorer, 2).unwrap();
    assert_eq!(r.selected, [1, 3].into());
}

#[test]
fn scorer_connect_failure_is_reported() {
    let err = ExternalScorer::spawn(&fixture("exit_immediately.sh"), 2, Duration::from_secs(5)).unwrap_err();
    assert!(matches!(err, RetrievalError::Connect(_)), "{err:?}");
}

#[test]
fn scorer_failure_names_the_pair() {
    let c = ProtocolClient::spawn(&fixture("die_after_hello.sh"), Duration::from_secs(5)).unwrap();
    let err = ExternalScorer::from_clients(vec![c]).score(&["p".into()], &["h".into()]).unwrap_err();
    assert!(matches!(err, RetrievalError::Pair { paragraph: 0, hypothesis: 0, .. }), "{err:?}");
}
