//! Remote backend against an in-process HTTP server.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use belieftrack::domain::{Story, Triple};
use belieftrack::harness::{evaluate, EvalOptions};
use belieftrack::semantics::{
    extract_triple, RemoteBackend, RemoteConfig, ResultingState, RuleBackend, SemanticBackend, SemanticsError, Task,
    TemplateBank,
};
use belieftrack::storygen::{generate, GenConfig, GenSet};
use serde_json::{json, Value};

type Handler = dyn Fn(&Value, &BTreeMap<String, String>) -> (u16, String) + Send + Sync;

struct Server {
    url: String,
    hits: Arc<AtomicUsize>,
}

fn read_request(r: &mut BufReader<TcpStream>) -> Option<(BTreeMap<String, String>, Value)> {
    let mut line = String::new();
    if r.read_line(&mut line).ok()? == 0 {
        return None;
    }
    let mut headers = BTreeMap::new();
    loop {
        line.clear();
        r.read_line(&mut line).ok()?;
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        let (k, v) = l.split_once(':')?;
        headers.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
    }
    let len: usize = headers.get("content-length")?.parse().ok()?;
    let mut body = vec![0; len];
    r.read_exact(&mut body).ok()?;
    Some((headers, serde_json::from_slice(&body).ok()?))
}

fn serve(handler: Arc<Handler>) -> Server {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let handler = handler.clone();
            let counter = counter.clone();
            thread::spawn(move || {
                let mut w = stream.try_clone().unwrap();
                let mut r = BufReader::new(stream);
                while let Some((headers, body)) = read_request(&mut r) {
                    counter.fetch_add(1, Ordering::SeqCst);
                    let (code, text) = handler(&body, &headers);
                    let resp = format!(
                        "HTTP/1.1 {code} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{text}",
                        text.len()
                    );
                    if w.write_all(resp.as_bytes()).is_err() {
                        return;
                    }
                }
            });
        }
    });
    Server { url, hits }
}

fn reply(body: &Value, output: Value) -> (u16, String) {
    (200, json!({"output": output, "model": "mock", "id": body["id"]}).to_string())
}

fn config(url: &str) -> RemoteConfig {
    RemoteConfig {
        url: Some(url.to_string()),
        initial_backoff_ms: 1,
        max_backoff_ms: 4,
        max_retries: 3,
        timeout_ms: 2_000,
        ..Default::default()
    }
}

/// Answers every task the way the rule backend would.
fn rule_server() -> Arc<Handler> {
    let rule = RuleBackend::default();
    let bank = TemplateBank::shipped();
    Arc::new(move |body, _| {
        let input = &body["input"];
        match body["task"].as_str().unwrap() {
            "resulting_state" => {
                let prompt = input.as_str().unwrap();
                let sentence = prompt.split(" What is the resulting state").next().unwrap();
                let p = bank.parse(sentence, 0).unwrap();
                reply(body, json!(RuleBackend::state_of(&p.kind, 0, sentence).unwrap().statement))
            }
            "nli" => {
                let premise = input["premise"].as_str().unwrap();
                let hyp = extract_triple(input["hypothesis"].as_str().unwrap()).unwrap();
                let state = if premise.contains(" no longer ") {
                    ResultingState::negative(premise)
                } else {
                    ResultingState::positive(premise, extract_triple(premise).unwrap())
                };
                let label = if rule.contradicts(&state, &hyp).unwrap() { "contradiction" } else { "neutral" };
                reply(body, json!(label))
            }
            "qa" => {
                let context: Vec<String> = serde_json::from_value(input["context"].clone()).unwrap();
                let q = input["question"].as_str().unwrap();
                let target = q.trim_start_matches("Where is the ").trim_end_matches('?');
                reply(body, json!(rule.answer(&context, q, target).unwrap()))
            }
            other => (400, format!("unknown task {other}")),
        }
    })
}

fn corpus() -> Vec<Story> {
    let bank = TemplateBank::shipped();
    let mut out = generate(GenSet::Tomi, &GenConfig::new(4, 6), &bank).unwrap();
    out.extend(generate(GenSet::D2, &GenConfig::new(4, 3), &bank).unwrap());
    out
}

#[test]
fn remote_pipeline_matches_gold_and_caches() {
    let server = serve(rule_server());
    let cache = tempfile::tempdir().unwrap();
    let cfg = RemoteConfig { cache_dir: Some(cache.path().to_path_buf()), ..config(&server.url) };
    let stories = corpus();
    let report = evaluate(&stories, &RemoteBackend::new(cfg.clone()).unwrap(), &EvalOptions::default());
    assert_eq!(report.backend, "remote");
    assert_eq!(report.total.accuracy, 1.0, "{:?}", report.failures.first());
    let first = server.hits.load(Ordering::SeqCst);
    assert!(first > 0);

    let again = evaluate(&stories, &RemoteBackend::new(cfg).unwrap(), &EvalOptions::default());
    assert_eq!(server.hits.load(Ordering::SeqCst), first, "cached run must not hit the server");
    assert_eq!(again.predictions, report.predictions);
}

#[test]
fn rate_limits_are_retried() {
    let calls = Arc::new(AtomicUsize::new(0));
    let c = calls.clone();
    let server = serve(Arc::new(move |body, _| {
        if c.fetch_add(1, Ordering::SeqCst) < 2 {
            (429, "slow down".into())
        } else {
            reply(body, json!(true))
        }
    }));
    let b = RemoteBackend::new(config(&server.url)).unwrap();
    assert_eq!(b.call(Task::Nli, json!({})).unwrap(), json!(true));
    assert_eq!(server.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn server_errors_give_up_after_the_retry_budget() {
    let server = serve(Arc::new(|_, _| (503, "down".into())));
    let b = RemoteBackend::new(RemoteConfig { max_retries: 2, ..config(&server.url) }).unwrap();
    assert!(matches!(b.call(Task::Qa, json!({})), Err(SemanticsError::BackendUnavailable(_))));
    assert_eq!(server.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let server = serve(Arc::new(|_, _| (400, "bad".into())));
    let b = RemoteBackend::new(config(&server.url)).unwrap();
    assert!(matches!(b.call(Task::Qa, json!({})), Err(SemanticsError::BackendProtocolError(_))));
    assert_eq!(server.hits.load(Ordering::SeqCst), 1);
}

#[test]
fn malformed_replies_are_protocol_errors() {
    for bad in [
        json!({"output": "x"}),
        json!({"output": "x", "model": ""}),
        json!({"output": "x", "model": "m", "id": 999_999}),
    ] {
        let text = bad.to_string();
        let server = serve(Arc::new(move |_, _| (200, text.clone())));
        let b = RemoteBackend::new(config(&server.url)).unwrap();
        assert!(matches!(b.call(Task::Qa, json!({})), Err(SemanticsError::BackendProtocolError(_))), "{bad}");
    }
    let server = serve(Arc::new(|body, _| reply(body, json!("perhaps"))));
    let b = RemoteBackend::new(config(&server.url)).unwrap();
    let state = ResultingState::positive("Bob is in the kitchen", Triple::located("Bob", "kitchen"));
    assert!(b.contradicts(&state, &Triple::located("Bob", "garden")).is_err());
}

#[test]
fn token_is_sent_as_bearer() {
    let seen = Arc::new(Mutex::new(None));
    let s = seen.clone();
    let server = serve(Arc::new(move |body, headers| {
        *s.lock().unwrap() = headers.get("authorization").cloned();
        reply(body, json!("entailment"))
    }));
    let b = RemoteBackend::new(RemoteConfig { token: Some("sekrit".into()), ..config(&server.url) }).unwrap();
    let state = ResultingState::positive("Bob is in the kitchen", Triple::located("Bob", "kitchen"));
    assert!(!b.contradicts(&state, &Triple::located("Bob", "kitchen")).unwrap());
    assert_eq!(seen.lock().unwrap().as_deref(), Some("Bearer sekrit"));
}

#[test]
fn slow_servers_time_out() {
    let server = serve(Arc::new(|body, _| {
        thread::sleep(Duration::from_millis(400));
        reply(body, json!("x"))
    }));
    let b = RemoteBackend::new(RemoteConfig { timeout_ms: 100, max_retries: 0, ..config(&server.url) }).unwrap();
    assert!(matches!(b.call(Task::Qa, json!({})), Err(SemanticsError::Timeout(_))));
}

#[test]
fn in_flight_requests_are_capped() {
    let now = Arc::new(AtomicUsize::new(0));
    let peak = Arc::new(AtomicUsize::new(0));
    let (n, p) = (now.clone(), peak.clone());
    let server = serve(Arc::new(move |body, _| {
        let cur = n.fetch_add(1, Ordering::SeqCst) + 1;
        p.fetch_max(cur, Ordering::SeqCst);
        thread::sleep(Duration::from_millis(30));
        n.fetch_sub(1, Ordering::SeqCst);
        reply(body, json!("ok"))
    }));
    let b = Arc::new(RemoteBackend::new(RemoteConfig { max_in_flight: 2, ..config(&server.url) }).unwrap());
    let handles: Vec<_> = (0..12)
        .map(|i| {
            let b = b.clone();
            thread::spawn(move || b.call(Task::Qa, json!({ "i": i })).unwrap())
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    assert_eq!(server.hits.load(Ordering::SeqCst), 12);
    assert!(peak.load(Ordering::SeqCst) <= 2, "peak {}", peak.load(Ordering::SeqCst));
}

#[test]
fn missing_url_is_a_configuration_error() {
    assert!(matches!(RemoteBackend::new(RemoteConfig::default()), Err(SemanticsError::NotConfigured(_))));
}

#[test]
fn cli_reads_backend_from_environment() {
    let server = serve(rule_server());
    let dir = tempfile::tempdir().unwrap();
    let corpus = belieftrack::domain::encode_corpus(&corpus()).unwrap();
    std::fs::write(dir.path().join("c.jsonl"), corpus).unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_belieftrack"))
        .args(["eval", "--corpus", "c.jsonl", "--backend", "remote", "--assert", "accuracy>=1.0", "--out", "ev"])
        .current_dir(dir.path())
        .env("BACKEND_URL", &server.url)
        .env("BACKEND_TOKEN", "t")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("backend=remote"));
    assert!(server.hits.load(Ordering::SeqCst) > 0);

    let unset = std::process::Command::new(env!("CARGO_BIN_EXE_belieftrack"))
        .args(["eval", "--corpus", "c.jsonl", "--backend", "remote", "--out", "ev"])
        .current_dir(dir.path())
        .env_remove("BACKEND_URL")
        .output()
        .unwrap();
    assert_eq!(unset.status.code(), Some(2));
}
