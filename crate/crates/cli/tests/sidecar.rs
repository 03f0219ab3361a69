mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use common::{assert_ok, fixture, read_csv, stage, stderr};
use serde_json::{json, Value};
use uidthat::config::{ProviderConfig, ProviderKindConfig, Transport};
use uidthat::sidecar::{ExternalProvider, HttpTransport, StdioTransport};
use uidthat_core::{LanguageModel, LmError};

fn mock_path() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/tests/support/mock_sidecar.py").to_string()
}

fn have_python() -> bool {
    let ok = Command::new("python3").arg("--version").output().is_ok_and(|o| o.status.success());
    if !ok {
        eprintln!("python3 not found, skipping");
    }
    ok
}

fn mock(args: &[&str]) -> Vec<String> {
    let mut cmd = vec!["python3".to_string(), mock_path()];
    cmd.extend(args.iter().map(|a| a.to_string()));
    cmd
}

fn stdio(args: &[&str]) -> Result<ExternalProvider, LmError> {
    let transport = StdioTransport::spawn(&mock(args), Duration::from_secs(10))?;
    ExternalProvider::with_transport(Box::new(transport), 0)
}

// mirrors the mock's scoring rule
fn expected_logprob(continuation: &str) -> f64 {
    let chars: Vec<char> = continuation.chars().collect();
    chars.chunks(3).map(|p| -(0.5 + 0.1 * p.len() as f64)).sum()
}

#[test]
fn stdio_logprob_is_the_sum_over_pieces() {
    if !have_python() {
        return;
    }
    let lm = stdio(&[]).unwrap();
    assert_eq!(lm.model(), "mock-3char");
    assert!(lm.describe().contains("mock-3char"));
    let cases: [(&[&str], &str, &str); 4] = [
        (&["I", "think"], "you", " you"),
        (&["I", "think"], "'s", "'s"),
        (&[], "Honestly", "Honestly"),
        (&["I", "know", "that"], "everybody", " everybody"),
    ];
    for (prefix, word, wire) in cases {
        let lp = lm.continuation_logprob(prefix, word).unwrap();
        assert!((lp - expected_logprob(wire)).abs() < 1e-6, "{word}: {lp}");
    }
    let h = lm.next_token_entropy(&["I", "really", "think"]).unwrap();
    assert!((h - 4f64.ln()).abs() < 1e-12);
    assert!(matches!(lm.next_token_distribution(&["I"]), Err(LmError::Unsupported(_))));
    assert_eq!(lm.continuation_logprob(&["I"], ""), Err(LmError::EmptyWord));
}

#[test]
fn version_mismatch_is_refused() {
    if !have_python() {
        return;
    }
    match stdio(&["--version", "2"]) {
        Err(LmError::Protocol(msg)) => assert!(msg.contains("version 2"), "{msg}"),
        other => panic!("expected protocol error, got {:?}", other.map(|p| p.model().to_string())),
    }
}

#[test]
fn out_of_order_answers_reach_their_callers() {
    if !have_python() {
        return;
    }
    let lm = Arc::new(stdio(&["--batch", "4"]).unwrap());
    let words: [&'static str; 8] = ["a", "be", "sea", "dove", "eagle", "falcon", "gazelle", "hamsters"];
    let handles: Vec<_> = words
        .into_iter()
        .map(|w| {
            let lm = Arc::clone(&lm);
            thread::spawn(move || (w, lm.continuation_logprob(&["we", "saw"], w).unwrap()))
        })
        .collect();
    for h in handles {
        let (w, lp) = h.join().unwrap();
        assert!((lp - expected_logprob(&format!(" {w}"))).abs() < 1e-9, "{w}");
    }
}

#[test]
fn dead_process_is_a_transport_error() {
    if !have_python() {
        return;
    }
    let lm = stdio(&["--die-after", "2"]).unwrap();
    assert!(lm.continuation_logprob(&["I"], "think").is_ok());
    match lm.continuation_logprob(&["I"], "know") {
        Err(LmError::Transport(_)) => {}
        other => panic!("{other:?}"),
    }
    // later calls fail fast
    assert!(matches!(lm.next_token_entropy(&["I"]), Err(LmError::Transport(_))));
}

#[test]
fn missing_program_is_a_transport_error() {
    let cmd = vec!["/nonexistent/sidecar".to_string()];
    assert!(matches!(
        StdioTransport::spawn(&cmd, Duration::from_secs(1)),
        Err(LmError::Transport(_))
    ));
}

/// Minimal HTTP/1.1 server: answers `failures` requests with 503, then
/// scores like the stdio mock. Every request body is recorded.
struct HttpMock {
    url: String,
    seen: Arc<Mutex<Vec<Value>>>,
}

fn read_request(stream: &mut TcpStream) -> Option<Value> {
    let mut reader = BufReader::new(stream);
    let mut length = 0;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).ok()? == 0 {
            return None;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                length = v.trim().parse().ok()?;
            }
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).ok()?;
    serde_json::from_slice(&body).ok()
}

fn spawn_http(failures: usize, version: u32) -> HttpMock {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/score", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let count = Arc::new(AtomicUsize::new(0));
    {
        let seen = Arc::clone(&seen);
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let Some(req) = read_request(&mut stream) else { continue };
                let (status, body) = if count.fetch_add(1, Ordering::SeqCst) < failures {
                    ("503 Service Unavailable", String::from("busy"))
                } else {
                    let id = req["id"].clone();
                    let reply = if req["handshake"] == true {
                        json!({"id": id, "model": "mock-http", "protocol_version": version})
                    } else if let Some(cont) = req["continuation"].as_str() {
                        let n = cont.chars().count().div_ceil(3);
                        json!({"id": id, "logprob": expected_logprob(cont), "subword_count": n})
                    } else {
                        json!({"id": id, "error": "no continuation"})
                    };
                    ("200 OK", reply.to_string())
                };
                seen.lock().unwrap().push(req);
                let _ = write!(
                    stream,
                    "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
            }
        });
    }
    HttpMock { url, seen }
}

#[test]
fn http_retries_server_errors_then_succeeds() {
    let server = spawn_http(2, 1);
    let transport = HttpTransport::new(&server.url, Duration::from_secs(5));
    let lm = ExternalProvider::with_transport(Box::new(transport), 2).unwrap();
    assert_eq!(lm.model(), "mock-http");
    let lp = lm.continuation_logprob(&["I", "do", "n't", "think"], "so").unwrap();
    assert!((lp - expected_logprob(" so")).abs() < 1e-12);

    let seen = server.seen.lock().unwrap();
    assert_eq!(seen.len(), 4);
    assert_eq!(seen[0], json!({"id": 0, "handshake": true, "prefix": "", "continuation": null, "want_entropy": false, "want_topk": 0}));
    assert_eq!(seen[3]["prefix"], "I don't think");
    assert_eq!(seen[3]["continuation"], " so");
    assert_eq!(seen[3]["id"], 1);
}

#[test]
fn http_gives_up_after_retries() {
    let server = spawn_http(usize::MAX, 1);
    let transport = HttpTransport::new(&server.url, Duration::from_secs(5));
    match ExternalProvider::with_transport(Box::new(transport), 1) {
        Err(LmError::Transport(msg)) => assert!(msg.contains("503"), "{msg}"),
        Err(e) => panic!("{e}"),
        Ok(_) => panic!("handshake should fail"),
    }
    assert_eq!(server.seen.lock().unwrap().len(), 2);
}

#[test]
fn http_error_field_is_a_protocol_error() {
    let server = spawn_http(0, 1);
    let lm = ExternalProvider::with_transport(
        Box::new(HttpTransport::new(&server.url, Duration::from_secs(5))),
        3,
    )
    .unwrap();
    match lm.next_token_entropy(&["I"]) {
        Err(LmError::Protocol(msg)) => assert_eq!(msg, "no continuation"),
        other => panic!("{other:?}"),
    }
    // protocol errors are not retried
    assert_eq!(server.seen.lock().unwrap().len(), 2);
}

#[test]
fn http_version_mismatch_is_refused() {
    let server = spawn_http(0, 7);
    let config = ProviderConfig {
        kind: ProviderKindConfig::External,
        transport: Transport::Http,
        endpoint: Some(server.url.clone()),
        ..ProviderConfig::default()
    };
    assert!(matches!(ExternalProvider::connect(&config), Err(LmError::Protocol(_))));
}

#[test]
fn featurize_through_the_stdio_sidecar() {
    if !have_python() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("gold_corpus.jsonl");
    assert_ok(&stage(&corpus, dir.path(), &[], "extract"));
    let command = format!("provider.command=[\"python3\", \"{}\"]", mock_path());
    let o = stage(
        &corpus,
        dir.path(),
        &["--set", "provider.kind=external", "--set", "provider.transport=stdio", "--set", &command],
        "featurize",
    );
    assert_ok(&o);
    let (header, rows) = read_csv(&dir.path().join("features.csv"));
    assert_eq!(rows.len(), 12);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    for r in &rows {
        let s: f64 = r[col("sc_onset_surprisal")].parse().unwrap();
        let h: f64 = r[col("sc_onset_entropy")].parse().unwrap();
        assert!(s.is_finite() && h > 0.0, "{r:?}");
    }
    let meta = std::fs::read_to_string(dir.path().join("features.meta.json")).unwrap();
    assert!(meta.contains("mock-3char"), "{meta}");

    let o = stage(
        &corpus,
        dir.path(),
        &["--set", "provider.kind=external", "--set", "provider.transport=stdio", "--set", &command, "--set", "provider.timeout_secs=0"],
        "featurize",
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
