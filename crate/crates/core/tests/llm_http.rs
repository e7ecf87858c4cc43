// SPDX-License-Identifier: Apache-2.0

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use rtlcast::llm::{with_retries_sleeping, BackendConfig, HttpBackend, LlmBackend, LlmError, LlmRequest, RetryPolicy};

struct Captured {
    body: String,
    authorization: Option<String>,
}

/// Serve one scripted `(status, body)` per connection, recording requests.
fn stub(script: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Captured>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    thread::spawn(move || {
        for (status, body) in script {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut len = 0usize;
            let mut auth = None;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let l = line.trim_end();
                if l.is_empty() {
                    break;
                }
                if let Some((k, v)) = l.split_once(':') {
                    match k.to_ascii_lowercase().as_str() {
                        "content-length" => len = v.trim().parse().unwrap(),
                        "authorization" => auth = Some(v.trim().to_string()),
                        _ => {}
                    }
                }
            }
            let mut buf = vec![0u8; len];
            reader.read_exact(&mut buf).unwrap();
            log.lock().unwrap().push(Captured {
                body: String::from_utf8(buf).unwrap(),
                authorization: auth,
            });
            let mut stream = reader.into_inner();
            write!(
                stream,
                "HTTP/1.1 {} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                status,
                body.len(),
                body
            )
            .unwrap();
        }
    });
    (url, seen)
}

fn ok_body(text: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": text}, "finish_reason": "stop"}]}).to_string()
}

fn backend(url: &str, key: Option<&str>) -> HttpBackend {
    let cfg = BackendConfig {
        endpoint_url: url.to_string(),
        model_id: "stub-model".into(),
        timeout_s: 10,
        max_attempts: 3,
    };
    HttpBackend::new(&cfg, key.map(str::to_string)).unwrap()
}

#[test]
fn invalid_credential_is_terminal_auth_error() {
    let (url, _) = stub(vec![(401, r#"{"error": "bad key"}"#.into())]);
    let mut b = backend(&url, Some("wrong"));
    let r = with_retries_sleeping(&mut b, &LlmRequest::new("hello", "stub-model"), &RetryPolicy::default(), &mut |_| {});
    match r {
        Err(e @ LlmError::Auth { status: 401, .. }) => assert!(e.to_string().contains("401")),
        other => panic!("expected auth error, got {:?}", other),
    }
}

#[test]
fn rate_limit_twice_then_success() {
    let (url, seen) = stub(vec![(429, "{}".into()), (429, "{}".into()), (200, ok_body("module m; endmodule"))]);
    let mut b = backend(&url, Some("k"));
    let mut sleeps = 0;
    let r = with_retries_sleeping(&mut b, &LlmRequest::new("p", "stub-model"), &RetryPolicy::default(), &mut |_| {
        sleeps += 1
    })
    .unwrap();
    assert_eq!(r.text, "module m; endmodule");
    assert_eq!(r.backend_id, "http:stub-model");
    assert_eq!(seen.lock().unwrap().len(), 3);
    assert_eq!(sleeps, 2);
}

#[test]
fn bad_request_fails_once() {
    let (url, seen) = stub(vec![(400, "nope".into()), (200, ok_body("unused"))]);
    let mut b = backend(&url, None);
    let r = with_retries_sleeping(&mut b, &LlmRequest::new("p", "stub-model"), &RetryPolicy::default(), &mut |_| {});
    assert!(matches!(r, Err(LlmError::Rejected { status: 400, .. })));
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn prompt_is_sent_unmodified() {
    let prompt = "line one\n  `tick` \"quotes\" ünïcode\t{{braces}}\n";
    let (url, seen) = stub(vec![(200, ok_body("x"))]);
    let mut b = backend(&url, Some("secret"));
    let mut req = LlmRequest::new(prompt, "stub-model");
    req.max_output_tokens = 77;
    b.complete(&req).unwrap();
    let seen = seen.lock().unwrap();
    let v: serde_json::Value = serde_json::from_str(&seen[0].body).unwrap();
    assert_eq!(v["messages"][0]["content"], prompt);
    assert_eq!(v["messages"][0]["role"], "user");
    assert_eq!(v["model"], "stub-model");
    assert_eq!(v["temperature"], 0.0);
    assert_eq!(v["max_tokens"], 77);
    assert_eq!(seen[0].authorization.as_deref(), Some("Bearer secret"));
}

#[test]
fn truncation_and_malformed_bodies() {
    let truncated = serde_json::json!({"choices": [{"message": {"content": "mod"}, "finish_reason": "length"}]}).to_string();
    let (url, _) = stub(vec![(200, truncated), (200, "not json".into())]);
    let mut b = backend(&url, None);
    assert!(b.complete(&LlmRequest::new("p", "m")).unwrap().truncated);
    assert!(matches!(b.complete(&LlmRequest::new("p", "m")), Err(LlmError::Protocol(_))));
}

#[test]
fn connection_refused_is_retryable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut b = backend(&format!("http://127.0.0.1:{}/x", port), None);
    let policy = RetryPolicy {
        max_attempts: 2,
        ..RetryPolicy::default()
    };
    let r = with_retries_sleeping(&mut b, &LlmRequest::new("p", "m"), &policy, &mut |_| {});
    assert!(matches!(r, Err(LlmError::RetriesExhausted { attempts: 2, .. })), "{:?}", r);
}
