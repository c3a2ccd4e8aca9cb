//! Wire-contract tests for the HTTP surfaces: the completion backend
//! (`POST /v1/complete`) and the embedding provider (`POST /embed`), served
//! by a minimal in-process HTTP listener.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::time::Duration;

use horae::abstraction::{EmbeddingClientProvider, SimilarityProvider, SimilarityRelation};
use horae::ast::{BasicEvent, ComponentKind, EventComponent, EventId};
use horae::pipeline::{
    BackendError, BackendRequest, HttpBackend, HttpBackendConfig, Phase, TransformerBackend,
};

/// Serves scripted (status, body) responses, one connection each, and sends
/// the raw request text back over a channel.
fn spawn_server(responses: Vec<(u16, String)>) -> (String, mpsc::Receiver<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        for (status, body) in responses {
            let (mut stream, _) = match listener.accept() {
                Ok(pair) => pair,
                Err(_) => return,
            };
            stream
                .set_read_timeout(Some(Duration::from_secs(5)))
                .unwrap();
            let mut request = Vec::new();
            let mut buffer = [0u8; 4096];
            // Read headers, then exactly Content-Length body bytes.
            let (mut header_end, mut content_length) = (None, 0usize);
            loop {
                let n = match stream.read(&mut buffer) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => n,
                };
                request.extend_from_slice(&buffer[..n]);
                if header_end.is_none() {
                    if let Some(pos) = find_header_end(&request) {
                        header_end = Some(pos);
                        let headers = String::from_utf8_lossy(&request[..pos]);
                        content_length = headers
                            .lines()
                            .find_map(|l| {
                                let (name, value) = l.split_once(':')?;
                                name.eq_ignore_ascii_case("content-length")
                                    .then(|| value.trim().parse().ok())?
                            })
                            .unwrap_or(0);
                    }
                }
                if let Some(pos) = header_end {
                    if request.len() >= pos + content_length {
                        break;
                    }
                }
            }
            let _ = tx.send(String::from_utf8_lossy(&request).into_owned());
            let reason = if status == 200 { "OK" } else { "Error" };
            let response = format!(
                "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.write_all(response.as_bytes());
        }
    });
    (format!("http://{addr}"), rx)
}

fn find_header_end(bytes: &[u8]) -> Option<usize> {
    bytes
        .windows(4)
        .position(|w| w == b"\r\n\r\n")
        .map(|p| p + 4)
}

fn fast_config(base_url: String) -> HttpBackendConfig {
    let mut config = HttpBackendConfig::new(base_url);
    config.timeout = Duration::from_secs(5);
    config.initial_backoff = Duration::from_millis(1);
    config
}

#[test]
fn completion_request_carries_prompt_and_bearer_token() {
    let (url, requests) = spawn_server(vec![(200, r#"{"text": "a; b"}"#.to_owned())]);
    let mut config = fast_config(url);
    config.bearer_token = Some("secret-token".to_owned());
    let backend = HttpBackend::new(config);
    let response = backend
        .complete(&BackendRequest {
            phase: Phase::EventExtraction,
            prompt: "hello world".to_owned(),
        })
        .unwrap();
    assert_eq!(response, "a; b");

    let raw = requests.recv_timeout(Duration::from_secs(5)).unwrap();
    assert!(raw.starts_with("POST /v1/complete HTTP/1.1"), "{raw}");
    assert!(raw.contains("authorization: Bearer secret-token"), "{raw}");
    assert!(raw.ends_with(r#"{"prompt":"hello world"}"#), "{raw}");
}

#[test]
fn transient_server_errors_are_retried() {
    let (url, requests) = spawn_server(vec![
        (500, "oops".to_owned()),
        (500, "oops".to_owned()),
        (200, r#"{"text": "recovered"}"#.to_owned()),
    ]);
    let backend = HttpBackend::new(fast_config(url));
    let response = backend
        .complete(&BackendRequest {
            phase: Phase::LogicExtraction,
            prompt: "p".to_owned(),
        })
        .unwrap();
    assert_eq!(response, "recovered");
    let mut served = 0;
    while requests.recv_timeout(Duration::from_millis(200)).is_ok() {
        served += 1;
    }
    assert_eq!(served, 3, "two failures plus the success");
}

#[test]
fn connection_refused_is_a_transport_error() {
    let port = {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        listener.local_addr().unwrap().port()
    };
    let mut config = fast_config(format!("http://127.0.0.1:{port}"));
    config.retries = 1;
    let backend = HttpBackend::new(config);
    let err = backend
        .complete(&BackendRequest {
            phase: Phase::PatternMatching,
            prompt: "p".to_owned(),
        })
        .unwrap_err();
    assert!(matches!(err, BackendError::Transport { .. }), "{err}");
}

#[test]
fn malformed_completion_body_is_not_retried() {
    let (url, requests) = spawn_server(vec![(200, "not json".to_owned())]);
    let backend = HttpBackend::new(fast_config(url));
    let err = backend
        .complete(&BackendRequest {
            phase: Phase::EventExtraction,
            prompt: "p".to_owned(),
        })
        .unwrap_err();
    assert!(matches!(err, BackendError::BadResponse { .. }), "{err}");
    let mut served = 0;
    while requests.recv_timeout(Duration::from_millis(200)).is_ok() {
        served += 1;
    }
    assert_eq!(served, 1, "malformed payloads must not be retried");
}

fn sample_event(id: &str, text: &str) -> BasicEvent {
    BasicEvent::new(
        EventId::from(id),
        vec![EventComponent::new(ComponentKind::Object, text).unwrap()],
        None,
        None,
    )
    .unwrap()
}

#[test]
fn embedding_client_speaks_the_embed_protocol() {
    let (url, requests) = spawn_server(vec![(
        200,
        r#"{"vectors": [[0.1, 0.2, 0.3], [0.1, 0.2, 0.3]]}"#.to_owned(),
    )]);
    let provider = EmbeddingClientProvider::new(url, 0.85);
    let a = sample_event("e1", "milk is sold");
    let b = sample_event("e2", "the milk gets sold");
    let judgment = provider.judge(&a, &b).unwrap();
    assert_eq!(judgment.relation, SimilarityRelation::Equivalent);
    assert!((judgment.score - 1.0).abs() < 1e-9);

    let raw = requests.recv_timeout(Duration::from_secs(5)).unwrap();
    assert!(raw.starts_with("POST /embed HTTP/1.1"), "{raw}");
    assert!(
        raw.ends_with(r#"{"texts":["milk is sold","the milk gets sold"]}"#),
        "{raw}"
    );
}

#[test]
fn embedding_client_reports_negation_via_parity() {
    let (url, _requests) = spawn_server(vec![(
        200,
        r#"{"vectors": [[1.0, 0.0], [0.9, 0.1]]}"#.to_owned(),
    )]);
    let provider = EmbeddingClientProvider::new(url, 0.85);
    let a = sample_event("e1", "the report is filed");
    let b = sample_event("e2", "the report is not filed");
    let judgment = provider.judge(&a, &b).unwrap();
    assert_eq!(judgment.relation, SimilarityRelation::Negation);
}

#[test]
fn orthogonal_embeddings_are_unrelated() {
    let (url, _requests) = spawn_server(vec![(
        200,
        r#"{"vectors": [[1.0, 0.0], [0.0, 1.0]]}"#.to_owned(),
    )]);
    let provider = EmbeddingClientProvider::new(url, 0.85);
    let judgment = provider
        .judge(&sample_event("e1", "a"), &sample_event("e2", "b"))
        .unwrap();
    assert_eq!(judgment.relation, SimilarityRelation::Unrelated);
    assert_eq!(judgment.score, 0.0);
}

#[test]
fn mismatched_vector_counts_are_bad_responses() {
    let (url, _requests) = spawn_server(vec![(200, r#"{"vectors": [[1.0]]}"#.to_owned())]);
    let provider = EmbeddingClientProvider::new(url, 0.85);
    let err = provider
        .judge(&sample_event("e1", "a"), &sample_event("e2", "b"))
        .unwrap_err();
    assert!(err.to_string().contains("malformed"), "{err}");
}
