use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use capkit::metrics::{fense, fense_star, FenseConfig, FluencyBackend, RemoteScorer, SimilarityBackend};
use capkit::{Metric, Scorer};
use serde_json::{json, Value};

struct Request {
    method: String,
    path: String,
    body: Value,
}

type Handler = fn(&Request) -> (u16, String);

/// Serves HTTP/1.1 requests on a local port with `handler`, reporting each
/// parsed request on the returned channel.
fn serve(handler: Handler) -> (String, mpsc::Receiver<(String, String, Value)>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { break };
            let tx = tx.clone();
            thread::spawn(move || handle(stream, handler, tx));
        }
    });
    (format!("http://{addr}"), rx)
}

fn handle(stream: TcpStream, handler: Handler, tx: mpsc::Sender<(String, String, Value)>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut line = String::new();
    if reader.read_line(&mut line).unwrap_or(0) == 0 {
        return;
    }
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or_default().to_owned();
    let path = parts.next().unwrap_or_default().to_owned();
    let mut len = 0usize;
    loop {
        let mut h = String::new();
        reader.read_line(&mut h).unwrap();
        let h = h.trim_end();
        if h.is_empty() {
            break;
        }
        if let Some((k, v)) = h.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                len = v.trim().parse().unwrap();
            }
        }
    }
    let mut body = vec![0u8; len];
    reader.read_exact(&mut body).unwrap();
    let body: Value = if body.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&body).unwrap()
    };
    let req = Request { method, path, body };
    let _ = tx.send((req.method.clone(), req.path.clone(), req.body.clone()));
    let (status, payload) = handler(&req);
    let mut stream = stream;
    let _ = write!(
        stream,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    );
}

fn well_behaved(req: &Request) -> (u16, String) {
    match (req.method.as_str(), req.path.as_str()) {
        ("GET", "/healthz") => (200, "{}".into()),
        ("POST", "/similarity") => {
            let hyp = req.body["hypothesis"].as_str().unwrap();
            let refs = req.body["references"].as_array().unwrap();
            let score = if refs.iter().any(|r| r.as_str() == Some(hyp)) {
                1.0
            } else {
                0.25
            };
            (200, json!({ "score": score }).to_string())
        }
        ("POST", "/fluency") => {
            let s = req.body["sentence"].as_str().unwrap();
            let p = if s.ends_with(" the") { 0.95 } else { 0.1 };
            (200, json!({ "error_probability": p }).to_string())
        }
        _ => (404, "{}".into()),
    }
}

#[test]
fn protocol_shapes() {
    let (url, rx) = serve(well_behaved);
    let remote = RemoteScorer::new(format!("{url}/"), Duration::from_secs(5));
    remote.health_check().unwrap();
    let (m, p, _) = rx.recv().unwrap();
    assert_eq!((m.as_str(), p.as_str()), ("GET", "/healthz"));

    let refs = vec!["a dog barks".to_owned()];
    assert_eq!(remote.similarity("a dog barks", &refs).unwrap(), 1.0);
    let (m, p, body) = rx.recv().unwrap();
    assert_eq!((m.as_str(), p.as_str()), ("POST", "/similarity"));
    assert_eq!(
        body,
        json!({"hypothesis": "a dog barks", "references": ["a dog barks"]})
    );

    assert_eq!(remote.error_probability("a dog barks").unwrap(), 0.1);
    let (_, p, body) = rx.recv().unwrap();
    assert_eq!(p, "/fluency");
    assert_eq!(body, json!({"sentence": "a dog barks"}));
}

#[test]
fn fense_through_remote() {
    let (url, _rx) = serve(well_behaved);
    let remote = RemoteScorer::new(url, Duration::from_secs(5));
    let refs = vec!["a dog barks".to_owned(), "rain".to_owned()];
    let cfg = FenseConfig::default();
    // one call per reference, mean aggregated
    let star = fense_star("a dog barks", &refs, &remote, &cfg).unwrap();
    assert!((star.value - 0.625).abs() < 1e-12);
    let penalized = fense("a dog barks the", &refs, &remote, &remote, &cfg).unwrap();
    assert!((penalized.value - 0.25 * 0.1).abs() < 1e-12);

    let scorer = Scorer {
        similarity: Some(&remote),
        fluency: Some(&remote),
        ..Scorer::default()
    };
    let s = scorer.score(Metric::Fense, "a dog barks", &refs).unwrap();
    assert!((s.value - 0.625).abs() < 1e-12);
}

#[test]
fn non_200_is_backend_error() {
    let (url, _rx) = serve(|_| (500, "{}".into()));
    let remote = RemoteScorer::new(url, Duration::from_secs(5));
    assert!(remote.health_check().unwrap_err().is_backend());
    assert!(remote.similarity("a", &["a".into()]).unwrap_err().is_backend());
    assert!(remote.error_probability("a").unwrap_err().is_backend());
}

#[test]
fn malformed_and_out_of_range_bodies() {
    let (url, _rx) = serve(|req| match req.path.as_str() {
        "/similarity" => (200, r#"{"score": 1.5}"#.into()),
        _ => (200, "not json".into()),
    });
    let remote = RemoteScorer::new(url, Duration::from_secs(5));
    assert!(remote.similarity("a", &["a".into()]).unwrap_err().is_backend());
    assert!(remote.error_probability("a").unwrap_err().is_backend());
}

#[test]
fn negative_similarity_passes_through() {
    let (url, _rx) = serve(|_| (200, r#"{"score": -0.5}"#.into()));
    let remote = RemoteScorer::new(url, Duration::from_secs(5));
    assert_eq!(remote.similarity("a", &["b".into()]).unwrap(), -0.5);
}

#[test]
fn timeout_is_backend_error() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        let mut held = Vec::new();
        for s in listener.incoming().flatten() {
            held.push(s);
        }
    });
    let remote = RemoteScorer::new(format!("http://{addr}"), Duration::from_millis(200));
    let err = remote.similarity("a", &["a".into()]).unwrap_err();
    assert!(err.is_backend(), "{err}");
}

#[test]
fn unreachable_is_backend_error() {
    let port = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let remote = RemoteScorer::new(format!("http://127.0.0.1:{port}"), Duration::from_secs(2));
    assert!(remote.health_check().unwrap_err().is_backend());
}
