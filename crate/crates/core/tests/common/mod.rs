//! Shared helpers for the integration-test suite: tiny fixture builders and
//! a canned-response HTTP stub used by the backend tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use socioverse_core::pool::{AttributeKind, AttributeSchema, Platform, Pool, Post, UserRecord};

// ---------------------------------------------------------------------------
// Pool fixtures
// ---------------------------------------------------------------------------

/// A small schema covering the attribute kinds the tests need.
pub fn schema_fixture() -> Vec<AttributeSchema> {
    vec![
        AttributeSchema {
            name: "gender".into(),
            kind: AttributeKind::Categorical {
                values: vec!["female".into(), "male".into()],
            },
            description: "self-reported gender".into(),
        },
        AttributeSchema {
            name: "age".into(),
            kind: AttributeKind::Categorical {
                values: vec!["18-29".into(), "30-44".into(), "45-64".into(), "65+".into()],
            },
            description: "age bracket".into(),
        },
        AttributeSchema {
            name: "region".into(),
            kind: AttributeKind::Categorical {
                values: (1..=10).map(|i| format!("r{i:02}")).collect(),
            },
            description: "home region".into(),
        },
        AttributeSchema {
            name: "income".into(),
            kind: AttributeKind::Continuous { unit: "CNY/month".into() },
            description: "monthly income".into(),
        },
    ]
}

/// User with posts and no labels.
pub fn user(id: &str, posts: &[String]) -> UserRecord {
    UserRecord {
        user_id: id.to_string(),
        platform: Platform::X,
        posts: posts
            .iter()
            .map(|t| Post { text: t.clone(), timestamp: None, likes: None, comments: None, reposts: None })
            .collect(),
        labels: BTreeMap::new(),
    }
}

/// User with labels and a single placeholder post.
pub fn labeled_user(id: &str, labels: &[(&str, &str)]) -> UserRecord {
    let mut u = user(id, &[format!("post by {id}")]);
    u.labels = labels
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    u
}

/// Pool of labeled users over the fixture schema.
pub fn labeled_pool(users: Vec<UserRecord>) -> Pool {
    Pool::from_records(schema_fixture(), users).unwrap()
}

// ---------------------------------------------------------------------------
// Chat-completions stub server
// ---------------------------------------------------------------------------

/// What the stub should do with one incoming request.
pub enum StubReply {
    /// 200 with a well-formed chat-completions body wrapping the given text.
    Text(String),
    /// Arbitrary status + raw body (for 429s, auth failures, malformed JSON).
    Raw { status: u16, body: String },
}

/// A minimal blocking HTTP/1.1 stub that answers chat-completions POSTs.
///
/// The decider runs under a lock with a global request counter, so scripted
/// failure schedules (for example "429 on every first attempt") stay
/// deterministic even with concurrent clients.
pub struct StubServer {
    pub endpoint: String,
    handle: Option<JoinHandle<()>>,
    hits: Arc<AtomicUsize>,
    shutdown: Arc<AtomicUsize>,
    addr: std::net::SocketAddr,
}

impl StubServer {
    /// Start the stub. `decide` receives (request_index, request_body_json).
    pub fn start<F>(decide: F) -> StubServer
    where
        F: Fn(usize, &serde_json::Value) -> StubReply + Send + Sync + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub");
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        let shutdown = Arc::new(AtomicUsize::new(0));
        let (hits2, shutdown2) = (hits.clone(), shutdown.clone());
        let decide = Arc::new(decide);
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if shutdown2.load(Ordering::SeqCst) == 1 {
                    break;
                }
                let Ok(stream) = stream else { break };
                let idx = hits2.fetch_add(1, Ordering::SeqCst);
                let decide = decide.clone();
                // One thread per connection: requests may arrive concurrently.
                std::thread::spawn(move || {
                    let _ = handle_connection(stream, idx, &*decide);
                });
            }
        });
        StubServer {
            endpoint: format!("http://{addr}/v1/chat/completions"),
            handle: Some(handle),
            hits,
            shutdown,
            addr,
        }
    }

    /// Total requests the stub has accepted so far.
    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.shutdown.store(1, Ordering::SeqCst);
        // Wake the accept loop with one last connection.
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn handle_connection<F>(mut stream: TcpStream, idx: usize, decide: &F) -> std::io::Result<()>
where
    F: Fn(usize, &serde_json::Value) -> StubReply,
{
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut line = String::new();
    reader.read_line(&mut line)?; // request line
    let mut content_length = 0usize;
    loop {
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let header = header.trim_end();
        if header.is_empty() {
            break;
        }
        if let Some(v) = header.to_ascii_lowercase().strip_prefix("content-length:") {
            content_length = v.trim().parse().unwrap_or(0);
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    let parsed: serde_json::Value =
        serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null);

    let (status, reason, body) = match decide(idx, &parsed) {
        StubReply::Text(text) => {
            let body = serde_json::json!({
                "choices": [{"message": {"role": "assistant", "content": text}}]
            })
            .to_string();
            (200, "OK", body)
        }
        StubReply::Raw { status, body } => {
            let reason = match status {
                200 => "OK",
                401 => "Unauthorized",
                429 => "Too Many Requests",
                500 => "Internal Server Error",
                _ => "Status",
            };
            (status, reason, body)
        }
    };
    write!(
        stream,
        "HTTP/1.1 {status} {reason}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
        body.len()
    )?;
    stream.flush()
}

