//! Shared helpers for the CLI integration suites: running the binary,
//! locating the checked-in fixture tree, and a canned-response HTTP stub.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

/// Absolute path to the checked-in fixture tree at the repository root.
pub fn repo_fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .canonicalize()
        .expect("repository fixtures/ exists; regenerate with `socioverse fixtures`")
}

/// Run the binary in `dir` with a scrubbed environment (no ambient project
/// config or credentials leak into tests).
pub fn socioverse(dir: &Path, args: &[&str]) -> Output {
    socioverse_env(dir, args, &[])
}

/// Same, with explicit extra environment variables.
pub fn socioverse_env(dir: &Path, args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_socioverse"));
    cmd.current_dir(dir)
        .env_remove("SOCIOVERSE_CONFIG")
        .env_remove("SOCIOVERSE_API_KEY")
        .args(args);
    for (key, value) in envs {
        cmd.env(key, value);
    }
    cmd.output().expect("binary spawns")
}

pub fn stdout_str(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

pub fn stderr_str(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Panic with the captured streams when the command failed.
pub fn assert_success(output: &Output, what: &str) {
    assert!(
        output.status.success(),
        "{what} failed (status {:?})\nstdout:\n{}\nstderr:\n{}",
        output.status.code(),
        stdout_str(output),
        stderr_str(output)
    );
}

/// Parse the command's stdout as one JSON document.
pub fn json_stdout(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not valid JSON: {e}\nstdout:\n{}",
            stdout_str(output)
        )
    })
}

/// Load a scenario config as a JSON value, rewrite the file references it
/// holds to absolute paths into the checked-in fixtures, apply `patch`, and
/// write it into `dir` as `scenario.json`. Returns the new config path.
pub fn localized_config(
    fixture_scenario_dir: &Path,
    dir: &Path,
    patch: impl FnOnce(&mut serde_json::Value),
) -> PathBuf {
    let source = fixture_scenario_dir.join("scenario.json");
    let mut config: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&source).expect("config readable"))
            .expect("config parses");
    let absolutize = |value: &mut serde_json::Value| {
        if let Some(rel) = value.as_str() {
            let abs = fixture_scenario_dir.join(rel);
            let abs = abs.canonicalize().unwrap_or(abs);
            *value = serde_json::Value::String(abs.display().to_string());
        }
    };
    for key in ["questionnaire", "pool", "schema", "ground_truth"] {
        if let Some(v) = config.get_mut(key) {
            absolutize(v);
        }
    }
    for key in ["targets", "seed_table", "regions"] {
        if let Some(v) = config["population"].get_mut(key) {
            absolutize(v);
        }
    }
    if let Some(v) = config["context"].get_mut("extra_context") {
        absolutize(v);
    }
    patch(&mut config);
    let path = dir.join("scenario.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&config).unwrap()).unwrap();
    path
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
/// The decider receives a global request index and the parsed request body,
/// so scripted failure schedules (for example "429 on every first attempt")
/// stay deterministic even with concurrent clients.
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
