//! Agent backends: the deterministic rule oracle and the HTTP LLM client.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::scenario::SimulationPlan;
use crate::synthesis::AgentProfile;

/// Environment variable holding the HTTP backend's API key.
pub const API_KEY_ENV: &str = "SOCIOVERSE_API_KEY";

/// Why a backend call failed, from the runner's point of view.
#[derive(Debug, Clone)]
pub enum CallError {
    /// Transient: worth retrying after a backoff (rate limits, timeouts,
    /// server errors, malformed bodies).
    Retryable(String),
    /// Permanent: retrying cannot help (authentication, client errors).
    Fatal(String),
}

impl std::fmt::Display for CallError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CallError::Retryable(m) | CallError::Fatal(m) => f.write_str(m),
        }
    }
}

/// Something that can answer a rendered prompt for one agent.
///
/// Implementations must be callable from multiple worker threads at once.
pub trait AgentBackend: Sync {
    /// Short identifier recorded in run manifests.
    fn name(&self) -> String;

    /// Produce the raw response text for one agent.
    fn complete(
        &self,
        prompt: &str,
        agent: &AgentProfile,
        plan: &SimulationPlan,
    ) -> std::result::Result<String, CallError>;
}

// ---------------------------------------------------------------------------
// Rule oracle
// ---------------------------------------------------------------------------

/// Pick an option index for (agent, question, seed) by hashing the three
/// together with FNV-1a (64-bit) and reducing modulo the option count.
///
/// The inputs are joined with 0x1F (ASCII unit separator) so that, for
/// example, ("ab", "c") and ("a", "bc") hash differently; the seed enters as
/// its eight little-endian bytes.
pub fn rule_oracle_pick(agent_id: &str, question_id: &str, seed: u64, n_options: usize) -> usize {
    const OFFSET_BASIS: u64 = 0xcbf29ce484222325;
    const PRIME: u64 = 0x100000001b3;
    let mut hash = OFFSET_BASIS;
    let sep = [0x1fu8];
    let seed_bytes = seed.to_le_bytes();
    for chunk in [
        agent_id.as_bytes(),
        &sep[..],
        question_id.as_bytes(),
        &sep[..],
        &seed_bytes[..],
    ] {
        for &byte in chunk {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(PRIME);
        }
    }
    (hash % n_options.max(1) as u64) as usize
}

/// A deterministic stand-in backend: answers every question by hashing the
/// agent id, question id, and plan seed. Useful for end-to-end tests,
/// closed-loop evaluation, and dry runs — no network, no nondeterminism.
pub struct RuleOracle;

impl AgentBackend for RuleOracle {
    fn name(&self) -> String {
        "rule_oracle".into()
    }

    fn complete(
        &self,
        _prompt: &str,
        agent: &AgentProfile,
        plan: &SimulationPlan,
    ) -> std::result::Result<String, CallError> {
        let mut lines = Vec::with_capacity(plan.questionnaire.questions.len());
        for q in &plan.questionnaire.questions {
            let pick = rule_oracle_pick(&agent.agent_id, &q.id, plan.seed, q.options.len());
            lines.push(format!("{}: {}", q.id, q.options[pick].label));
        }
        Ok(lines.join("\n"))
    }
}

// ---------------------------------------------------------------------------
// HTTP LLM backend
// ---------------------------------------------------------------------------

/// Connection settings for a chat-completions style HTTP endpoint.
#[derive(Debug, Clone)]
pub struct HttpLlmConfig {
    /// Full URL of the completions endpoint.
    pub endpoint: String,
    /// Model name sent in the request body.
    pub model: String,
    /// Bearer token; falls back to the `SOCIOVERSE_API_KEY` environment
    /// variable when unset.
    pub api_key: Option<String>,
    /// Per-request timeout.
    pub timeout_secs: u64,
    /// Optional requests-per-minute cap shared by all workers.
    pub rpm_limit: Option<u32>,
}

impl Default for HttpLlmConfig {
    fn default() -> Self {
        HttpLlmConfig {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: "default".into(),
            api_key: None,
            timeout_secs: 60,
            rpm_limit: None,
        }
    }
}

/// Blocking HTTP client for chat-completions APIs.
pub struct HttpLlm {
    config: HttpLlmConfig,
    client: reqwest::blocking::Client,
    api_key: Option<String>,
    /// Earliest instant the next request may start, under the rpm cap.
    gate: Option<Mutex<Instant>>,
}

impl HttpLlm {
    pub fn new(config: HttpLlmConfig) -> HttpLlm {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .expect("HTTP client construction cannot fail with static settings");
        let api_key = config
            .api_key
            .clone()
            .or_else(|| std::env::var(API_KEY_ENV).ok());
        let gate = config.rpm_limit.map(|_| Mutex::new(Instant::now()));
        HttpLlm { config, client, api_key, gate }
    }

    /// Block until the rpm cap admits another request.
    fn wait_for_slot(&self) {
        let (Some(gate), Some(rpm)) = (&self.gate, self.config.rpm_limit) else {
            return;
        };
        let interval = Duration::from_secs_f64(60.0 / rpm.max(1) as f64);
        let sleep_until = {
            let mut next = gate.lock().expect("rpm gate poisoned");
            let slot = (*next).max(Instant::now());
            *next = slot + interval;
            slot
        };
        let now = Instant::now();
        if sleep_until > now {
            std::thread::sleep(sleep_until - now);
        }
    }
}

impl AgentBackend for HttpLlm {
    fn name(&self) -> String {
        format!("http:{}", self.config.model)
    }

    fn complete(
        &self,
        prompt: &str,
        _agent: &AgentProfile,
        plan: &SimulationPlan,
    ) -> std::result::Result<String, CallError> {
        self.wait_for_slot();
        let body = serde_json::json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": plan.backend.temperature,
            "max_tokens": plan.backend.max_tokens,
        });
        let mut request = self.client.post(&self.config.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request
            .send()
            .map_err(|e| CallError::Retryable(format!("transport error: {e}")))?;
        let status = response.status();
        if status.is_success() {
            let parsed: serde_json::Value = response
                .json()
                .map_err(|e| CallError::Retryable(format!("malformed response body: {e}")))?;
            return parsed["choices"][0]["message"]["content"]
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| {
                    CallError::Retryable("response body lacks choices[0].message.content".into())
                });
        }
        let code = status.as_u16();
        let message = format!("HTTP {code} from {}", self.config.endpoint);
        match code {
            401 | 403 => Err(CallError::Fatal(format!("{message}: authentication rejected"))),
            408 | 429 => Err(CallError::Retryable(message)),
            500..=599 => Err(CallError::Retryable(message)),
            _ => Err(CallError::Fatal(message)),
        }
    }
}
