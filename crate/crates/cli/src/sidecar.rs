//! Client for an external next-token sidecar.
//!
//! Every exchange is one JSON object per line. A request carries
//! `{id, prefix, continuation, want_entropy, want_topk}` and is answered by
//! `{id, logprob, entropy, topk, subword_count}` or `{id, error}`. The first
//! exchange is a handshake (`{"id":0,"handshake":true}`) answered with the
//! model name and protocol version.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use uidthat_core::lm::{detokenize, needs_leading_space, ProviderKind};
use uidthat_core::{Distribution, LanguageModel, LmError};

use crate::config::{ProviderConfig, Transport};

pub const PROTOCOL_VERSION: u32 = 1;

/// Log-probabilities slightly above zero are tolerated as rounding noise.
const LOGPROB_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub handshake: bool,
    #[serde(default)]
    pub prefix: String,
    #[serde(default)]
    pub continuation: Option<String>,
    #[serde(default)]
    pub want_entropy: bool,
    #[serde(default)]
    pub want_topk: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Response {
    pub id: u64,
    pub logprob: Option<f64>,
    pub entropy: Option<f64>,
    pub topk: Vec<(String, f64)>,
    pub subword_count: Option<u32>,
    pub error: Option<String>,
    pub model: Option<String>,
    pub protocol_version: Option<u32>,
}

/// One request/response round trip. Implementations must allow several
/// exchanges in flight at once.
pub trait SidecarTransport: Send + Sync {
    fn exchange(&self, request: &Request) -> Result<Response, LmError>;
    fn describe(&self) -> String;
}

pub struct HttpTransport {
    agent: ureq::Agent,
    endpoint: String,
}

impl HttpTransport {
    pub fn new(endpoint: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpTransport {
            agent,
            endpoint: endpoint.to_string(),
        }
    }
}

impl SidecarTransport for HttpTransport {
    fn exchange(&self, request: &Request) -> Result<Response, LmError> {
        let mut response = self
            .agent
            .post(&self.endpoint)
            .send_json(request)
            .map_err(|e| LmError::Transport(format!("{}: {e}", self.endpoint)))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| LmError::Transport(format!("{}: {e}", self.endpoint)))?;
        if status >= 500 {
            return Err(LmError::Transport(format!("{} answered HTTP {status}", self.endpoint)));
        }
        match serde_json::from_str::<Response>(body.trim()) {
            Ok(parsed) if parsed.error.is_some() || status < 400 => Ok(parsed),
            Ok(_) => Err(LmError::Protocol(format!("{} answered HTTP {status}", self.endpoint))),
            Err(e) => Err(LmError::Protocol(format!("malformed response: {e}"))),
        }
    }

    fn describe(&self) -> String {
        format!("http {}", self.endpoint)
    }
}

type Pending = Arc<Mutex<HashMap<u64, Sender<Response>>>>;

/// Talks to a child process over its stdin/stdout. A reader thread routes
/// each response line to the waiting request by id.
pub struct StdioTransport {
    command: Vec<String>,
    child: Mutex<Child>,
    stdin: Mutex<ChildStdin>,
    pending: Pending,
    alive: Arc<AtomicBool>,
    timeout: Duration,
}

impl StdioTransport {
    pub fn spawn(command: &[String], timeout: Duration) -> Result<Self, LmError> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| LmError::Config("empty sidecar command".to_string()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| LmError::Transport(format!("cannot start {program}: {e}")))?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");

        let pending: Pending = Arc::default();
        let alive = Arc::new(AtomicBool::new(true));
        {
            let pending = Arc::clone(&pending);
            let alive = Arc::clone(&alive);
            thread::spawn(move || {
                for line in BufReader::new(stdout).lines() {
                    let Ok(line) = line else { break };
                    if line.trim().is_empty() {
                        continue;
                    }
                    match serde_json::from_str::<Response>(&line) {
                        Ok(resp) => {
                            let waiter = pending.lock().unwrap().remove(&resp.id);
                            match waiter {
                                Some(tx) => {
                                    let _ = tx.send(resp);
                                }
                                None => log::warn!("sidecar answered unknown request id {}", resp.id),
                            }
                        }
                        Err(e) => log::warn!("unparseable sidecar line: {e}"),
                    }
                }
                alive.store(false, Ordering::SeqCst);
                // dropping the senders wakes every waiter
                pending.lock().unwrap().clear();
            });
        }
        Ok(StdioTransport {
            command: command.to_vec(),
            child: Mutex::new(child),
            stdin: Mutex::new(stdin),
            pending,
            alive,
            timeout,
        })
    }
}

impl SidecarTransport for StdioTransport {
    fn exchange(&self, request: &Request) -> Result<Response, LmError> {
        if !self.alive.load(Ordering::SeqCst) {
            return Err(LmError::Transport("sidecar process has exited".to_string()));
        }
        let (tx, rx) = mpsc::channel();
        self.pending.lock().unwrap().insert(request.id, tx);
        let mut line = serde_json::to_string(request).expect("request serializes");
        line.push('\n');
        let written = {
            let mut stdin = self.stdin.lock().unwrap();
            stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush())
        };
        if let Err(e) = written {
            self.pending.lock().unwrap().remove(&request.id);
            return Err(LmError::Transport(format!("write to sidecar failed: {e}")));
        }
        match rx.recv_timeout(self.timeout) {
            Ok(resp) => Ok(resp),
            Err(RecvTimeoutError::Timeout) => {
                self.pending.lock().unwrap().remove(&request.id);
                Err(LmError::Transport(format!(
                    "no answer to request {} within {:?}",
                    request.id, self.timeout
                )))
            }
            Err(RecvTimeoutError::Disconnected) => {
                Err(LmError::Transport("sidecar process has exited".to_string()))
            }
        }
    }

    fn describe(&self) -> String {
        format!("stdio {}", self.command.join(" "))
    }
}

impl Drop for StdioTransport {
    fn drop(&mut self) {
        if let Ok(child) = self.child.get_mut() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// A [`LanguageModel`] backed by a sidecar. Only the log-probability and
/// entropy queries are available; full distributions are not transferred.
pub struct ExternalProvider {
    transport: Box<dyn SidecarTransport>,
    next_id: AtomicU64,
    retries: u32,
    model: String,
}

impl ExternalProvider {
    pub fn connect(config: &ProviderConfig) -> Result<Self, LmError> {
        let transport: Box<dyn SidecarTransport> = match config.transport {
            Transport::Http => Box::new(HttpTransport::new(
                config.endpoint.as_deref().unwrap_or_default(),
                config.timeout(),
            )),
            Transport::Stdio => Box::new(StdioTransport::spawn(&config.command, config.timeout())?),
        };
        Self::with_transport(transport, config.retries)
    }

    /// Performs the handshake and refuses a sidecar speaking another
    /// protocol version.
    pub fn with_transport(transport: Box<dyn SidecarTransport>, retries: u32) -> Result<Self, LmError> {
        let mut provider = ExternalProvider {
            transport,
            next_id: AtomicU64::new(1),
            retries,
            model: String::new(),
        };
        let hello = provider.call(Request {
            id: 0,
            handshake: true,
            prefix: String::new(),
            continuation: None,
            want_entropy: false,
            want_topk: 0,
        })?;
        match hello.protocol_version {
            Some(PROTOCOL_VERSION) => {}
            Some(v) => {
                return Err(LmError::Protocol(format!(
                    "sidecar speaks protocol version {v}, this client needs {PROTOCOL_VERSION}"
                )))
            }
            None => return Err(LmError::Protocol("handshake lacks protocol_version".to_string())),
        }
        provider.model = hello.model.unwrap_or_else(|| "unknown".to_string());
        Ok(provider)
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    fn call(&self, request: Request) -> Result<Response, LmError> {
        let mut attempt = 0;
        loop {
            match self.transport.exchange(&request) {
                Ok(resp) => {
                    if resp.id != request.id {
                        return Err(LmError::Protocol(format!(
                            "response id {} for request {}",
                            resp.id, request.id
                        )));
                    }
                    if let Some(msg) = resp.error {
                        return Err(LmError::Protocol(msg));
                    }
                    return Ok(resp);
                }
                Err(e) if e.is_retryable() && attempt < self.retries => {
                    attempt += 1;
                    log::warn!("{e}; retry {attempt}/{}", self.retries);
                    thread::sleep(Duration::from_millis(100 * u64::from(attempt)));
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn request(&self, prefix: &[&str], continuation: Option<String>, want_entropy: bool) -> Request {
        Request {
            id: self.next_id.fetch_add(1, Ordering::Relaxed),
            handshake: false,
            prefix: detokenize(prefix),
            continuation,
            want_entropy,
            want_topk: 0,
        }
    }
}

/// The continuation as it would appear after the detokenized prefix.
pub fn continuation_text(prefix: &[&str], word: &str) -> String {
    let glued = prefix.last().is_none_or(|t| matches!(*t, "(" | "[" | "{" | "$"));
    if glued || !needs_leading_space(word) {
        word.to_string()
    } else {
        format!(" {word}")
    }
}

impl LanguageModel for ExternalProvider {
    fn kind(&self) -> ProviderKind {
        ProviderKind::External
    }

    fn describe(&self) -> String {
        format!("external model={} via {}", self.model, self.transport.describe())
    }

    fn next_token_distribution(&self, _prefix: &[&str]) -> Result<Distribution, LmError> {
        Err(LmError::Unsupported("full next-token distributions"))
    }

    fn continuation_logprob(&self, prefix: &[&str], word: &str) -> Result<f64, LmError> {
        if word.is_empty() {
            return Err(LmError::EmptyWord);
        }
        let resp = self.call(self.request(prefix, Some(continuation_text(prefix, word)), false))?;
        if resp.subword_count == Some(0) {
            return Err(LmError::EmptyWord);
        }
        match resp.logprob {
            Some(lp) if lp.is_finite() && lp <= LOGPROB_SLACK => Ok(lp.min(0.0)),
            Some(lp) => Err(LmError::Protocol(format!("invalid log-probability {lp}"))),
            None => Err(LmError::Protocol("response lacks logprob".to_string())),
        }
    }

    fn next_token_entropy(&self, prefix: &[&str]) -> Result<f64, LmError> {
        let resp = self.call(self.request(prefix, None, true))?;
        match resp.entropy {
            Some(h) if h.is_finite() && h >= 0.0 => Ok(h),
            Some(h) => Err(LmError::Protocol(format!("invalid entropy {h}"))),
            None => Err(LmError::Protocol("response lacks entropy".to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuation_spacing() {
        assert_eq!(continuation_text(&["I", "think"], "you"), " you");
        assert_eq!(continuation_text(&["I", "think"], "'s"), "'s");
        assert_eq!(continuation_text(&[], "you"), "you");
        assert_eq!(continuation_text(&["("], "you"), "you");
    }

    #[test]
    fn handshake_request_shape() {
        let r = Request {
            id: 0,
            handshake: true,
            prefix: String::new(),
            continuation: None,
            want_entropy: false,
            want_topk: 0,
        };
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["handshake"], true);
        let plain = Request { handshake: false, ..r };
        let v: serde_json::Value = serde_json::to_value(&plain).unwrap();
        assert!(v.get("handshake").is_none());
        assert!(v["continuation"].is_null());
    }
}
