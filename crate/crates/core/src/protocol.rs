//! Client side of the line-delimited JSON protocol spoken by external
//! scorer/converter processes over their standard input and output.
//!
//! ```text
//! {"op":"hello"}                                  -> {"name":..,"version":..,"bounded":bool}
//! {"op":"entail","premise":..,"hypothesis":..}    -> {"score":real}
//! {"op":"convert","question":..}                  -> {"statement":..,"negation":..}
//! ```
//!
//! Exactly one response line per request, in order. A response carrying an
//! `"error"` key reports a failed request; the process stays usable.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("cannot start `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("i/o error talking to the external process: {0}")]
    Io(#[from] std::io::Error),
    #[error("external process closed its output (exited or crashed)")]
    Closed,
    #[error("no response within {0:?}")]
    Timeout(Duration),
    #[error("malformed response `{line}`: {reason}")]
    Malformed { line: String, reason: String },
    #[error("external process reported an error: {0}")]
    Remote(String),
    #[error("response violates the protocol contract: {0}")]
    Contract(String),
}

/// Handshake reply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterInfo {
    pub name: String,
    pub version: String,
    pub bounded: bool,
}

/// One connection to an external adapter process.
pub struct ProtocolClient {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    info: AdapterInfo,
}

impl std::fmt::Debug for ProtocolClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProtocolClient").field("info", &self.info).finish()
    }
}

impl ProtocolClient {
    /// Starts `command` through `sh -c` and performs the handshake.
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, ProtocolError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| ProtocolError::Spawn { command: command.to_string(), source })?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut client = ProtocolClient {
            child,
            stdin,
            lines: rx,
            timeout,
            info: AdapterInfo { name: String::new(), version: String::new(), bounded: false },
        };
        let reply = client.request(&json!({"op": "hello"}))?;
        client.info = serde_json::from_value(reply.clone()).map_err(|e| ProtocolError::Malformed {
            line: reply.to_string(),
            reason: format!("bad handshake: {e}"),
        })?;
        Ok(client)
    }

    pub fn info(&self) -> &AdapterInfo {
        &self.info
    }

    /// Sends one request and waits for its response.
    pub fn request(&mut self, request: &Value) -> Result<Value, ProtocolError> {
        let line = serde_json::to_string(request).expect("json values serialize");
        if let Err(e) = writeln!(self.stdin, "{line}").and_then(|_| self.stdin.flush()) {
            return Err(match e.kind() {
                std::io::ErrorKind::BrokenPipe => ProtocolError::Closed,
                _ => ProtocolError::Io(e),
            });
        }
        let reply = match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(ProtocolError::Io(e)),
            Err(RecvTimeoutError::Timeout) => return Err(ProtocolError::Timeout(self.timeout)),
            Err(RecvTimeoutError::Disconnected) => return Err(ProtocolError::Closed),
        };
        let value: Value = serde_json::from_str(&reply).map_err(|e| ProtocolError::Malformed {
            line: reply.clone(),
            reason: e.to_string(),
        })?;
        if let Some(err) = value.get("error") {
            let msg = err.as_str().map(String::from).unwrap_or_else(|| err.to_string());
            return Err(ProtocolError::Remote(msg));
        }
        Ok(value)
    }

    /// Entailment score of `hypothesis` given `premise`.
    pub fn entail(&mut self, premise: &str, hypothesis: &str) -> Result<f64, ProtocolError> {
        let reply = self.request(&json!({"op": "entail", "premise": premise, "hypothesis": hypothesis}))?;
        let score = reply
            .get("score")
            .and_then(Value::as_f64)
            .ok_or_else(|| ProtocolError::Contract(format!("entail reply lacks a numeric `score`: {reply}")))?;
        if !score.is_finite() {
            return Err(ProtocolError::Contract(format!("non-finite score {score}")));
        }
        if self.info.bounded && !(0.0..=1.0).contains(&score) {
            return Err(ProtocolError::Contract(format!("bounded scorer returned {score}")));
        }
        Ok(score)
    }

    /// Affirmative and negated statement for a yes-no question.
    pub fn convert(&mut self, question: &str) -> Result<(String, String), ProtocolError> {
        let reply = self.request(&json!({"op": "convert", "question": question}))?;
        let field = |key: &str| -> Result<String, ProtocolError> {
            match reply.get(key).and_then(Value::as_str).map(str::trim) {
                Some(s) if !s.is_empty() => Ok(s.to_string()),
                _ => Err(ProtocolError::Contract(format!("convert reply lacks a nonempty `{key}`: {reply}"))),
            }
        };
        Ok((field("statement")?, field("negation")?))
    }
}

impl Drop for ProtocolClient {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
