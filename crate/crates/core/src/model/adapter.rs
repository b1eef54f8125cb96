//! External models over a line-delimited JSON protocol.
//!
//! The adapter is a child process speaking one UTF-8 JSON object per line
//! on stdin/stdout:
//!
//! ```text
//! -> {"cmd":"meta"}
//! <- {"d":3,"classes":2}
//! -> {"cmd":"predict","instances":[[0.1,0.2,0.3]]}
//! <- {"probs":[[0.4,0.6]]}
//! ```
//!
//! A reply carrying `"error"` aborts with [`Error::AdapterProtocol`].
//! Requests are serialized per connection.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::Deserialize;
use serde_json::{json, Value};

use super::{check_rows, Predictor, ProbRows};
use crate::error::{Error, Result};

const PROB_TOLERANCE: f64 = 1e-6;

struct Connection {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
}

impl Connection {
    fn roundtrip(&mut self, request: &Value) -> Result<Value> {
        let stdin = self.stdin.as_mut().ok_or_else(|| Error::adapter("adapter stdin closed"))?;
        let mut line = serde_json::to_string(request)?;
        line.push('\n');
        stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| Error::adapter(format!("cannot write to adapter: {e}")))?;

        let mut reply = String::new();
        let n =
            self.stdout.read_line(&mut reply).map_err(|e| Error::adapter(format!("cannot read from adapter: {e}")))?;
        if n == 0 {
            let status = self.child.try_wait().ok().flatten();
            return Err(Error::adapter(match status {
                Some(s) => format!("adapter exited ({s}) without replying"),
                None => "adapter closed its output".to_string(),
            }));
        }
        let value: Value = serde_json::from_str(reply.trim())
            .map_err(|e| Error::adapter(format!("malformed reply {:?}: {e}", reply.trim())))?;
        if let Some(err) = value.get("error") {
            let msg = err.as_str().map(str::to_owned).unwrap_or_else(|| err.to_string());
            return Err(Error::adapter(format!("adapter reported: {msg}")));
        }
        Ok(value)
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        drop(self.stdin.take());
        if matches!(self.child.try_wait(), Ok(None)) {
            let _ = self.child.kill();
        }
        let _ = self.child.wait();
    }
}

#[derive(Deserialize)]
struct Meta {
    d: usize,
    classes: usize,
}

#[derive(Deserialize)]
struct Probs {
    probs: Vec<Vec<f64>>,
}

/// A predictor backed by an adapter process.
pub struct AdapterModel {
    command: String,
    d: usize,
    classes: usize,
    conn: Mutex<Connection>,
}

impl std::fmt::Debug for AdapterModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AdapterModel")
            .field("command", &self.command)
            .field("d", &self.d)
            .field("classes", &self.classes)
            .finish()
    }
}

impl AdapterModel {
    /// Launches `command` through `sh -c` and performs the `meta` handshake.
    pub fn spawn(command: &str) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::adapter(format!("cannot launch {command:?}: {e}")))?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut conn = Connection { child, stdin, stdout };

        let meta: Meta = serde_json::from_value(conn.roundtrip(&json!({"cmd": "meta"}))?)
            .map_err(|e| Error::adapter(format!("bad meta reply: {e}")))?;
        if meta.d == 0 || meta.classes < 2 {
            return Err(Error::adapter(format!(
                "adapter declares d={} classes={}; need d >= 1 and classes >= 2",
                meta.d, meta.classes
            )));
        }
        Ok(AdapterModel { command: command.to_string(), d: meta.d, classes: meta.classes, conn: Mutex::new(conn) })
    }

    pub fn command(&self) -> &str {
        &self.command
    }
}

impl Predictor for AdapterModel {
    fn dims(&self) -> usize {
        self.d
    }

    fn classes(&self) -> usize {
        self.classes
    }

    fn predict(&self, batch: &[Vec<f64>]) -> Result<ProbRows> {
        check_rows(self.d, batch)?;
        if batch.is_empty() {
            return Ok(Vec::new());
        }
        let reply = {
            let mut conn = self.conn.lock().map_err(|_| Error::adapter("adapter connection poisoned"))?;
            conn.roundtrip(&json!({"cmd": "predict", "instances": batch}))?
        };
        let Probs { probs } =
            serde_json::from_value(reply).map_err(|e| Error::adapter(format!("bad predict reply: {e}")))?;
        if probs.len() != batch.len() {
            return Err(Error::adapter(format!("asked for {} rows, got {}", batch.len(), probs.len())));
        }
        for (r, row) in probs.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if row.len() != self.classes
                || row.iter().any(|p| !p.is_finite() || *p < 0.0)
                || (sum - 1.0).abs() > PROB_TOLERANCE
            {
                return Err(Error::adapter(format!("row {r} is not a probability vector: {row:?}")));
            }
        }
        Ok(probs)
    }
}
