//! Client for generators running in a separate process.
//!
//! Messages are single-line JSON over the child's stdin/stdout:
//!
//! ```text
//! <- {"hello":{"latent_dim":D,"width":W,"height":H}}
//! -> {"id":N,"z":[f1,...,fD]}
//! <- {"id":N,"rgb_b64":"..."}        (W*H*3 bytes, row-major RGB8)
//! -> {"bye":true}
//! ```

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::OccupancyGrid;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hello {
    pub latent_dim: usize,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct HelloMessage {
    hello: Hello,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub z: Vec<f64>,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: u64,
    pub rgb_b64: String,
}

pub fn encode_request(id: u64, z: &[f64]) -> String {
    serde_json::to_string(&Request { id, z: z.to_vec() }).expect("finite floats serialize")
}

pub fn encode_response(id: u64, grid: &OccupancyGrid) -> String {
    serde_json::to_string(&Response {
        id,
        rgb_b64: B64.encode(grid.to_rgb_bytes()),
    })
    .expect("serializable")
}

pub fn encode_hello(hello: Hello) -> String {
    serde_json::to_string(&HelloMessage { hello }).expect("serializable")
}

pub const BYE: &str = r#"{"bye":true}"#;

pub fn parse_hello(line: &str) -> Result<Hello> {
    let msg: HelloMessage =
        serde_json::from_str(line).map_err(|e| Error::External(format!("malformed handshake {line:?}: {e}")))?;
    let h = msg.hello;
    if h.latent_dim == 0 || h.width == 0 || h.height == 0 {
        return Err(Error::External(format!("handshake has zero dimension: {h:?}")));
    }
    Ok(h)
}

/// Decodes a response line, checking its id and payload length.
pub fn parse_response(line: &str, expected_id: u64, hello: &Hello) -> Result<OccupancyGrid> {
    let resp: Response = serde_json::from_str(line).map_err(|e| Error::External(format!("malformed response: {e}")))?;
    if resp.id != expected_id {
        return Err(Error::External(format!(
            "response id mismatch: expected {expected_id}, got {}",
            resp.id
        )));
    }
    let bytes = B64
        .decode(resp.rgb_b64.as_bytes())
        .map_err(|e| Error::External(format!("malformed response: bad base64: {e}")))?;
    let expected = hello.width * hello.height * 3;
    if bytes.len() != expected {
        return Err(Error::External(format!(
            "malformed response: payload is {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    OccupancyGrid::from_rgb_bytes(hello.width, hello.height, &bytes)
}

struct Channel {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    broken: bool,
}

impl Channel {
    fn recv(&mut self, timeout: Duration, what: &str) -> Result<String> {
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(Error::External(format!("reading {what}: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                let _ = self.child.kill();
                Err(Error::External(format!(
                    "timed out after {timeout:?} waiting for {what}"
                )))
            }
            Err(RecvTimeoutError::Disconnected) => {
                let status = self.child.wait().ok();
                Err(Error::External(match status {
                    Some(s) => format!("process exited ({s}) while waiting for {what}"),
                    None => format!("process exited while waiting for {what}"),
                }))
            }
        }
    }
}

/// A generator process speaking the line protocol. One request is in flight
/// at a time; concurrent callers queue on an internal lock.
pub struct ExternalGenerator {
    channel: Mutex<Channel>,
    hello: Hello,
    timeout: Duration,
}

impl std::fmt::Debug for ExternalGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalGenerator")
            .field("hello", &self.hello)
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl ExternalGenerator {
    /// Spawns `command[0]` with the remaining arguments and waits for its handshake.
    pub fn spawn(command: &[String], timeout: Duration) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::External("empty command line".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::External(format!("failed to start {program:?}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");

        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });

        let mut channel = Channel {
            child,
            stdin,
            lines: rx,
            next_id: 0,
            broken: false,
        };
        let hello = match channel.recv(timeout, "handshake").and_then(|l| parse_hello(&l)) {
            Ok(h) => h,
            Err(e) => {
                let _ = channel.child.kill();
                let _ = channel.child.wait();
                return Err(e);
            }
        };
        Ok(ExternalGenerator {
            channel: Mutex::new(channel),
            hello,
            timeout,
        })
    }

    pub fn hello(&self) -> Hello {
        self.hello
    }

    pub fn generate(&self, z: &[f64]) -> Result<OccupancyGrid> {
        if z.len() != self.hello.latent_dim {
            return Err(Error::LatentDim {
                expected: self.hello.latent_dim,
                got: z.len(),
            });
        }
        let mut ch = self.channel.lock().unwrap_or_else(|e| e.into_inner());
        if ch.broken {
            return Err(Error::External("generator process is no longer usable".into()));
        }
        let id = ch.next_id;
        ch.next_id += 1;
        let result = (|| {
            let mut line = encode_request(id, z);
            line.push('\n');
            ch.stdin
                .write_all(line.as_bytes())
                .and_then(|_| ch.stdin.flush())
                .map_err(|e| Error::External(format!("writing request {id}: {e}")))?;
            let reply = ch.recv(self.timeout, &format!("response {id}"))?;
            parse_response(&reply, id, &self.hello)
        })();
        if result.is_err() {
            ch.broken = true;
        }
        result
    }

    /// Sends the shutdown message and waits for the process to exit.
    pub fn shutdown(mut self) -> Result<()> {
        let ch = self.channel.get_mut().unwrap_or_else(|e| e.into_inner());
        let _ = writeln!(ch.stdin, "{BYE}").and_then(|_| ch.stdin.flush());
        let status = ch
            .child
            .wait()
            .map_err(|e| Error::External(format!("waiting for exit: {e}")))?;
        if status.success() {
            Ok(())
        } else {
            Err(Error::External(format!("process exited with {status}")))
        }
    }
}

impl Drop for ExternalGenerator {
    fn drop(&mut self) {
        if let Ok(ch) = self.channel.get_mut() {
            if let Ok(None) = ch.child.try_wait() {
                let _ = writeln!(ch.stdin, "{BYE}").and_then(|_| ch.stdin.flush());
                std::thread::sleep(Duration::from_millis(10));
                if let Ok(None) = ch.child.try_wait() {
                    let _ = ch.child.kill();
                }
                let _ = ch.child.wait();
            }
        }
    }
}
