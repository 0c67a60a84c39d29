//! Line-delimited JSON protocol for out-of-process oracles.
//!
//! The server speaks first with a handshake line, then answers one response
//! line per request line. Responses carry the request id and may arrive in
//! any order.

use super::oracle::{OracleError, OracleRequest, Predictor};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError, Sender};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

pub const PROTOCOL: &str = "coedit-oracle/1";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Handshake {
    pub proto: String,
    pub max_concurrency: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

type Waiters = Arc<Mutex<HashMap<u64, Sender<Result<String, OracleError>>>>>;

/// Client side of the protocol over any byte stream pair.
pub struct ProtocolClient {
    writer: Mutex<Box<dyn Write + Send>>,
    waiters: Waiters,
    next_id: AtomicU64,
    in_flight: Mutex<usize>,
    slot_freed: Condvar,
    max_concurrency: usize,
    timeout: Duration,
    child: Option<Mutex<Child>>,
}

impl ProtocolClient {
    /// Waits up to `timeout` for the handshake, then serves requests.
    pub fn new(
        reader: Box<dyn BufRead + Send>,
        writer: Box<dyn Write + Send>,
        timeout: Duration,
    ) -> Result<Self, OracleError> {
        let waiters: Waiters = Arc::default();
        let (hs_tx, hs_rx) = mpsc::channel();
        let w = Arc::clone(&waiters);
        std::thread::spawn(move || read_responses(reader, hs_tx, w));
        let handshake = match hs_rx.recv_timeout(timeout) {
            Ok(h) => h?,
            Err(RecvTimeoutError::Timeout) => return Err(OracleError::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                return Err(OracleError::Transport("oracle closed before the handshake".into()))
            }
        };
        if handshake.proto != PROTOCOL {
            return Err(OracleError::Protocol(format!(
                "expected protocol {PROTOCOL}, oracle speaks {:?}",
                handshake.proto
            )));
        }
        Ok(Self {
            writer: Mutex::new(writer),
            waiters,
            next_id: AtomicU64::new(1),
            in_flight: Mutex::new(0),
            slot_freed: Condvar::new(),
            max_concurrency: handshake.max_concurrency.max(1),
            timeout,
            child: None,
        })
    }

    /// Spawns `command` (split with shell quoting rules) and talks to it
    /// over its standard streams; its standard error is inherited.
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, OracleError> {
        let argv = shlex::split(command)
            .filter(|a| !a.is_empty())
            .ok_or_else(|| OracleError::Transport(format!("cannot parse command {command:?}")))?;
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| OracleError::Transport(format!("cannot start {:?}: {e}", argv[0])))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        match Self::new(Box::new(BufReader::new(stdout)), Box::new(stdin), timeout) {
            Ok(mut client) => {
                client.child = Some(Mutex::new(child));
                Ok(client)
            }
            Err(e) => {
                let _ = child.kill();
                let _ = child.wait();
                Err(e)
            }
        }
    }

    pub fn connect(addr: &str, timeout: Duration) -> Result<Self, OracleError> {
        let transport = |e: std::io::Error| OracleError::Transport(format!("{addr}: {e}"));
        let sock = addr
            .to_socket_addrs()
            .map_err(transport)?
            .next()
            .ok_or_else(|| OracleError::Transport(format!("{addr}: no address")))?;
        let stream = TcpStream::connect_timeout(&sock, timeout).map_err(transport)?;
        let reader = stream.try_clone().map_err(transport)?;
        Self::new(Box::new(BufReader::new(reader)), Box::new(stream), timeout)
    }

    pub fn max_concurrency(&self) -> usize {
        self.max_concurrency
    }

    fn call(&self, request: &OracleRequest) -> Result<String, OracleError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let (tx, rx) = mpsc::channel();
        self.waiters.lock().expect("waiters lock").insert(id, tx);
        let mut line = serde_json::to_string(&OracleRequest {
            id,
            ..request.clone()
        })
        .expect("request serializes");
        line.push('\n');
        let sent = {
            let mut w = self.writer.lock().expect("writer lock");
            w.write_all(line.as_bytes()).and_then(|_| w.flush())
        };
        if let Err(e) = sent {
            self.waiters.lock().expect("waiters lock").remove(&id);
            return Err(OracleError::Transport(e.to_string()));
        }
        match rx.recv_timeout(self.timeout) {
            Ok(result) => result,
            Err(RecvTimeoutError::Timeout) => {
                // a late answer finds no waiter and is dropped
                self.waiters.lock().expect("waiters lock").remove(&id);
                Err(OracleError::Timeout(self.timeout))
            }
            Err(RecvTimeoutError::Disconnected) => Err(OracleError::Transport("oracle closed the connection".into())),
        }
    }
}

impl Predictor for ProtocolClient {
    fn predict(&self, request: &OracleRequest) -> Result<String, OracleError> {
        {
            let mut n = self.in_flight.lock().expect("slot lock");
            while *n >= self.max_concurrency {
                n = self.slot_freed.wait(n).expect("slot lock");
            }
            *n += 1;
        }
        let result = self.call(request);
        *self.in_flight.lock().expect("slot lock") -= 1;
        self.slot_freed.notify_one();
        result
    }

    fn max_concurrency(&self) -> usize {
        self.max_concurrency
    }
}

impl Drop for ProtocolClient {
    fn drop(&mut self) {
        if let Some(child) = &self.child {
            let mut child = child.lock().expect("child lock");
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

fn read_responses(
    mut reader: Box<dyn BufRead + Send>,
    handshake: Sender<Result<Handshake, OracleError>>,
    waiters: Waiters,
) {
    let mut line = String::new();
    let first = reader.read_line(&mut line);
    let parsed = match first {
        Ok(0) => Err(OracleError::Transport("oracle closed before the handshake".into())),
        Ok(_) => serde_json::from_str::<Handshake>(line.trim_end())
            .map_err(|e| OracleError::Protocol(format!("bad handshake {:?}: {e}", line.trim_end()))),
        Err(e) => Err(OracleError::Transport(e.to_string())),
    };
    let ok = parsed.is_ok();
    let _ = handshake.send(parsed);
    if !ok {
        return;
    }
    loop {
        line.clear();
        match reader.read_line(&mut line) {
            Ok(0) | Err(_) => break,
            Ok(_) => {}
        }
        if line.trim().is_empty() {
            continue;
        }
        let response: Response = match serde_json::from_str(line.trim_end()) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("discarding malformed oracle response: {e}");
                continue;
            }
        };
        let Some(id) = response.id else {
            log::warn!("oracle error without request id: {}", response.error.unwrap_or_default());
            continue;
        };
        let result = match (response.output, response.error) {
            (Some(out), None) => Ok(out),
            (_, Some(err)) => Err(OracleError::Remote(err)),
            (None, None) => Err(OracleError::Protocol("response has neither output nor error".into())),
        };
        if let Some(tx) = waiters.lock().expect("waiters lock").remove(&id) {
            let _ = tx.send(result);
        }
    }
    // connection gone: wake everyone still waiting
    for (_, tx) in waiters.lock().expect("waiters lock").drain() {
        let _ = tx.send(Err(OracleError::Transport("oracle closed the connection".into())));
    }
}

/// Serves `predictor` over one stream pair until the input ends.
pub fn serve<R: BufRead, W: Write>(predictor: &dyn Predictor, reader: R, mut writer: W) -> std::io::Result<()> {
    let handshake = Handshake {
        proto: PROTOCOL.to_string(),
        max_concurrency: predictor.max_concurrency(),
    };
    writeln!(writer, "{}", serde_json::to_string(&handshake)?)?;
    writer.flush()?;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<OracleRequest>(&line) {
            Ok(req) => match predictor.predict(&req) {
                Ok(output) => Response {
                    id: Some(req.id),
                    output: Some(output),
                    error: None,
                },
                Err(e) => Response {
                    id: Some(req.id),
                    output: None,
                    error: Some(e.to_string()),
                },
            },
            Err(e) => Response {
                id: serde_json::from_str::<serde_json::Value>(&line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(|id| id.as_u64())),
                output: None,
                error: Some(format!("malformed request: {e}")),
            },
        };
        writeln!(writer, "{}", serde_json::to_string(&response)?)?;
        writer.flush()?;
    }
    Ok(())
}

/// Accepts connections forever, one thread per connection.
pub fn serve_tcp(predictor: Arc<dyn Predictor>, listener: TcpListener) -> std::io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let predictor = Arc::clone(&predictor);
        std::thread::spawn(move || {
            let reader = match stream.try_clone() {
                Ok(s) => BufReader::new(s),
                Err(e) => return log::warn!("connection failed: {e}"),
            };
            if let Err(e) = serve(predictor.as_ref(), reader, stream) {
                log::warn!("connection ended: {e}");
            }
        });
    }
    Ok(())
}
