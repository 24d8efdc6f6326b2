//! Wire-protocol client for an external measurement rig, plus a reference
//! server loop for testing and for exposing an in-process rig over TCP.
//!
//! Protocol: newline-delimited JSON over a reliable byte stream, one command
//! in flight at a time.
//!
//! ```text
//! client -> rig:  {"cmd":"set_shape","theta_deg":[t1,t2,t3]}
//!                 {"cmd":"acquire","duration_s":10.0}
//!                 {"cmd":"calibrate"}
//! rig -> client:  {"ok":true}
//!                 {"ok":true,"samples":[...],"rate_hz":600.0}
//!                 {"ok":false,"error":"..."}
//! ```
//!
//! `calibrate` acquires a wind-off reference trace; sample payloads are in
//! newtons. The client enforces strictly serialized access, mirroring a
//! single physical tunnel.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::geometry::MorphShape;
use crate::trace::{ForceTrace, RigConditions, TraceMode, TraceProvenance};

use super::{DragRig, RigError};

#[derive(Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
enum Command {
    SetShape { theta_deg: [f64; 3] },
    Acquire { duration_s: f64 },
    Calibrate,
}

#[derive(Serialize, Deserialize, Default)]
struct Response {
    ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// TCP client speaking the rig wire protocol. One in-flight command.
pub struct RemoteRig {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    conditions: RigConditions,
}

impl RemoteRig {
    /// Connects to a rig server. `conditions` describe the tunnel state the
    /// operator has configured; the wire protocol does not negotiate them.
    pub fn connect(
        addr: impl ToSocketAddrs,
        conditions: RigConditions,
        timeout: Duration,
    ) -> Result<Self, RigError> {
        let addr = addr
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| RigError::InvalidConfig("remote rig address resolved to nothing".into()))?;
        let stream = TcpStream::connect_timeout(&addr, timeout)?;
        stream.set_read_timeout(Some(timeout))?;
        stream.set_write_timeout(Some(timeout))?;
        let writer = stream.try_clone()?;
        Ok(Self { reader: BufReader::new(stream), writer, conditions })
    }

    fn round_trip(&mut self, command: &Command) -> Result<Response, RigError> {
        let mut line = serde_json::to_string(command)
            .map_err(|e| RigError::Protocol(format!("encoding command: {e}")))?;
        line.push('\n');
        self.writer.write_all(line.as_bytes())?;
        self.writer.flush()?;
        let mut reply = String::new();
        let read = self.reader.read_line(&mut reply)?;
        if read == 0 {
            return Err(RigError::Protocol("connection closed by rig".into()));
        }
        let response: Response = serde_json::from_str(reply.trim_end())
            .map_err(|e| RigError::Protocol(format!("malformed reply: {e}")))?;
        if !response.ok {
            return Err(RigError::Remote(response.error.unwrap_or_else(|| "unspecified".into())));
        }
        Ok(response)
    }

    fn trace_from(&self, response: Response) -> Result<ForceTrace, RigError> {
        let samples =
            response.samples.ok_or_else(|| RigError::Protocol("reply carried no samples".into()))?;
        let rate = response
            .rate_hz
            .ok_or_else(|| RigError::Protocol("reply carried no sample rate".into()))?;
        let mut trace = ForceTrace::new(samples, rate, TraceMode::Absolute, self.conditions);
        trace.provenance =
            TraceProvenance { backend: "remote".into(), seed: None, evaluation_counter: None };
        Ok(trace)
    }
}

impl DragRig for RemoteRig {
    fn backend_name(&self) -> &'static str {
        "remote"
    }

    fn conditions(&self) -> RigConditions {
        self.conditions
    }

    fn set_shape(&mut self, shape: &MorphShape) -> Result<(), RigError> {
        self.round_trip(&Command::SetShape { theta_deg: shape.theta_deg })?;
        Ok(())
    }

    fn acquire(&mut self, duration_s: f64) -> Result<ForceTrace, RigError> {
        let response = self.round_trip(&Command::Acquire { duration_s })?;
        self.trace_from(response)
    }

    fn acquire_wind_off(&mut self) -> Result<ForceTrace, RigError> {
        let response = self.round_trip(&Command::Calibrate)?;
        self.trace_from(response)
    }
}

/// Serves one client connection over any rig, line by line until EOF.
/// Reference implementation of the protocol's rig side.
pub fn serve_connection(stream: TcpStream, rig: &mut dyn DragRig) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = stream;
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Ok(());
        }
        let trimmed = line.trim_end();
        if trimmed.is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<Command>(trimmed) {
            Err(e) => Response { ok: false, error: Some(format!("bad command: {e}")), ..Default::default() },
            Ok(command) => {
                let result = match command {
                    Command::SetShape { theta_deg } => {
                        rig.set_shape(&MorphShape::from_angles(theta_deg)).map(|()| None)
                    }
                    Command::Acquire { duration_s } => rig.acquire(duration_s).map(Some),
                    Command::Calibrate => rig.acquire_wind_off().map(Some),
                };
                match result {
                    Ok(None) => Response { ok: true, ..Default::default() },
                    Ok(Some(trace)) => Response {
                        ok: true,
                        rate_hz: Some(trace.sample_rate_hz),
                        samples: Some(trace.samples),
                        error: None,
                    },
                    Err(e) => {
                        Response { ok: false, error: Some(e.to_string()), ..Default::default() }
                    }
                }
            }
        };
        let mut payload = serde_json::to_string(&response).expect("response serializes");
        payload.push('\n');
        writer.write_all(payload.as_bytes())?;
        writer.flush()?;
    }
}
