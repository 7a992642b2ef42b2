//! Folding decoded messages into room state, and the TCP hub that
//! serializes concurrent node connections into one ordered stream.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc;
use std::thread;

use super::occupancy::Pir;
use super::protocol::{decode_message, encode_message, SensorType, WireMessage};
use crate::control::RoomState;
use crate::{Error, Result};

/// Applies one message. Events update the sensor readings, ACKs record the
/// light level the actuator reports, CMDs are ignored (they flow the other
/// way). On error the state is unchanged.
pub fn hub_ingest(state: &mut RoomState, msg: &WireMessage) -> Result<()> {
    match msg {
        WireMessage::Event {
            sensor, value, ts, ..
        } => {
            let slot = match sensor {
                SensorType::Door => Some(&mut state.updated.door),
                SensorType::PirIn | SensorType::PirOut => None,
                lux => Some(
                    &mut state.updated.lux[lux.lux_channel().expect("remaining types are lux")],
                ),
            };
            if let Some(slot) = slot {
                if let Some(last) = *slot {
                    if *ts < last {
                        return Err(Error::OutOfOrder {
                            sensor: sensor.name(),
                            last,
                            got: *ts,
                        });
                    }
                }
                *slot = Some(*ts);
            }
            match sensor {
                SensorType::Door => state.door_open = *value == 1.0,
                SensorType::PirIn => {
                    state.counter.pir_update(Pir::In, *ts)?;
                    state.updated.pir = Some(*ts);
                }
                SensorType::PirOut => {
                    state.counter.pir_update(Pir::Out, *ts)?;
                    state.updated.pir = Some(*ts);
                }
                lux => state.lux[lux.lux_channel().expect("lux channel")] = *value,
            }
        }
        WireMessage::Ack { light, level } => state.levels[*light as usize] = *level,
        WireMessage::Command { .. } => {}
    }
    Ok(())
}

/// Folds a message sequence from the empty room, skipping messages the
/// state rejects (exactly as the hub does).
pub fn replay<'a>(messages: impl IntoIterator<Item = &'a WireMessage>) -> RoomState {
    let mut state = RoomState::default();
    for m in messages {
        let _ = hub_ingest(&mut state, m);
    }
    state
}

/// One line of hub output.
#[derive(Debug, Clone, PartialEq)]
pub enum HubLog {
    Applied {
        seq: usize,
        conn: usize,
        msg: WireMessage,
        state: Summary,
    },
    Rejected {
        seq: usize,
        conn: usize,
        msg: WireMessage,
        reason: String,
    },
    Dropped {
        conn: usize,
        reason: String,
    },
}

/// The parts of the state worth printing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub occupancy: u32,
    pub door_open: bool,
    pub lux: [f64; 3],
    pub levels: [u8; 3],
}

impl From<&RoomState> for Summary {
    fn from(s: &RoomState) -> Self {
        Summary {
            occupancy: s.occupancy(),
            door_open: s.door_open,
            lux: s.lux,
            levels: s.levels,
        }
    }
}

fn wire(msg: &WireMessage) -> String {
    encode_message(msg)
        .map(|b| String::from_utf8_lossy(&b).trim_end().to_string())
        .unwrap_or_else(|_| format!("{msg:?}"))
}

impl fmt::Display for HubLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HubLog::Applied {
                seq,
                conn,
                msg,
                state,
            } => write!(
                f,
                "#{seq} conn={conn} {} -> occupancy={} door={} lux={}/{}/{} levels={}/{}/{}",
                wire(msg),
                state.occupancy,
                if state.door_open { "open" } else { "closed" },
                state.lux[0],
                state.lux[1],
                state.lux[2],
                state.levels[0],
                state.levels[1],
                state.levels[2]
            ),
            HubLog::Rejected {
                seq,
                conn,
                msg,
                reason,
            } => write!(f, "#{seq} conn={conn} {} rejected: {reason}", wire(msg)),
            HubLog::Dropped { conn, reason } => write!(f, "conn={conn} dropped: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HubReport {
    pub state: RoomState,
    /// Every decoded message in the order the hub consumed it.
    pub arrivals: Vec<WireMessage>,
    pub log: Vec<HubLog>,
}

enum Arrival {
    Message(usize, WireMessage),
    Dropped(usize, String),
}

fn read_connection(conn: usize, stream: TcpStream, tx: mpsc::Sender<Arrival>) {
    let mut reader = BufReader::new(stream);
    let mut line = Vec::new();
    loop {
        line.clear();
        match reader.read_until(b'\n', &mut line) {
            Ok(0) => return,
            Ok(_) => match decode_message(&line) {
                Ok(msg) => {
                    if tx.send(Arrival::Message(conn, msg)).is_err() {
                        return;
                    }
                }
                Err(e) => {
                    let _ = tx.send(Arrival::Dropped(conn, e.to_string()));
                    return;
                }
            },
            Err(e) => {
                let _ = tx.send(Arrival::Dropped(conn, e.to_string()));
                return;
            }
        }
    }
}

/// Accepts node connections on `listener` (one reader thread each) and
/// applies every decoded message on the calling thread, in arrival order.
/// A connection sending a malformed line is dropped; others carry on.
///
/// With `max_connections` the hub returns once that many connections have
/// been accepted and closed; without it, it serves forever.
pub fn run_hub(
    listener: TcpListener,
    max_connections: Option<usize>,
    mut on_log: impl FnMut(&HubLog),
) -> Result<HubReport> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut conn = 0;
        for stream in listener.incoming() {
            if max_connections.is_some_and(|m| conn >= m) {
                break;
            }
            match stream {
                Ok(s) => {
                    let tx = tx.clone();
                    let id = conn;
                    thread::spawn(move || read_connection(id, s, tx));
                    conn += 1;
                }
                Err(e) => log::warn!("accept failed: {e}"),
            }
            if max_connections.is_some_and(|m| conn >= m) {
                break;
            }
        }
    });
    let mut report = HubReport {
        state: RoomState::default(),
        arrivals: Vec::new(),
        log: Vec::new(),
    };
    for arrival in rx {
        let entry = match arrival {
            Arrival::Message(conn, msg) => {
                let seq = report.arrivals.len();
                report.arrivals.push(msg.clone());
                match hub_ingest(&mut report.state, &msg) {
                    Ok(()) => HubLog::Applied {
                        seq,
                        conn,
                        msg,
                        state: Summary::from(&report.state),
                    },
                    Err(e) => HubLog::Rejected {
                        seq,
                        conn,
                        msg,
                        reason: e.to_string(),
                    },
                }
            }
            Arrival::Dropped(conn, reason) => HubLog::Dropped { conn, reason },
        };
        on_log(&entry);
        report.log.push(entry);
    }
    Ok(report)
}

/// Connects to a hub and writes `messages` in order.
pub fn send_messages(addr: impl ToSocketAddrs, messages: &[WireMessage]) -> Result<()> {
    let mut stream = TcpStream::connect(addr)?;
    let mut buf = Vec::new();
    for m in messages {
        buf.extend(encode_message(m)?);
    }
    stream.write_all(&buf)?;
    stream.flush()?;
    Ok(())
}
