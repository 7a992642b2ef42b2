//! Single-line ASCII wire format shared by sensor nodes, the hub and the
//! light actuator.
//!
//! ```text
//! EVT <node_id> <DOOR|PIR_IN|PIR_OUT|LUX0|LUX1|LUX2> <value> <ts_ms>\n
//! CMD <light_id 0-2> <POWER_ON|POWER_OFF|INT_UP|INT_DOWN>\n
//! ACK <light_id 0-2> <level 0-10>\n
//! ```
//!
//! Fields are separated by exactly one space. Node ids are 1 to 64
//! characters from `[A-Za-z0-9_.:-]`. DOOR values are `0` (closed) or `1`
//! (open), PIR values are always `1`, LUX values are non-negative decimals
//! (`digits[.digits]`).

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

pub const MAX_NODE_ID: usize = 64;
pub const LIGHTS: usize = 3;
pub const MAX_LEVEL: u8 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SensorType {
    Door,
    PirIn,
    PirOut,
    Lux0,
    Lux1,
    Lux2,
}

impl SensorType {
    pub const ALL: [SensorType; 6] = [
        SensorType::Door,
        SensorType::PirIn,
        SensorType::PirOut,
        SensorType::Lux0,
        SensorType::Lux1,
        SensorType::Lux2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SensorType::Door => "DOOR",
            SensorType::PirIn => "PIR_IN",
            SensorType::PirOut => "PIR_OUT",
            SensorType::Lux0 => "LUX0",
            SensorType::Lux1 => "LUX1",
            SensorType::Lux2 => "LUX2",
        }
    }

    pub fn lux(light: usize) -> Option<SensorType> {
        [SensorType::Lux0, SensorType::Lux1, SensorType::Lux2]
            .get(light)
            .copied()
    }

    /// Which light a lux channel belongs to.
    pub fn lux_channel(self) -> Option<usize> {
        match self {
            SensorType::Lux0 => Some(0),
            SensorType::Lux1 => Some(1),
            SensorType::Lux2 => Some(2),
            _ => None,
        }
    }

    pub fn value_is_valid(self, v: f64) -> bool {
        match self {
            SensorType::Door => v == 0.0 || v == 1.0,
            SensorType::PirIn | SensorType::PirOut => v == 1.0,
            _ => v.is_finite() && v >= 0.0 && v.is_sign_positive(),
        }
    }
}

impl fmt::Display for SensorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SensorType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SensorType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownSensor(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    PowerOn,
    PowerOff,
    IntUp,
    IntDown,
}

impl Action {
    pub const ALL: [Action; 4] = [
        Action::PowerOn,
        Action::PowerOff,
        Action::IntUp,
        Action::IntDown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Action::PowerOn => "POWER_ON",
            Action::PowerOff => "POWER_OFF",
            Action::IntUp => "INT_UP",
            Action::IntDown => "INT_DOWN",
        }
    }

    pub fn is_intensity(self) -> bool {
        matches!(self, Action::IntUp | Action::IntDown)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WireMessage {
    Event {
        node: String,
        sensor: SensorType,
        value: f64,
        ts: u64,
    },
    Command {
        light: u8,
        action: Action,
    },
    Ack {
        light: u8,
        level: u8,
    },
}

pub fn is_valid_node_id(id: &str) -> bool {
    (1..=MAX_NODE_ID).contains(&id.len())
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b':' | b'-'))
}

/// One newline-terminated line.
pub fn encode_message(msg: &WireMessage) -> Result<Vec<u8>> {
    let line = match msg {
        WireMessage::Event {
            node,
            sensor,
            value,
            ts,
        } => {
            if !is_valid_node_id(node) {
                return Err(Error::Encode(format!(
                    "invalid node id `{}`",
                    node.escape_debug()
                )));
            }
            if !sensor.value_is_valid(*value) {
                return Err(Error::Encode(format!("invalid {sensor} value {value}")));
            }
            // f64 Display never uses exponents and round-trips exactly.
            format!("EVT {node} {sensor} {value} {ts}\n")
        }
        WireMessage::Command { light, action } => {
            check_light(*light).map_err(Error::Encode)?;
            format!("CMD {light} {action}\n")
        }
        WireMessage::Ack { light, level } => {
            check_light(*light).map_err(Error::Encode)?;
            if *level > MAX_LEVEL {
                return Err(Error::Encode(format!("level {level} above {MAX_LEVEL}")));
            }
            format!("ACK {light} {level}\n")
        }
    };
    Ok(line.into_bytes())
}

fn check_light(light: u8) -> std::result::Result<(), String> {
    if (light as usize) < LIGHTS {
        Ok(())
    } else {
        Err(format!("light id {light} outside 0-{}", LIGHTS - 1))
    }
}

fn parse_uint<T: FromStr>(tok: &str, field: &'static str) -> Result<T> {
    if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(
            field,
            format!("`{tok}` is not an unsigned integer"),
        ));
    }
    tok.parse()
        .map_err(|_| Error::parse(field, format!("`{tok}` is out of range")))
}

fn parse_decimal(tok: &str) -> Result<f64> {
    let (int, frac) = tok.split_once('.').unwrap_or((tok, "0"));
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || !digits(frac) {
        return Err(Error::parse(
            "value",
            format!("`{tok}` is not a non-negative decimal"),
        ));
    }
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse("value", format!("`{tok}` is out of range")))
}

/// Strict inverse of [`encode_message`] for exactly one line.
pub fn decode_message(bytes: &[u8]) -> Result<WireMessage> {
    let body = bytes
        .strip_suffix(b"\n")
        .ok_or_else(|| Error::parse("line", "missing trailing newline"))?;
    if let Some(b) = body.iter().find(|b| !(b.is_ascii_graphic() || **b == b' ')) {
        return Err(Error::parse("line", format!("unexpected byte 0x{b:02x}")));
    }
    let line = std::str::from_utf8(body).expect("checked ASCII");
    let toks: Vec<&str> = line.split(' ').collect();
    let expect = |n: usize| {
        if toks.len() == n {
            Ok(())
        } else {
            Err(Error::parse(
                "fields",
                format!("expected {n} space-separated fields, found {}", toks.len()),
            ))
        }
    };
    match toks[0] {
        "EVT" => {
            expect(5)?;
            let node = toks[1];
            if !is_valid_node_id(node) {
                return Err(Error::parse("node", format!("invalid node id `{node}`")));
            }
            let sensor: SensorType = toks[2].parse()?;
            let value = match sensor {
                SensorType::Door => match toks[3] {
                    "0" => 0.0,
                    "1" => 1.0,
                    v => {
                        return Err(Error::parse(
                            "value",
                            format!("door value `{v}` must be 0 or 1"),
                        ))
                    }
                },
                SensorType::PirIn | SensorType::PirOut => match toks[3] {
                    "1" => 1.0,
                    v => return Err(Error::parse("value", format!("PIR value `{v}` must be 1"))),
                },
                _ => parse_decimal(toks[3])?,
            };
            let ts = parse_uint(toks[4], "ts")?;
            Ok(WireMessage::Event {
                node: node.to_string(),
                sensor,
                value,
                ts,
            })
        }
        "CMD" => {
            expect(3)?;
            let light = parse_uint(toks[1], "light")?;
            check_light(light).map_err(|r| Error::parse("light", r))?;
            let action = Action::ALL
                .into_iter()
                .find(|a| a.name() == toks[2])
                .ok_or_else(|| Error::parse("action", format!("unknown action `{}`", toks[2])))?;
            Ok(WireMessage::Command { light, action })
        }
        "ACK" => {
            expect(3)?;
            let light = parse_uint(toks[1], "light")?;
            check_light(light).map_err(|r| Error::parse("light", r))?;
            let level: u8 = parse_uint(toks[2], "level")?;
            if level > MAX_LEVEL {
                return Err(Error::parse("level", format!("{level} above {MAX_LEVEL}")));
            }
            Ok(WireMessage::Ack { light, level })
        }
        d => Err(Error::parse(
            "direction",
            format!("unknown message type `{d}`"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evt(sensor: SensorType, value: f64, ts: u64) -> WireMessage {
        WireMessage::Event {
            node: "n1".into(),
            sensor,
            value,
            ts,
        }
    }

    #[test]
    fn framing_examples() {
        assert_eq!(
            encode_message(&evt(SensorType::PirIn, 1.0, 1500)).unwrap(),
            b"EVT n1 PIR_IN 1 1500\n"
        );
        let cmd = WireMessage::Command {
            light: 0,
            action: Action::IntUp,
        };
        assert_eq!(encode_message(&cmd).unwrap(), b"CMD 0 INT_UP\n");
        assert_eq!(
            decode_message(b"EVT n1 DOOR 1 2000\n").unwrap(),
            evt(SensorType::Door, 1.0, 2000)
        );
        assert_eq!(
            decode_message(b"EVT n1 LUX1 312.5 7\n").unwrap(),
            evt(SensorType::Lux1, 312.5, 7)
        );
    }

    #[test]
    fn errors_name_the_field() {
        let field = |line: &[u8]| match decode_message(line) {
            Err(Error::Parse { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(field(b"EVT n1 DOOR maybe 2000\n"), "value");
        assert_eq!(field(b"EVT n1 DOOR 1 -5\n"), "ts");
        assert_eq!(field(b"EVT n1 DOOR 1 20"), "line");
        assert_eq!(field(b"EVT n1 DOOR 1\n"), "fields");
        assert_eq!(field(b"CMD 3 INT_UP\n"), "light");
        assert_eq!(field(b"CMD 1 BRIGHTER\n"), "action");
        assert_eq!(field(b"ACK 1 11\n"), "level");
        assert_eq!(field(b"HELLO\n"), "direction");
        assert_eq!(field(b"EVT n\x011 DOOR 1 20\n"), "line");
        assert_eq!(field(b"EVT n1 LUX0 1e3 20\n"), "value");
        assert!(matches!(
            decode_message(b"EVT n1 SMOKE 1 20\n"),
            Err(Error::UnknownSensor(_))
        ));
    }

    #[test]
    fn encode_rejects_bad_tokens() {
        let bad = WireMessage::Event {
            node: "a b".into(),
            sensor: SensorType::Door,
            value: 1.0,
            ts: 0,
        };
        assert!(matches!(encode_message(&bad), Err(Error::Encode(_))));
        assert!(encode_message(&evt(SensorType::Lux0, -0.0, 0)).is_err());
        assert!(encode_message(&evt(SensorType::Door, 0.5, 0)).is_err());
        assert!(encode_message(&WireMessage::Ack {
            light: 0,
            level: 11
        })
        .is_err());
    }
}
