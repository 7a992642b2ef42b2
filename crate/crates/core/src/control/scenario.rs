//! Scripted scenarios and the closed automation loop.
//!
//! A scenario is a text file of wire-format `EVT` lines plus `FRAME`
//! directives, one per line, in non-decreasing time order:
//!
//! ```text
//! # someone walks in and sits down, unhappy with the light
//! EVT door PIR_OUT 1 0
//! EVT door PIR_IN 1 400
//! FRAME posture Sitting 7 500
//! FRAME emotion Uncomfortable 3
//! ```
//!
//! `FRAME <posture|emotion> <class> <seed> [ts_ms]` injects one generated
//! frame of that class; without a timestamp it takes the previous line's.
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{control_step, ControlConfig, LightCommand, LightPlant, RoomState};
use crate::face::{emotion_features, EmotionLabel};
use crate::ml::Classifier;
use crate::sensor::{decode_message, hub_ingest, WireMessage};
use crate::skeleton::{posture_features, rule_label_posture, PostureLabel};
use crate::synth::{sample_face, sample_skeleton};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Posture(PostureLabel),
    Emotion(EmotionLabel),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioItem {
    Message(WireMessage),
    Frame { kind: FrameKind, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scenario {
    /// `(ts_ms, item)` in script order.
    pub items: Vec<(u64, ScenarioItem)>,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(text: &str) -> Result<Scenario> {
        let mut items = Vec::new();
        let mut last_ts = 0;
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (ts, item) = if line.starts_with("FRAME") {
                parse_frame(line, last_ts).map_err(|r| Error::format(n, r))?
            } else {
                let mut bytes = line.as_bytes().to_vec();
                bytes.push(b'\n');
                match decode_message(&bytes).map_err(|e| Error::format(n, e.to_string()))? {
                    m @ WireMessage::Event { ts, .. } => (ts, ScenarioItem::Message(m)),
                    _ => {
                        return Err(Error::format(
                            n,
                            "scenarios contain only EVT and FRAME lines",
                        ))
                    }
                }
            };
            if ts < last_ts {
                return Err(Error::format(
                    n,
                    format!("time {ts} ms goes back before {last_ts} ms"),
                ));
            }
            last_ts = ts;
            items.push((ts, item));
        }
        Ok(Scenario { items })
    }
}

fn parse_frame(line: &str, default_ts: u64) -> std::result::Result<(u64, ScenarioItem), String> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if !(4..=5).contains(&toks.len()) {
        return Err("expected `FRAME <posture|emotion> <class> <seed> [ts_ms]`".into());
    }
    let kind = match toks[1] {
        "posture" => FrameKind::Posture(toks[2].parse().map_err(|e: Error| e.to_string())?),
        "emotion" => FrameKind::Emotion(toks[2].parse().map_err(|e: Error| e.to_string())?),
        k => return Err(format!("unknown frame kind `{k}`")),
    };
    let seed = toks[3]
        .parse()
        .map_err(|_| format!("invalid seed `{}`", toks[3]))?;
    let ts = match toks.get(4) {
        Some(t) => t.parse().map_err(|_| format!("invalid timestamp `{t}`"))?,
        None => default_ts,
    };
    Ok((ts, ScenarioItem::Frame { kind, seed }))
}

/// The models that turn frames into labels. Without a posture model the
/// geometric rule labeler is used; without an emotion model comfort stays
/// unknown.
#[derive(Clone, Copy, Default)]
pub struct Perception<'a> {
    pub posture: Option<&'a dyn Classifier>,
    pub emotion: Option<&'a dyn Classifier>,
}

fn classify<T: FromStr>(model: &dyn Classifier, x: &[f64]) -> Result<T> {
    let name = &model.classes()[model.predict(x)?];
    name.parse()
        .map_err(|_| Error::InvalidModel(format!("model class `{name}` is not a usable label")))
}

impl Perception<'_> {
    fn perceive(&self, kind: FrameKind, seed: u64, state: &mut RoomState) -> Result<()> {
        match kind {
            FrameKind::Posture(label) => {
                let frame = sample_skeleton(label, seed)?;
                state.posture = Some(match self.posture {
                    Some(m) => classify(m, posture_features(&frame)?.as_slice())?,
                    None => rule_label_posture(&frame)?,
                });
            }
            FrameKind::Emotion(label) => {
                let frame = sample_face(label, seed)?;
                if let Some(m) = self.emotion {
                    state.emotion = Some(classify(m, emotion_features(&frame)?.as_slice())?);
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    pub max_steps: usize,
    /// Stop once the script is exhausted and three steps in a row issued no
    /// commands.
    pub stop_when_steady: bool,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            max_steps: 200,
            stop_when_steady: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub ts: u64,
    pub occupancy: u32,
    pub posture: Option<PostureLabel>,
    pub emotion: Option<EmotionLabel>,
    /// Readings after this step's commands took effect.
    pub lux: [f64; 3],
    pub levels: [u8; 3],
    pub commands: Vec<LightCommand>,
    /// Errors raised while ingesting this step's inputs.
    pub faults: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    /// Steps that issued an intensity command with nobody in the room.
    pub safety_violations: usize,
    pub steady: bool,
}

pub const TRACE_HEADER: &str = "step,ts,occupancy,posture,emotion,lux0,lux1,lux2,commands,fault";

impl Trace {
    /// CSV with [`TRACE_HEADER`]; commands are `light:ACTION` joined by `;`,
    /// faults joined by `;` with commas replaced.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(TRACE_HEADER);
        s.push('\n');
        let opt = |v: Option<String>| v.unwrap_or_else(|| "unknown".into());
        for r in &self.rows {
            let cmds: Vec<String> = r.commands.iter().map(LightCommand::to_string).collect();
            let faults: Vec<String> = r
                .faults
                .iter()
                .map(|f| f.replace([',', '\n'], " "))
                .collect();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.step,
                r.ts,
                r.occupancy,
                opt(r.posture.map(|p| p.to_string())),
                opt(r.emotion.map(|e| e.to_string())),
                r.lux[0],
                r.lux[1],
                r.lux[2],
                cmds.join(";"),
                faults.join(";")
            );
        }
        s
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }
}

/// Runs the loop: each step ingests the script up to the step's time,
/// classifies new frames, decides, drives the plant and feeds its readings
/// back through the hub fold.
pub fn run_automation_loop(
    scenario: &Scenario,
    cfg: &ControlConfig,
    loop_cfg: &LoopConfig,
    mut plant: LightPlant,
    perception: Perception<'_>,
) -> Result<Trace> {
    cfg.validate()?;
    let mut state = RoomState::default();
    for m in plant.report(0) {
        hub_ingest(&mut state, &m)?;
    }
    let mut trace = Trace::default();
    let mut next = 0;
    let mut quiet = 0;
    for step in 0..loop_cfg.max_steps {
        let ts = step as u64 * cfg.step_period_ms;
        let mut faults = Vec::new();
        while let Some((t, item)) = scenario.items.get(next).filter(|(t, _)| *t <= ts) {
            let result = match item {
                ScenarioItem::Message(m) => hub_ingest(&mut state, m),
                ScenarioItem::Frame { kind, seed } => {
                    perception.perceive(*kind, *seed, &mut state).map(|()| {
                        state.updated.frame = Some(*t);
                    })
                }
            };
            if let Err(e) = result {
                faults.push(e.to_string());
            }
            next += 1;
        }
        let commands = control_step(&state, cfg);
        if state.occupancy() == 0 && commands.iter().any(|c| c.action.is_intensity()) {
            trace.safety_violations += 1;
        }
        for &c in &commands {
            plant.apply(c);
        }
        for m in plant.report(ts) {
            if let Err(e) = hub_ingest(&mut state, &m) {
                faults.push(e.to_string());
            }
        }
        quiet = if commands.is_empty() { quiet + 1 } else { 0 };
        trace.rows.push(TraceRow {
            step,
            ts,
            occupancy: state.occupancy(),
            posture: state.posture,
            emotion: state.emotion,
            lux: state.lux,
            levels: state.levels,
            commands,
            faults,
        });
        if quiet >= 3 && next == scenario.items.len() {
            trace.steady = true;
            if loop_cfg.stop_when_steady {
                break;
            }
        }
    }
    Ok(trace)
}
