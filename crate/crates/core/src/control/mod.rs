//! The automation policy: vacancy turns lights off, posture sets a lux
//! target, comfort sets how hard the loop pushes toward it.

mod scenario;

use crate::face::EmotionLabel;
use crate::sensor::{Action, OccupancyCounter, SensorType, WireMessage, LIGHTS, MAX_LEVEL};
use crate::skeleton::PostureLabel;
use crate::{Error, Result};

pub use scenario::{
    run_automation_loop, FrameKind, LoopConfig, Perception, Scenario, ScenarioItem, Trace, TraceRow,
};

/// Latest timestamp seen per input, milliseconds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LastUpdate {
    pub door: Option<u64>,
    pub pir: Option<u64>,
    pub lux: [Option<u64>; LIGHTS],
    pub frame: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoomState {
    pub counter: OccupancyCounter,
    pub door_open: bool,
    /// Latest reading of each light's lux sensor.
    pub lux: [f64; LIGHTS],
    /// Light levels as last acknowledged by the actuator.
    pub levels: [u8; LIGHTS],
    pub posture: Option<PostureLabel>,
    pub emotion: Option<EmotionLabel>,
    pub updated: LastUpdate,
}

impl RoomState {
    pub fn occupancy(&self) -> u32 {
        self.counter.count
    }

    pub fn mean_lux(&self) -> f64 {
        self.lux.iter().sum::<f64>() / LIGHTS as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LightCommand {
    pub light: u8,
    pub action: Action,
}

impl LightCommand {
    pub fn to_wire(self) -> WireMessage {
        WireMessage::Command {
            light: self.light,
            action: self.action,
        }
    }
}

impl std::fmt::Display for LightCommand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.light, self.action)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlConfig {
    /// Lux targets for Standing, Sitting, LyingDown.
    pub targets: [f64; 3],
    pub deadband: f64,
    pub step_period_ms: u64,
    /// Intensity commands per step for Comfortable, Neutral, Uncomfortable.
    pub emotion_steps: [usize; 3],
}

impl Default for ControlConfig {
    fn default() -> Self {
        ControlConfig {
            targets: [400.0, 300.0, 100.0],
            deadband: 50.0,
            step_period_ms: 1000,
            emotion_steps: [0, 1, 2],
        }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<()> {
        if self.targets.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Config(format!(
                "lux targets {:?} must be positive",
                self.targets
            )));
        }
        if !(self.deadband.is_finite() && self.deadband >= 0.0) {
            return Err(Error::Config(format!(
                "deadband {} must be non-negative",
                self.deadband
            )));
        }
        if self.step_period_ms == 0 {
            return Err(Error::Config("step period must be at least 1 ms".into()));
        }
        Ok(())
    }
}

/// `None` when the posture is unknown, which makes the controller hold.
pub fn target_lux(posture: Option<PostureLabel>, cfg: &ControlConfig) -> Option<f64> {
    posture.map(|p| cfg.targets[p.index()])
}

/// One decision of the policy.
///
/// * Empty room: switch off every powered light.
/// * Occupied, posture unknown: switch on any dark light, nothing else.
/// * Occupied, posture known: outside the deadband, step the light with the
///   most headroom in the needed direction (lowest index on ties), as many
///   times as the occupant's comfort asks for. Unknown comfort counts as
///   Neutral.
pub fn control_step(state: &RoomState, cfg: &ControlConfig) -> Vec<LightCommand> {
    let cmd = |light: usize, action| LightCommand {
        light: light as u8,
        action,
    };
    if state.occupancy() == 0 {
        return (0..LIGHTS)
            .filter(|&i| state.levels[i] > 0)
            .map(|i| cmd(i, Action::PowerOff))
            .collect();
    }
    let Some(target) = target_lux(state.posture, cfg) else {
        return (0..LIGHTS)
            .filter(|&i| state.levels[i] == 0)
            .map(|i| cmd(i, Action::PowerOn))
            .collect();
    };
    let error = target - state.mean_lux();
    if error.abs() <= cfg.deadband {
        return Vec::new();
    }
    let steps = cfg.emotion_steps[state.emotion.unwrap_or(EmotionLabel::Neutral).index()];
    let mut levels = state.levels;
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let pick = if error > 0.0 {
            (0..LIGHTS)
                .filter(|&i| levels[i] < MAX_LEVEL)
                .min_by_key(|&i| (levels[i], i))
        } else {
            (0..LIGHTS)
                .filter(|&i| levels[i] > 0)
                .min_by_key(|&i| (MAX_LEVEL - levels[i], i))
        };
        let Some(i) = pick else { break };
        if error > 0.0 {
            levels[i] += 1;
            out.push(cmd(i, Action::IntUp));
        } else {
            levels[i] -= 1;
            out.push(cmd(i, Action::IntDown));
        }
    }
    out
}

/// Three dimmable tube lights sharing one room. A light is on exactly when
/// its level is above zero; every lux sensor reads the room total.
#[derive(Debug, Clone, PartialEq)]
pub struct LightPlant {
    pub levels: [u8; LIGHTS],
    pub lux_per_level: f64,
    pub ambient: f64,
}

impl Default for LightPlant {
    fn default() -> Self {
        LightPlant {
            levels: [0; LIGHTS],
            lux_per_level: 40.0,
            ambient: 0.0,
        }
    }
}

impl LightPlant {
    /// POWER_ON lights a dark light at level 1, POWER_OFF sets 0, INT_UP /
    /// INT_DOWN step by one and saturate at 10 / 0.
    pub fn apply(&mut self, cmd: LightCommand) {
        let l = &mut self.levels[cmd.light as usize];
        *l = match cmd.action {
            Action::PowerOn => (*l).max(1),
            Action::PowerOff => 0,
            Action::IntUp => (*l + 1).min(MAX_LEVEL),
            Action::IntDown => l.saturating_sub(1),
        };
    }

    pub fn lux(&self) -> f64 {
        self.ambient + self.lux_per_level * self.levels.iter().map(|&l| l as f64).sum::<f64>()
    }

    /// Sensor readings and actuator acknowledgements at time `ts`.
    pub fn report(&self, ts: u64) -> Vec<WireMessage> {
        let lux = self.lux();
        let mut out: Vec<WireMessage> = (0..LIGHTS)
            .map(|i| WireMessage::Event {
                node: "plant".into(),
                sensor: SensorType::lux(i).expect("three lux channels"),
                value: lux,
                ts,
            })
            .collect();
        out.extend((0..LIGHTS).map(|i| WireMessage::Ack {
            light: i as u8,
            level: self.levels[i],
        }));
        out
    }
}
