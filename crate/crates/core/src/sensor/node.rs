//! Simulated sensor nodes with seeded timestamp jitter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::protocol::{SensorType, WireMessage};

/// Emits events whose timestamps are pushed late by a uniform offset in
/// `0..=jitter_ms`, never earlier than the node's previous event.
#[derive(Debug, Clone)]
pub struct SimulatedNode {
    pub id: String,
    jitter_ms: u64,
    rng: ChaCha8Rng,
    last_ts: u64,
}

impl SimulatedNode {
    pub fn new(id: impl Into<String>, jitter_ms: u64, seed: u64) -> Self {
        SimulatedNode {
            id: id.into(),
            jitter_ms,
            rng: ChaCha8Rng::seed_from_u64(seed),
            last_ts: 0,
        }
    }

    pub fn event(&mut self, sensor: SensorType, value: f64, ts: u64) -> WireMessage {
        let jitter = if self.jitter_ms > 0 {
            self.rng.random_range(0..=self.jitter_ms)
        } else {
            0
        };
        let ts = (ts + jitter).max(self.last_ts);
        self.last_ts = ts;
        WireMessage::Event {
            node: self.id.clone(),
            sensor,
            value,
            ts,
        }
    }

    /// A person walking in: outside PIR, door open, inside PIR, door closed.
    pub fn entry(&mut self, ts: u64) -> Vec<WireMessage> {
        vec![
            self.event(SensorType::PirOut, 1.0, ts),
            self.event(SensorType::Door, 1.0, ts + 200),
            self.event(SensorType::PirIn, 1.0, ts + 600),
            self.event(SensorType::Door, 0.0, ts + 1200),
        ]
    }

    /// A person walking out.
    pub fn exit(&mut self, ts: u64) -> Vec<WireMessage> {
        vec![
            self.event(SensorType::PirIn, 1.0, ts),
            self.event(SensorType::Door, 1.0, ts + 200),
            self.event(SensorType::PirOut, 1.0, ts + 600),
            self.event(SensorType::Door, 0.0, ts + 1200),
        ]
    }
}
