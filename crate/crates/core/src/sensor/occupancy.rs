//! Entry / exit counting from the PIR pair on either side of the door.

use crate::{Error, Result};

pub const DEFAULT_WINDOW_MS: u64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pir {
    /// Fitted inside the room.
    In,
    /// Fitted outside the room.
    Out,
}

impl Pir {
    fn name(self) -> &'static str {
        match self {
            Pir::In => "PIR_IN",
            Pir::Out => "PIR_OUT",
        }
    }
}

/// Someone entering trips the outside sensor first, someone leaving the
/// inside one. A pulse waits up to `window_ms` for its partner on the other
/// side; a second pulse on the same side replaces it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyCounter {
    pub count: u32,
    pub window_ms: u64,
    pending: Option<(Pir, u64)>,
    last_in: Option<u64>,
    last_out: Option<u64>,
}

impl Default for OccupancyCounter {
    fn default() -> Self {
        OccupancyCounter::new(DEFAULT_WINDOW_MS)
    }
}

impl OccupancyCounter {
    pub fn new(window_ms: u64) -> Self {
        OccupancyCounter {
            count: 0,
            window_ms,
            pending: None,
            last_in: None,
            last_out: None,
        }
    }

    pub fn pending(&self) -> Option<(Pir, u64)> {
        self.pending
    }

    /// Applies one pulse and returns the change in count (after clamping
    /// at zero). The counter is untouched on error.
    pub fn pir_update(&mut self, pir: Pir, ts: u64) -> Result<i32> {
        let last = match pir {
            Pir::In => &mut self.last_in,
            Pir::Out => &mut self.last_out,
        };
        if let Some(l) = *last {
            if ts < l {
                return Err(Error::OutOfOrder {
                    sensor: pir.name(),
                    last: l,
                    got: ts,
                });
            }
        }
        *last = Some(ts);
        match self.pending.take() {
            Some((first, at)) if first != pir && ts.saturating_sub(at) <= self.window_ms => {
                Ok(match first {
                    Pir::Out => {
                        self.count += 1;
                        1
                    }
                    Pir::In if self.count > 0 => {
                        self.count -= 1;
                        -1
                    }
                    Pir::In => 0,
                })
            }
            _ => {
                self.pending = Some((pir, ts));
                Ok(0)
            }
        }
    }
}
