//! Door, PIR and lux sensor nodes, their wire protocol, the occupancy
//! counter and the hub that fuses everything into a [`RoomState`].
//!
//! [`RoomState`]: crate::control::RoomState

mod hub;
mod node;
mod occupancy;
mod protocol;

pub use hub::{hub_ingest, replay, run_hub, send_messages, HubLog, HubReport, Summary};
pub use node::SimulatedNode;
pub use occupancy::{OccupancyCounter, Pir, DEFAULT_WINDOW_MS};
pub use protocol::{
    decode_message, encode_message, is_valid_node_id, Action, SensorType, WireMessage, LIGHTS,
    MAX_LEVEL, MAX_NODE_ID,
};
