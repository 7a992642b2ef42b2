//! Occupancy-, posture- and comfort-aware illumination control.
//!
//! The crate is organized the way data flows through the system:
//!
//! * [`skeleton`] and [`face`] turn raw camera-frame coordinates into the
//!   31-dimensional posture and 46-dimensional emotion feature vectors.
//! * [`ml`] and [`nn`] hold the from-scratch learners that classify them,
//!   and [`eval`] the cross-validation / blind-test harness around them.
//! * [`synth`] generates seeded labeled frames standing in for recordings.
//! * [`sensor`] is the line protocol, the PIR occupancy counter and the hub.
//! * [`control`] closes the loop: room state in, light commands out, with a
//!   simulated tube-light plant.

pub mod config;
pub mod control;
pub mod dataset;
pub mod eval;
pub mod face;
pub mod flatfile;
pub mod geometry;
pub mod ml;
pub mod nn;
pub mod sensor;
pub mod skeleton;
pub mod synth;

mod error;

pub use error::{Error, Result};
pub use geometry::Vec3;
