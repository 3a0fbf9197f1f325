//! Simulation and benchmark harness for blended stance-model assistance of a
//! lower-limb exoskeleton.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: sagittal rigid-body model grounded on either foot, with gravity
//!   and inertia compensation torques.
//! - [`gait`]: deterministic synthetic gait, insole pressures and calibration data.
//! - [`control`]: the blend strategy, its regression calibration, the FSM
//!   baseline and the ankle actuation mask.
//! - [`sim`]: trial execution, harness interaction forces and the trial protocol.
//! - [`metrics`]: smoothness, transparency and ankle torque statistics.
//! - [`config`] and [`runner`]: configuration files and command orchestration.

pub mod config;
pub mod control;
pub mod error;
pub mod gait;
pub mod metrics;
pub mod model;
pub mod runner;
pub mod sim;

pub use error::{Error, Result};
