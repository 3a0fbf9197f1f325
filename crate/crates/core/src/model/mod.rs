//! Sagittal rigid-body model of the exoskeleton as two stance-grounded chains.

mod grounded;
mod params;
pub mod planar;

pub use grounded::{build_grounded_chain, slope_gravity, BaseLink, GroundedChain};
pub use params::*;
