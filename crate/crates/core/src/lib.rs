//! Pinching-antenna wireless powered communication networks.
//!
//! A hybrid access point feeds a dielectric waveguide on which `N` pinching
//! antennas are activated. Devices harvest energy from the downlink, then
//! send data back over TDMA or NOMA. This crate models the channels and the
//! nonlinear harvester, solves the time/power allocation for fixed antenna
//! positions, optimises positions with an element-wise grid search or a
//! randomised-parameter differential evolution, and alternates the two.

pub mod allocator;
pub mod config;
pub mod error;
pub mod model;
pub mod orchestrator;
pub mod placement;

pub use error::{Error, Result};
