//! Command-line companion to the simulation core: scenario configuration
//! files, trajectory/report export, and the driver used by the `sddsim`
//! binary. Everything here is deterministic — identical inputs (including
//! the seed) produce byte-identical outputs.

pub mod config;
pub mod export;
