//! Secret-key-rate models for memory-assisted measurement-device-independent
//! QKD with on-demand and multimode quantum memories.
//!
//! The crate evaluates the analytic raw-bit yields of three protocols
//! ([`protocols::ondemand_rate`], [`protocols::multimode_rate`],
//! [`protocols::temporal_rate`]), compares them with the repeaterless bound,
//! and cross-checks them against a seeded Monte Carlo simulation of the
//! loading process ([`montecarlo`]). [`analysis`] holds the sweeps, scaling
//! fits and optimizers built on top.

pub mod analysis;
pub mod bsm;
pub mod cli;
pub mod config;
pub mod error;
pub mod memory;
pub mod montecarlo;
pub mod output;
pub mod params;
pub mod primitives;
pub mod protocols;

pub use error::{Error, Result};
pub use params::{
    ChannelParams, MemoryParams, ProtocolConfig, QberMode, QberModel, Scenario, SourceParams,
    Variant,
};
pub use protocols::{evaluate, RatePoint};
