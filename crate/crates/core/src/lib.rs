//! Simulator for a free-space B92 quantum-key-distribution link through
//! atmospheric turbulence.
//!
//! - [`turbulence`]: second-order beam statistics, outage probability and
//!   the aperture-ratio boundary between tracking strategies.
//! - [`channel`]: static link budget and sky-background count rate.
//! - [`b92`]: photon-level protocol Monte Carlo, sifting, QBER and key rate.
//! - [`tracking`]: beam-wander process, PSD → PID → FSM loop, fade masks and
//!   the strategy selector.
//! - [`sim`]: end-to-end scenarios and parameter sweeps.

pub mod b92;
pub mod channel;
pub mod error;
pub mod exec;
pub mod rng;
pub mod sim;
pub mod tracking;
pub mod turbulence;

pub use error::{Error, Result};
pub use exec::Execution;
