//! Statistical QoS analysis and learned power allocation for a two-hop
//! (uplink then downlink) video delivery chain.

// Validation is written as `!(x > 0.0)` on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocator;
pub mod arrival;
pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod learner;
pub mod math;
pub mod queueing;
pub mod service;
pub mod snc;
pub mod stats;

pub use error::{Error, Result};
