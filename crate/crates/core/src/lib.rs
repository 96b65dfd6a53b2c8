//! Core library for a step-based simulator of an integrated
//! satellite-terrestrial network under base-station outages.
//!
//! The stack, bottom to top:
//!
//! - [`geometry`]: distances, slant range, elevation/azimuth angles.
//! - [`antenna`]: sector gain pattern (azimuth/elevation cuts, downtilt) and
//!   the flat-top satellite beam.
//! - [`channel`]: path loss, Rician fading, RSRP/SINR, exact and
//!   fading-averaged rates.
//! - [`scenario`]: hex layout, LEO fleet, user drops, demands, outage mask,
//!   configuration files.
//! - [`association`]: eligibility indicators, capacity-constrained greedy
//!   user association, objective evaluation.
//! - [`env`]: the control MDP over per-sector (power, downtilt) pairs.
//! - [`agents`]: replay memory, the Q-network with its training loop, and
//!   the tabular Q-learning baseline.
//! - [`metrics`]: the per-iteration record emitted by training runs.

pub mod agents;
pub mod antenna;
pub mod association;
pub mod channel;
pub mod env;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod scenario;

pub use error::{Result, SimError};

/// Derive a child seed from a base seed and a salt (SplitMix64 step).
///
/// Used wherever one configured seed has to fan out into independent
/// deterministic streams (episodes, agents, seed sweeps).
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
