//! Soft-decision frame synchronization for bursts of aggregated
//! variable-length frames.
//!
//! A burst of `L` alignment units (bytes for the WiMAX MAC profile) carries
//! a sequence of frames, each starting with a header that holds a length
//! field and an 8-bit header check sequence, optionally followed by a
//! trailing padding frame. Given soft channel outputs for the whole burst,
//! the decoders in this crate recover the frame boundaries:
//!
//! * [`trellis`] runs a forward-backward (BCJR) pass over the full
//!   frame-boundary trellis and applies the MAP estimators.
//! * [`sliding`] decodes the burst in overlapping windows, committing only
//!   the reliable frame prefix of each window and seeding the next window's
//!   forward metrics.
//! * [`baselines`] holds hard-decision reference synchronizers.
//!
//! [`frame_model`] and [`channel`] provide the burst generator and the
//! BPSK/AWGN/Rayleigh channel, and [`harness`] drives Monte-Carlo SNR sweeps.

pub mod baselines;
pub mod channel;
pub mod complexity;
pub mod error;
pub mod estimate;
pub mod frame_model;
pub mod harness;
pub mod sliding;
pub mod trellis;

pub use error::{Error, Result};
pub use estimate::SyncEstimate;
