//! Hard-decision reference synchronizers.
//!
//! Both work on hard bit decisions and read headers byte by byte (one
//! alignment unit at a time). [`hunt_fs`] chases LEN fields and re-hunts for
//! a header with a zero HCS syndrome after each failure; [`mu_fs`] is the
//! HUNT/PRESYNC/SYNC delineation automaton that also uses the HCS to correct
//! header errors while in SYNC.

mod hunt;
mod mu;
mod syndrome;

pub use hunt::hunt_fs;
pub use mu::{mu_fs, mu_fs_traced, AmbiguousPolicy, AutomatonState, MuConfig};
pub use syndrome::{Correction, SyndromeTable};

use crate::channel::Observation;
use crate::frame_model::FrameProfile;

/// BPSK sign decision: bit 0 iff `y·a ≥ 0` (ties go to 0).
pub fn hard_decide(obs: &Observation) -> Vec<u8> {
    obs.y.iter().zip(&obs.a).map(|(&y, &a)| u8::from(y * a < 0.0)).collect()
}

/// Header at unit `pos`, if it fits in the burst.
fn header_at<'b>(bits: &'b [u8], profile: &FrameProfile, pos: usize) -> Option<&'b [u8]> {
    let start = pos * profile.granularity();
    bits.get(start..start + profile.header.header_bits())
}

/// LEN value of a header, if it can describe a frame at all.
fn sane_length(profile: &FrameProfile, header: &[u8]) -> Option<usize> {
    let len = profile.header.length_value(header) as usize;
    (len >= profile.header_units()).then_some(len)
}

/// Accumulates boundaries as a synchronizer walks the burst.
#[derive(Debug, Default)]
struct Segmenter {
    boundaries: Vec<usize>,
    frame_start: usize,
    last_was_frame: bool,
}

impl Segmenter {
    /// Accept a frame of `len` units at `pos`, closing any unexplained span
    /// before it. Returns the frame end, clipped to the burst.
    fn accept(&mut self, pos: usize, len: usize, burst_len: usize) -> usize {
        if pos > self.frame_start {
            self.boundaries.push(pos);
        }
        let end = (pos + len).min(burst_len);
        self.boundaries.push(end);
        self.frame_start = end;
        self.last_was_frame = true;
        end
    }

    fn finish(mut self, burst_len: usize) -> crate::SyncEstimate {
        if self.frame_start < burst_len {
            self.boundaries.push(burst_len);
            self.last_was_frame = false;
        }
        crate::SyncEstimate::new(self.boundaries, !self.last_was_frame)
    }
}
