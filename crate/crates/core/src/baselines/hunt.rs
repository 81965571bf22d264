use super::{header_at, sane_length, Segmenter};
use crate::frame_model::FrameProfile;
use crate::SyncEstimate;

/// LEN-chasing hunt: at each position, accept a header whose HCS checks and
/// jump by its LEN; otherwise move one unit forward. A header found after a
/// failure closes the unexplained span before it. A LEN running past the
/// burst end closes the burst.
pub fn hunt_fs(bits: &[u8], profile: &FrameProfile, burst_len: usize) -> SyncEstimate {
    assert_eq!(bits.len(), burst_len * profile.granularity(), "bit count does not match the burst");
    let spec = &profile.header;
    let mut seg = Segmenter::default();
    let mut pos = 0;
    while pos < burst_len {
        let len = header_at(bits, profile, pos).filter(|h| spec.syndrome(h) == 0).and_then(|h| sane_length(profile, h));
        match len {
            Some(len) => pos = seg.accept(pos, len, burst_len),
            None => pos += 1,
        }
    }
    seg.finish(burst_len)
}
