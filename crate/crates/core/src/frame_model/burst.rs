use std::fmt::Write as _;

use rand::Rng;

use super::FrameProfile;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Data,
    Padding,
}

/// A frame occupying units `start..end` of the burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame {
    pub start: usize,
    pub end: usize,
    pub kind: FrameKind,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Transmitted burst with its ground-truth segmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct Burst {
    pub bits: Vec<u8>,
    pub frames: Vec<Frame>,
    /// Burst length `L` in alignment units.
    pub len_units: usize,
    pub granularity: usize,
}

impl Burst {
    /// End position of every frame, padding included; the last one is `L`.
    pub fn boundaries(&self) -> Vec<usize> {
        self.frames.iter().map(|f| f.end).collect()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.frames.iter().map(Frame::len).collect()
    }

    pub fn padding_present(&self) -> bool {
        self.frames.last().is_some_and(|f| f.kind == FrameKind::Padding)
    }

    /// Number of frames `N`, padding included.
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn data_frames(&self) -> impl Iterator<Item = &Frame> {
        self.frames.iter().filter(|f| f.kind == FrameKind::Data)
    }

    /// One `index start end padding` line per frame.
    pub fn audit_record(&self) -> String {
        let mut out = String::new();
        for (i, f) in self.frames.iter().enumerate() {
            let pad = u8::from(f.kind == FrameKind::Padding);
            let _ = writeln!(out, "{} {} {} {}", i, f.start, f.end, pad);
        }
        out
    }

    /// Parse frames back from [`Burst::audit_record`] output.
    pub fn parse_audit_record(text: &str) -> Result<Vec<Frame>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let fields: Vec<&str> = line.split_whitespace().collect();
                let bad = || Error::Domain(format!("malformed audit line `{line}`"));
                if fields.len() != 4 {
                    return Err(bad());
                }
                let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
                let kind = match fields[3] {
                    "0" => FrameKind::Data,
                    "1" => FrameKind::Padding,
                    _ => return Err(bad()),
                };
                Ok(Frame { start: num(fields[1])?, end: num(fields[2])?, kind })
            })
            .collect()
    }
}

/// Fill a burst of `burst_len` units with frames whose lengths are drawn
/// i.i.d. from the profile's prior. A drawn length that does not fit in the
/// remaining space ends the burst with a padding frame of 0xFF bytes.
pub fn generate_burst<R: Rng + ?Sized>(
    rng: &mut R,
    burst_len: usize,
    profile: &FrameProfile,
) -> Result<Burst> {
    let dist = &profile.lengths;
    let header = &profile.header;
    let g = dist.granularity();
    if burst_len < dist.min_len() {
        return Err(Error::Config(format!(
            "burst of {burst_len} units cannot hold a frame of at least {} units",
            dist.min_len()
        )));
    }
    let sampler = dist.sampler();
    let mut bits = Vec::with_capacity(burst_len * g);
    let mut frames = Vec::new();
    let mut pos = 0;
    while pos < burst_len {
        let remaining = burst_len - pos;
        let len = dist.sample(&sampler, rng);
        if len > remaining {
            bits.resize(burst_len * g, 1);
            frames.push(Frame { start: pos, end: burst_len, kind: FrameKind::Padding });
            break;
        }
        let other_max = if header.other.width >= 64 { u64::MAX } else { (1u64 << header.other.width) - 1 };
        let other = rng.random_range(0..=other_max);
        bits.extend(header.encode(len as u64, other));
        let payload_bits = len * g - header.header_bits();
        bits.extend((0..payload_bits).map(|_| rng.random_range(0..2u8)));
        frames.push(Frame { start: pos, end: pos + len, kind: FrameKind::Data });
        pos += len;
    }
    Ok(Burst { bits, frames, len_units: burst_len, granularity: g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame_model::{transition_prob, HeaderSpec, LengthDistribution};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check_invariants(burst: &Burst, profile: &FrameProfile) {
        let g = profile.granularity();
        assert_eq!(burst.bits.len(), burst.len_units * g);
        let b = burst.boundaries();
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*b.last().unwrap(), burst.len_units);
        let mut prev = 0;
        for (i, f) in burst.frames.iter().enumerate() {
            assert_eq!(f.start, prev);
            prev = f.end;
            let bits = &burst.bits[f.start * g..f.end * g];
            match f.kind {
                FrameKind::Data => {
                    assert!(f.len() >= profile.lengths.min_len() && f.len() <= profile.lengths.max_len());
                    let header = &bits[..profile.header.header_bits()];
                    assert_eq!(profile.header.syndrome(header), 0);
                    assert_eq!(profile.header.length_value(header) as usize, f.len());
                    let p = transition_prob(f.start, f.end, burst.len_units, &profile.lengths).unwrap();
                    assert!(p > 0.0);
                }
                FrameKind::Padding => {
                    assert_eq!(i, burst.frames.len() - 1);
                    assert!(bits.iter().all(|&x| x == 1));
                }
            }
        }
    }

    #[test]
    fn wimax_bursts_satisfy_invariants() {
        let profile = FrameProfile::wimax();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let burst = generate_burst(&mut rng, 1800, &profile).unwrap();
            check_invariants(&burst, &profile);
        }
    }

    #[test]
    fn degenerate_length_gives_single_frame() {
        let lengths = LengthDistribution::uniform(50, 50, 8).unwrap();
        let profile = FrameProfile::new(HeaderSpec::wimax(), lengths).unwrap();
        let burst = generate_burst(&mut ChaCha8Rng::seed_from_u64(3), 50, &profile).unwrap();
        assert_eq!(burst.frame_count(), 1);
        assert!(!burst.padding_present());
        assert_eq!(burst.boundaries(), vec![50]);
    }

    #[test]
    fn same_seed_same_burst() {
        let profile = FrameProfile::wimax();
        let a = generate_burst(&mut ChaCha8Rng::seed_from_u64(9), 1800, &profile).unwrap();
        let b = generate_burst(&mut ChaCha8Rng::seed_from_u64(9), 1800, &profile).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_short_burst_is_rejected() {
        let profile = FrameProfile::wimax();
        assert!(generate_burst(&mut ChaCha8Rng::seed_from_u64(0), 40, &profile).is_err());
    }

    #[test]
    fn audit_record_roundtrip() {
        let profile = FrameProfile::wimax();
        let burst = generate_burst(&mut ChaCha8Rng::seed_from_u64(5), 1800, &profile).unwrap();
        let text = burst.audit_record();
        assert_eq!(text.lines().count(), burst.frame_count());
        assert_eq!(Burst::parse_audit_record(&text).unwrap(), burst.frames);
        assert!(Burst::parse_audit_record("0 1 2").is_err());
    }
}
