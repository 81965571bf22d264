//! Frame syntax, length prior, Markov burst model and ground-truth burst
//! generation.

mod burst;
mod crc;
mod header;
mod length;

pub use burst::{generate_burst, Burst, Frame, FrameKind};
pub use crc::Crc;
pub use header::{FieldKind, FieldSpan, HeaderSpec};
pub use length::{padding_prob, transition_prob, LengthDistribution};

use crate::{Error, Result};

/// Header syntax plus length prior: everything a decoder needs to know about
/// the frames in a burst.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameProfile {
    pub header: HeaderSpec,
    pub lengths: LengthDistribution,
}

impl FrameProfile {
    pub fn new(header: HeaderSpec, lengths: LengthDistribution) -> Result<Self> {
        let g = lengths.granularity();
        if lengths.min_len() * g < header.header_bits() {
            return Err(Error::Config(format!(
                "minimum frame length {} units ({} bits) is shorter than the {}-bit header",
                lengths.min_len(),
                lengths.min_len() * g,
                header.header_bits()
            )));
        }
        let width = header.length.width;
        if width < 64 && (lengths.max_len() as u64) >= (1u64 << width) {
            return Err(Error::Config(format!(
                "a {width}-bit length field cannot encode frames of {} units",
                lengths.max_len()
            )));
        }
        Ok(FrameProfile { header, lengths })
    }

    /// WiMAX generic MAC header with byte-aligned frames of 50..=200 bytes,
    /// uniformly distributed.
    pub fn wimax() -> Self {
        Self::wimax_with(50, 200).expect("default WiMAX profile is valid")
    }

    pub fn wimax_with(min_bytes: usize, max_bytes: usize) -> Result<Self> {
        let lengths = LengthDistribution::uniform(min_bytes, max_bytes, 8)?;
        FrameProfile::new(HeaderSpec::wimax(), lengths)
    }

    /// Small profile for exhaustive checks: 4-bit units, frames of
    /// `min_len..=max_len` units, and a 12-bit header made of 2 constant bits
    /// (`10`), a 4-bit length, an unknown field and a 3- or 4-bit CRC
    /// (`x^3 + x + 1` or `x^4 + x + 1`).
    pub fn toy(crc_width: usize, min_len: usize, max_len: usize) -> Result<Self> {
        let crc = match crc_width {
            3 => Crc::new(3, 0b011)?,
            4 => Crc::new(4, 0b0011)?,
            w => return Err(Error::Config(format!("toy profile has no {w}-bit CRC"))),
        };
        let other = 6 - crc_width;
        let header = HeaderSpec::new(
            FieldSpan::new(0, 2),
            vec![1, 0],
            FieldSpan::new(2, 4),
            FieldSpan::new(6, other),
            FieldSpan::new(6 + other, crc_width),
            crc,
        )?;
        FrameProfile::new(header, LengthDistribution::uniform(min_len, max_len, 4)?)
    }

    pub fn granularity(&self) -> usize {
        self.lengths.granularity()
    }

    /// Header length rounded up to whole alignment units.
    pub fn header_units(&self) -> usize {
        self.header.header_bits().div_ceil(self.granularity())
    }
}

/// Encode `value` on `width` bits, most significant bit first.
pub fn uint_to_bits(value: u64, width: usize) -> Vec<u8> {
    (0..width)
        .rev()
        .map(|i| if i < 64 { ((value >> i) & 1) as u8 } else { 0 })
        .collect()
}

/// Interpret `bits` as an unsigned integer, most significant bit first.
pub fn bits_to_uint(bits: &[u8]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b & 1))
}

/// Unpack bytes into bits, most significant bit first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|&byte| (0..8).rev().map(move |i| (byte >> i) & 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uint_bits_roundtrip() {
        assert_eq!(uint_to_bits(0b101, 4), vec![0, 1, 0, 1]);
        assert_eq!(bits_to_uint(&uint_to_bits(1234, 11)), 1234);
        assert_eq!(bytes_to_bits(&[0x81]), vec![1, 0, 0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn profile_rejects_short_frames() {
        let lengths = LengthDistribution::uniform(5, 200, 8).unwrap();
        assert!(FrameProfile::new(HeaderSpec::wimax(), lengths).is_err());
    }

    #[test]
    fn profile_rejects_narrow_length_field() {
        let lengths = LengthDistribution::uniform(50, 3000, 8).unwrap();
        assert!(FrameProfile::new(HeaderSpec::wimax(), lengths).is_err());
    }

    #[test]
    fn wimax_header_units() {
        assert_eq!(FrameProfile::wimax().header_units(), 6);
    }
}
