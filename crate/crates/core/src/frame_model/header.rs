use super::crc::Crc;
use super::{bits_to_uint, uint_to_bits};
use crate::{Error, Result};

/// Bit offset and width of a header field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSpan {
    pub offset: usize,
    pub width: usize,
}

impl FieldSpan {
    pub const fn new(offset: usize, width: usize) -> Self {
        FieldSpan { offset, width }
    }

    pub fn end(&self) -> usize {
        self.offset + self.width
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.end()
    }
}

/// Role of a header bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Constant,
    Length,
    Other,
    Hec,
}

/// Frame header layout: a constant field with known content, a length field
/// counting the whole frame (header included) in alignment units, an
/// "other" field of unknown content, and a trailing HEC field holding the
/// CRC of every bit before it.
#[derive(Debug, Clone, PartialEq)]
pub struct HeaderSpec {
    pub constant: FieldSpan,
    constant_bits: Vec<u8>,
    pub length: FieldSpan,
    pub other: FieldSpan,
    pub hec: FieldSpan,
    crc: Crc,
    kinds: Vec<FieldKind>,
}

impl HeaderSpec {
    pub fn new(
        constant: FieldSpan,
        constant_bits: Vec<u8>,
        length: FieldSpan,
        other: FieldSpan,
        hec: FieldSpan,
        crc: Crc,
    ) -> Result<Self> {
        if constant_bits.len() != constant.width {
            return Err(Error::Config(format!(
                "constant field is {} bits wide but {} values were given",
                constant.width,
                constant_bits.len()
            )));
        }
        if constant_bits.iter().any(|&b| b > 1) {
            return Err(Error::Config("constant field values must be 0 or 1".into()));
        }
        if crc.width() != hec.width {
            return Err(Error::Config(format!(
                "CRC degree {} differs from HEC width {}",
                crc.width(),
                hec.width
            )));
        }
        if length.width == 0 {
            return Err(Error::Config("length field must not be empty".into()));
        }
        let header_bits = constant.width + length.width + other.width + hec.width;
        if hec.end() != header_bits {
            return Err(Error::Config("HEC field must close the header".into()));
        }
        let mut kinds = vec![None; header_bits];
        for (span, kind) in [
            (constant, FieldKind::Constant),
            (length, FieldKind::Length),
            (other, FieldKind::Other),
            (hec, FieldKind::Hec),
        ] {
            for i in span.range() {
                match kinds.get_mut(i) {
                    Some(slot @ None) => *slot = Some(kind),
                    _ => {
                        return Err(Error::Config(format!(
                            "header fields overlap or exceed {header_bits} bits at bit {i}"
                        )))
                    }
                }
            }
        }
        let kinds = kinds.into_iter().map(|k| k.expect("fields tile the header")).collect();
        Ok(HeaderSpec {
            constant,
            constant_bits,
            length,
            other,
            hec,
            crc,
            kinds,
        })
    }

    /// 802.16 generic MAC header for downlink CS data: HT, EC, Type, ESF/Rsv,
    /// CI, EKS and Rsv are constant (all zero), then an 11-bit LEN in bytes,
    /// a 16-bit CID and the 8-bit HCS.
    pub fn wimax() -> Self {
        HeaderSpec::new(
            FieldSpan::new(0, 13),
            vec![0; 13],
            FieldSpan::new(13, 11),
            FieldSpan::new(24, 16),
            FieldSpan::new(40, 8),
            Crc::hcs8(),
        )
        .expect("WiMAX header layout is valid")
    }

    pub fn header_bits(&self) -> usize {
        self.kinds.len()
    }

    /// Bits covered by the HEC, i.e. every bit before it.
    pub fn working_bits(&self) -> usize {
        self.hec.offset
    }

    pub fn crc(&self) -> &Crc {
        &self.crc
    }

    pub fn constant_bits(&self) -> &[u8] {
        &self.constant_bits
    }

    pub fn kind(&self, bit: usize) -> FieldKind {
        self.kinds[bit]
    }

    /// Working bits with the given length and other-field values.
    pub fn working(&self, length_value: u64, other_value: u64) -> Vec<u8> {
        let mut bits = vec![0u8; self.working_bits()];
        bits[self.constant.range()].copy_from_slice(&self.constant_bits);
        bits[self.length.range()].copy_from_slice(&uint_to_bits(length_value, self.length.width));
        bits[self.other.range()].copy_from_slice(&uint_to_bits(other_value, self.other.width));
        bits
    }

    /// Complete header, HEC included.
    pub fn encode(&self, length_value: u64, other_value: u64) -> Vec<u8> {
        let mut bits = self.working(length_value, other_value);
        let hec = self.crc.remainder(&bits);
        bits.extend(self.crc.register_bits(hec));
        bits
    }

    pub fn length_value(&self, header: &[u8]) -> u64 {
        bits_to_uint(&header[self.length.range()])
    }

    /// CRC of the working bits XOR the received HEC field; zero for a valid header.
    pub fn syndrome(&self, header: &[u8]) -> u32 {
        let computed = self.crc.remainder(&header[..self.working_bits()]);
        computed ^ bits_to_uint(&header[self.hec.range()]) as u32
    }

    /// Constant-field bits match their known content.
    pub fn constant_matches(&self, header: &[u8]) -> bool {
        header[self.constant.range()] == self.constant_bits[..]
    }
}
