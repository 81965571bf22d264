use crate::{Error, Result};

/// CRC over GF(2) with zero initial register and no final inversion.
///
/// `poly` holds the generator coefficients below the leading `x^width` term,
/// so the WiMAX HCS generator `x^8 + x^2 + x + 1` is `Crc::new(8, 0x07)`.
/// Bits enter the register most significant first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crc {
    width: usize,
    poly: u32,
}

impl Crc {
    pub fn new(width: usize, poly: u32) -> Result<Self> {
        if width == 0 || width > 16 {
            return Err(Error::Config(format!("unsupported CRC width {width}")));
        }
        if poly >> width != 0 {
            return Err(Error::Config(format!(
                "generator 0x{poly:x} has terms at or above x^{width}"
            )));
        }
        Ok(Crc { width, poly })
    }

    /// 802.16 header check sequence, `x^8 + x^2 + x + 1`.
    pub fn hcs8() -> Self {
        Crc { width: 8, poly: 0x07 }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Number of register states, `2^width`.
    pub fn states(&self) -> usize {
        1 << self.width
    }

    #[inline]
    pub fn step(&self, reg: u32, bit: u8) -> u32 {
        let top = (reg >> (self.width - 1)) & 1;
        let mask = (1u32 << self.width) - 1;
        let shifted = (reg << 1) & mask;
        if top ^ u32::from(bit & 1) == 1 {
            shifted ^ self.poly
        } else {
            shifted
        }
    }

    /// Remainder of `bits(x) * x^width` divided by the generator.
    pub fn remainder(&self, bits: &[u8]) -> u32 {
        bits.iter().fold(0, |reg, &b| self.step(reg, b))
    }

    /// Register value `reg` as `width` bits, most significant first.
    pub fn register_bits(&self, reg: u32) -> Vec<u8> {
        (0..self.width).rev().map(|i| ((reg >> i) & 1) as u8).collect()
    }
}
