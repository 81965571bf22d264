//! BPSK over AWGN or fast Rayleigh fading, and the per-bit likelihood table
//! shared by every soft decoder.
//!
//! Bit 0 maps to symbol +1 and bit 1 to −1. The SNR is `Es/N0` with `Es = 1`
//! and `N0 = 2σ²`, so `σ² = 1 / (2·10^(snr_db/10))`.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Awgn,
    Rayleigh,
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "awgn" => Ok(ChannelKind::Awgn),
            "rayleigh" => Ok(ChannelKind::Rayleigh),
            other => Err(Error::Config(format!("unknown channel `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub kind: ChannelKind,
    pub snr_db: f64,
    /// Use this noise variance instead of the one implied by `snr_db`.
    pub sigma2_override: Option<f64>,
}

impl ChannelConfig {
    pub fn new(kind: ChannelKind, snr_db: f64) -> Self {
        ChannelConfig { kind, snr_db, sigma2_override: None }
    }

    pub fn with_sigma2(kind: ChannelKind, sigma2: f64) -> Self {
        ChannelConfig { kind, snr_db: f64::NAN, sigma2_override: Some(sigma2) }
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2_override
            .unwrap_or_else(|| 1.0 / (2.0 * 10f64.powf(self.snr_db / 10.0)))
    }

    pub fn validate(&self) -> Result<()> {
        let s2 = self.sigma2();
        if s2.is_finite() && s2 > 0.0 {
            Ok(())
        } else {
            Err(Error::Config(format!("noise variance {s2} must be finite and positive")))
        }
    }
}

/// Channel outputs `y` and fading amplitudes `a`, one per bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: Vec<f64>,
    pub a: Vec<f64>,
}

impl Observation {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[inline]
pub fn symbol(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `y_i = a_i·s(b_i) + n_i`. A zero noise variance transmits noiselessly.
pub fn transmit<R: Rng + ?Sized>(bits: &[u8], config: &ChannelConfig, rng: &mut R) -> Observation {
    let sigma = config.sigma2().max(0.0).sqrt();
    let mut y = Vec::with_capacity(bits.len());
    let mut a = Vec::with_capacity(bits.len());
    for &b in bits {
        let amp = match config.kind {
            ChannelKind::Awgn => 1.0,
            ChannelKind::Rayleigh => {
                // |h| with h ~ CN(0, 1): E[a^2] = 1
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                ((re * re + im * im) / 2.0).sqrt()
            }
        };
        let noise = if sigma > 0.0 {
            Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
        } else {
            0.0
        };
        y.push(amp * symbol(b) + noise);
        a.push(amp);
    }
    Observation { y, a }
}

/// Gaussian density of `y` given the bit, with the fading amplitude known.
pub fn bit_likelihood(y: f64, a: f64, bit: u8, sigma2: f64) -> f64 {
    ln_bit_likelihood(y, a, bit, sigma2).exp()
}

pub fn ln_bit_likelihood(y: f64, a: f64, bit: u8, sigma2: f64) -> f64 {
    let d = y - a * symbol(bit);
    -0.5 * (2.0 * PI * sigma2).ln() - d * d / (2.0 * sigma2)
}

/// `ln(e^x + e^y)` without overflow; `-inf` when both are `-inf`.
#[inline]
pub fn ln_add(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// Log-likelihoods `[ln P(y_i|0), ln P(y_i|1)]` for every bit of a burst.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodTable {
    ln: Vec<[f64; 2]>,
}

impl LikelihoodTable {
    pub fn from_observation(obs: &Observation, sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::Config(format!("noise variance {sigma2} must be positive")));
        }
        let ln = obs
            .y
            .iter()
            .zip(&obs.a)
            .map(|(&y, &a)| [ln_bit_likelihood(y, a, 0, sigma2), ln_bit_likelihood(y, a, 1, sigma2)])
            .collect();
        Ok(LikelihoodTable { ln })
    }

    pub fn from_ln(ln: Vec<[f64; 2]>) -> Self {
        LikelihoodTable { ln }
    }

    /// Table from linear likelihood pairs `[P(y|0), P(y|1)]`.
    pub fn from_probs(probs: &[[f64; 2]]) -> Self {
        LikelihoodTable { ln: probs.iter().map(|p| [p[0].ln(), p[1].ln()]).collect() }
    }

    pub fn len(&self) -> usize {
        self.ln.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln.is_empty()
    }

    pub fn as_slice(&self) -> &[[f64; 2]] {
        &self.ln
    }

    pub fn span(&self, range: std::ops::Range<usize>) -> &[[f64; 2]] {
        &self.ln[range]
    }

    /// Rescale each bit so that `½(P(y|0) + P(y|1)) = 1`. Every segmentation
    /// covers every bit once, so posteriors over segmentations are unchanged
    /// while uncoded payload spans contribute a factor of exactly one.
    pub fn normalized(&self) -> Self {
        let ln = self
            .ln
            .iter()
            .map(|&[l0, l1]| {
                let shift = LN_2 - ln_add(l0, l1);
                [l0 + shift, l1 + shift]
            })
            .collect();
        LikelihoodTable { ln }
    }

    /// Multiply both likelihoods of bit `i` by `factor`.
    pub fn scale_bit(&mut self, i: usize, factor: f64) {
        let s = factor.ln();
        self.ln[i][0] += s;
        self.ln[i][1] += s;
    }
}
