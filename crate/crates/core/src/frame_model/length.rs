use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::{Error, Result};

/// Prior on frame lengths, in alignment units, supported exactly on
/// `[min_len, max_len]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthDistribution {
    min_len: usize,
    max_len: usize,
    granularity: usize,
    pmf: Vec<f64>,
    // cumulative[i] = sum of pmf[..i]
    cumulative: Vec<f64>,
}

impl LengthDistribution {
    /// `weights[i]` is the (unnormalized) weight of length `min_len + i`.
    pub fn from_weights(min_len: usize, weights: &[f64], granularity: usize) -> Result<Self> {
        if min_len == 0 {
            return Err(Error::Config("minimum frame length must be positive".into()));
        }
        if granularity == 0 {
            return Err(Error::Config("granularity must be positive".into()));
        }
        if weights.is_empty() {
            return Err(Error::Config("length prior needs at least one length".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Config(
                "every length in [min, max] needs a positive finite weight".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        let pmf: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cumulative = Vec::with_capacity(pmf.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for p in &pmf {
            acc += p;
            cumulative.push(acc);
        }
        Ok(LengthDistribution {
            min_len,
            max_len: min_len + weights.len() - 1,
            granularity,
            pmf,
            cumulative,
        })
    }

    pub fn uniform(min_len: usize, max_len: usize, granularity: usize) -> Result<Self> {
        if max_len < min_len {
            return Err(Error::Config(format!(
                "maximum length {max_len} is below minimum length {min_len}"
            )));
        }
        Self::from_weights(min_len, &vec![1.0; max_len - min_len + 1], granularity)
    }

    pub fn min_len(&self) -> usize {
        self.min_len
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Bits per alignment unit.
    pub fn granularity(&self) -> usize {
        self.granularity
    }

    /// `π_λ`, zero outside the support.
    pub fn prob(&self, len: usize) -> f64 {
        if len < self.min_len || len > self.max_len {
            0.0
        } else {
            self.pmf[len - self.min_len]
        }
    }

    /// `Σ π_λ` for `lo <= λ <= hi`, clipped to the support.
    pub fn mass(&self, lo: usize, hi: usize) -> f64 {
        let lo = lo.max(self.min_len);
        let hi = hi.min(self.max_len);
        if lo > hi {
            return 0.0;
        }
        self.cumulative[hi - self.min_len + 1] - self.cumulative[lo - self.min_len]
    }

    pub fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(&self.pmf).expect("pmf is positive")
    }

    pub fn sample<R: Rng + ?Sized>(&self, sampler: &WeightedIndex<f64>, rng: &mut R) -> usize {
        self.min_len + sampler.sample(rng)
    }

    /// Prior of a data frame closing the burst exactly, given that the last
    /// frame is a data frame: `π_R / Σ_{λ=min}^{R} π_λ` for `R` units left.
    pub fn last_data_prior(&self, remaining: usize) -> f64 {
        let denom = self.mass(self.min_len, remaining);
        if denom <= 0.0 {
            0.0
        } else {
            self.prob(remaining) / denom
        }
    }
}

/// `P(S_n = next | S_{n-1} = prev)` for a burst of `burst_len` units.
pub fn transition_prob(
    prev: usize,
    next: usize,
    burst_len: usize,
    dist: &LengthDistribution,
) -> Result<f64> {
    if next <= prev {
        return Err(Error::Domain(format!(
            "transition must move forward, got {prev} -> {next}"
        )));
    }
    if next > burst_len {
        return Err(Error::Domain(format!(
            "state {next} lies beyond the burst end {burst_len}"
        )));
    }
    let step = next - prev;
    if next < burst_len {
        return Ok(dist.prob(step));
    }
    Ok(if step > dist.max_len() {
        0.0
    } else if step < dist.min_len() {
        1.0
    } else {
        dist.mass(step, dist.max_len())
    })
}

/// `P(P_n = 1 | S_{n-1} = prev)`: the frame starting after `prev` is the
/// padding frame.
pub fn padding_prob(prev: usize, burst_len: usize, dist: &LengthDistribution) -> Result<f64> {
    if prev >= burst_len {
        return Err(Error::Domain(format!(
            "no frame can start at {prev} in a burst of {burst_len} units"
        )));
    }
    let remaining = burst_len - prev;
    Ok(if remaining >= dist.max_len() {
        0.0
    } else if remaining < dist.min_len() {
        1.0
    } else {
        dist.mass(remaining + 1, dist.max_len())
    })
}
