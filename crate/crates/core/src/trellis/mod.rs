//! Full-burst MAP frame synchronization over the frame-boundary trellis.
//!
//! Trellis states are cumulative lengths `ℓ` (in alignment units) after `n`
//! frames. A forward-backward pass gives `P(S_n = ℓ | y)`, from which the
//! frame count is estimated as the most likely stage ending at the burst
//! end, and each boundary as the most likely state of its stage.

mod metrics;
mod posterior;
mod region;

pub use metrics::{
    gamma_data, gamma_last, ln_gamma_data, ln_gamma_last, ln_gamma_last_parts, ln_marginalize_other_crc,
    ln_marginalize_payload, marginalize_other_crc, marginalize_payload,
};
pub(crate) use metrics::{BranchMetrics, EdgeRule};
pub use posterior::{ComplexityCounters, TrellisPosterior};
pub use region::{Region, StageShape};

use crate::channel::LikelihoodTable;
use crate::frame_model::FrameProfile;
use crate::{Error, Result, SyncEstimate};

/// Forward-backward pass over the whole burst of `burst_len` units.
pub fn forward_backward(table: &LikelihoodTable, profile: &FrameProfile, burst_len: usize) -> Result<TrellisPosterior> {
    let g = profile.granularity();
    if table.len() != burst_len * g {
        return Err(Error::Domain(format!(
            "likelihood table has {} bits, burst needs {}",
            table.len(),
            burst_len * g
        )));
    }
    decode_span(&table.normalized(), profile, 0, burst_len, &[1.0], EdgeRule::BurstEnd)
}

/// Decode units `start..start + len` of a normalized table with the given
/// forward seed and edge rule.
pub(crate) fn decode_span(
    normalized: &LikelihoodTable,
    profile: &FrameProfile,
    start: usize,
    len: usize,
    seed: &[f64],
    rule: EdgeRule,
) -> Result<TrellisPosterior> {
    let g = profile.granularity();
    let dist = &profile.lengths;
    let metrics = BranchMetrics::build(profile, normalized.span(start * g..(start + len) * g), len, rule);
    let seed_lo = seed.iter().position(|&s| s > 0.0).unwrap_or(0);
    let seed_hi = seed.iter().rposition(|&s| s > 0.0).unwrap_or(0);
    if seed_lo >= len {
        return Err(Error::Domain("forward seed lies beyond the trellis".into()));
    }
    let region = Region::new(len, dist.min_len(), dist.max_len(), seed_lo, seed_hi);
    let share = (0..len).map(|s| metrics.edge_padding_share(s)).collect();
    posterior::forward_backward(region, seed, |s| metrics.data_row(s), |s| metrics.edge_ln(s), share)
}

/// MAP estimates read from one trellis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalEstimate {
    /// Most likely initial state `ℓ̂_0` (0 unless the trellis was seeded).
    pub start: usize,
    /// `ℓ̂_1, …, ℓ̂_N̂`; the last one is the trellis end.
    pub boundaries: Vec<usize>,
    /// The last frame is more likely padding than data.
    pub padding_last: bool,
}

fn ln_node(post: &TrellisPosterior, n: usize, state: usize) -> f64 {
    post.ln_alpha(n, state) + post.ln_beta(n, state)
}

fn argmax_state(post: &TrellisPosterior, n: usize) -> usize {
    let shape = post.stages[n].shape;
    let mut best = (f64::NEG_INFINITY, shape.lo);
    let states = (shape.lo..=shape.hi).chain(shape.terminal.then_some(post.len()));
    for state in states {
        let v = ln_node(post, n, state);
        if v > best.0 {
            best = (v, state);
        }
    }
    best.1
}

/// Frame count, boundaries and padding flag. Ties go to the smaller frame
/// count and the smaller state.
pub fn estimate_local(post: &TrellisPosterior) -> LocalEstimate {
    let len = post.len();
    let mut n_hat = 0;
    let mut best = f64::NEG_INFINITY;
    for n in post.terminal_stages() {
        let v = ln_node(post, n, len);
        if v > best {
            best = v;
            n_hat = n;
        }
    }
    let start = argmax_state(post, 0);
    let mut boundaries: Vec<usize> = (1..n_hat).map(|n| argmax_state(post, n)).collect();
    let last_start = boundaries.last().copied().unwrap_or(start);
    boundaries.push(len);
    LocalEstimate { start, boundaries, padding_last: post.padding_share(last_start) > 0.5 }
}

/// MAP frame synchronization estimate for a full-burst posterior.
pub fn estimate(post: &TrellisPosterior) -> SyncEstimate {
    let local = estimate_local(post);
    SyncEstimate::new(local.boundaries, local.padding_last)
}

/// Forward-backward followed by [`estimate`].
pub fn synchronize(table: &LikelihoodTable, profile: &FrameProfile, burst_len: usize) -> Result<(SyncEstimate, ComplexityCounters)> {
    let post = forward_backward(table, profile, burst_len)?;
    Ok((estimate(&post), post.counters))
}
