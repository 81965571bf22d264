//! Sliding-trellis frame synchronization.
//!
//! The burst is decoded in overlapping windows. Each window runs a
//! forward-backward pass over a reduced trellis whose right edge cuts the
//! frame in progress; only frames ending well before that edge are reliable
//! and committed. The next window starts at the last committed boundary and
//! is seeded with the forward metrics around it.

mod metrics;

pub use metrics::{gamma_header_truncated, gamma_truncated, ln_gamma_header_truncated, ln_gamma_truncated};

use log::warn;

use crate::channel::LikelihoodTable;
use crate::frame_model::FrameProfile;
use crate::trellis::{decode_span, estimate_local, ComplexityCounters, EdgeRule, Region, TrellisPosterior};
use crate::{Error, Result, SyncEstimate};

/// Seed entries below this fraction of the seed mass are dropped.
pub const SEED_PRUNE: f64 = 1e-12;

/// Window layout for a burst.
///
/// Window `m` ends at `edges[m]`: multiples of `base_len`, then the burst end.
/// It starts at the last boundary committed by window `m − 1`, so its size is
/// `base_len` plus the realized overlap with the previous window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPlan {
    pub burst_len: usize,
    pub base_len: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub header_units: usize,
    edges: Vec<usize>,
}

impl WindowPlan {
    pub fn new(burst_len: usize, base_len: usize, profile: &FrameProfile) -> Result<Self> {
        let (min_len, max_len) = (profile.lengths.min_len(), profile.lengths.max_len());
        let header_units = profile.header_units();
        let smallest = header_units + 2 * max_len;
        if base_len < smallest {
            return Err(Error::Config(format!(
                "window base length {base_len} is below header + 2 × max frame length = {smallest} units"
            )));
        }
        if burst_len == 0 {
            return Err(Error::Config("empty burst".into()));
        }
        let mut edges: Vec<usize> = (1..).map(|m| m * base_len).take_while(|&e| e < burst_len).collect();
        // a final step shorter than a frame would leave an undersized last window
        if edges.last().is_some_and(|&e| burst_len - e < max_len) {
            edges.pop();
        }
        edges.push(burst_len);
        Ok(WindowPlan { burst_len, base_len, min_len, max_len, header_units, edges })
    }

    /// Single window covering the whole burst.
    pub fn single(burst_len: usize, profile: &FrameProfile) -> Result<Self> {
        Self::new(burst_len, burst_len.max(profile.header_units() + 2 * profile.lengths.max_len()), profile)
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn window_count(&self) -> usize {
        self.edges.len()
    }

    /// Frames ending within this many units of a non-final edge are not
    /// committed.
    pub fn unreliable_tail(&self) -> usize {
        self.max_len + self.header_units
    }

    /// Realized overlap `L^o` satisfies `lo ≤ L^o < hi`.
    pub fn overlap_bounds(&self) -> (usize, usize) {
        (self.header_units + self.max_len, self.header_units + 2 * self.max_len)
    }

    /// Average overlap assumed by the complexity estimate.
    pub fn expected_overlap(&self) -> f64 {
        self.header_units as f64 + 1.5 * self.max_len as f64
    }

    /// Advance applied when a window commits nothing.
    fn forced_step(&self, window_len: usize) -> usize {
        window_len.saturating_sub(self.header_units + 2 * self.max_len)
    }
}

/// Decoder state carried from one window to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowState {
    /// Global index `ε` of the last committed boundary.
    pub epsilon: usize,
    /// `α_0(ℓ̄)` for `ℓ̄ = 0..seed.len()`, summing to one.
    pub alpha_seed: Vec<f64>,
    pub committed: Vec<usize>,
    /// Frames committed by the previous window.
    pub n_reliable: usize,
}

impl WindowState {
    pub fn initial() -> Self {
        WindowState { epsilon: 0, alpha_seed: vec![1.0], committed: Vec::new(), n_reliable: 0 }
    }
}

/// Per-window record for audit logs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowDiagnostic {
    pub index: usize,
    pub start: usize,
    pub len: usize,
    pub n_hat: usize,
    pub n_committed: usize,
    pub committed: Vec<usize>,
    pub nodes: u64,
    /// No frame was reliable and the window start was pushed forward.
    pub forced: bool,
}

impl std::fmt::Display for WindowDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "window={} start={} size={} n_hat={} n_committed={} nodes={} forced={} committed={:?}",
            self.index, self.start, self.len, self.n_hat, self.n_committed, self.nodes, self.forced, self.committed
        )
    }
}

#[derive(Debug, Clone)]
pub struct SlidingResult {
    pub estimate: SyncEstimate,
    pub windows: Vec<WindowDiagnostic>,
    pub counters: ComplexityCounters,
}

/// `α_0^m(ℓ̄) = κ·α_{N̂c}^{m−1}(ε_{m−1} − ε_{m−2} + ℓ̄)` for `ℓ̄ < ℓ_max`.
///
/// `offset` is `ε_{m−1} − ε_{m−2}`, the committed boundary in the previous
/// window's coordinates. Falls back to a point mass when nothing propagates.
pub fn seed_alpha(prev: &TrellisPosterior, n_committed: usize, offset: usize, max_len: usize) -> Vec<f64> {
    let ln: Vec<f64> = (0..max_len)
        .map(|l| offset + l)
        .take_while(|&p| p < prev.len())
        .map(|p| prev.ln_alpha(n_committed, p))
        .collect();
    let top = ln.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        warn!("no forward mass at the committed boundary; restarting from a point seed");
        return vec![1.0];
    }
    let mut seed: Vec<f64> = ln.iter().map(|v| (v - top).exp()).collect();
    let total: f64 = seed.iter().sum();
    for s in &mut seed {
        *s /= total;
        if *s < SEED_PRUNE {
            *s = 0.0;
        }
    }
    while seed.last() == Some(&0.0) {
        seed.pop();
    }
    let total: f64 = seed.iter().sum();
    seed.iter_mut().for_each(|s| *s /= total);
    seed
}

/// Number of leading boundaries of a window estimate that are reliable:
/// strictly increasing and ending at most `window_len − ℓ_max − ℓ_h` units
/// into the window.
pub fn reliable_prefix(boundaries: &[usize], window_len: usize, plan: &WindowPlan) -> usize {
    let Some(cutoff) = window_len.checked_sub(plan.unreliable_tail()) else { return 0 };
    let mut prev = 0;
    boundaries
        .iter()
        .take_while(|&&b| {
            let ok = b > prev && b <= cutoff;
            prev = b;
            ok
        })
        .count()
}

fn decode_windows(
    table: &LikelihoodTable,
    profile: &FrameProfile,
    plan: &WindowPlan,
    mut keep: Option<&mut Vec<TrellisPosterior>>,
) -> Result<SlidingResult> {
    let g = profile.granularity();
    if table.len() != plan.burst_len * g {
        return Err(Error::Domain(format!(
            "likelihood table has {} bits, burst needs {}",
            table.len(),
            plan.burst_len * g
        )));
    }
    let normalized = table.normalized();
    let mut state = WindowState::initial();
    let mut windows = Vec::with_capacity(plan.window_count());
    let mut counters = ComplexityCounters::default();
    let mut padding_last = false;
    let last = plan.window_count() - 1;
    for (m, &edge) in plan.edges().iter().enumerate() {
        let start = state.epsilon;
        let len = edge - start;
        let rule = if m == last { EdgeRule::BurstEnd } else { EdgeRule::Truncated };
        let post = decode_span(&normalized, profile, start, len, &state.alpha_seed, rule)?;
        counters += post.counters;
        let local = estimate_local(&post);
        let n_hat = local.boundaries.len();
        let (n_committed, forced) = if m == last {
            padding_last = local.padding_last;
            (n_hat, false)
        } else {
            let n = reliable_prefix(&local.boundaries[..n_hat - 1], len, plan);
            (n, n == 0)
        };
        let committed: Vec<usize> = local.boundaries[..n_committed].iter().map(|b| start + b).collect();
        state.committed.extend_from_slice(&committed);
        windows.push(WindowDiagnostic {
            index: m,
            start,
            len,
            n_hat,
            n_committed,
            committed,
            nodes: post.counters.nodes_visited,
            forced,
        });
        if m < last {
            if forced {
                let step = plan.forced_step(len);
                warn!("window {m} at {start}: no reliable frame, advancing {step} units");
                state.epsilon += step;
                state.alpha_seed = vec![1.0];
            } else {
                let offset = local.boundaries[n_committed - 1];
                state.alpha_seed = seed_alpha(&post, n_committed, offset, plan.max_len);
                state.epsilon = start + offset;
            }
            state.n_reliable = n_committed;
        }
        if let Some(keep) = keep.as_deref_mut() {
            keep.push(post);
        }
    }
    Ok(SlidingResult { estimate: SyncEstimate::new(state.committed, padding_last), windows, counters })
}

/// Sliding-trellis decode of a whole burst.
pub fn run(table: &LikelihoodTable, profile: &FrameProfile, plan: &WindowPlan) -> Result<SlidingResult> {
    decode_windows(table, profile, plan, None)
}

/// Like [`run`], also returning the posterior of every window.
pub fn run_with_posteriors(
    table: &LikelihoodTable,
    profile: &FrameProfile,
    plan: &WindowPlan,
) -> Result<(SlidingResult, Vec<TrellisPosterior>)> {
    let mut posts = Vec::new();
    let res = decode_windows(table, profile, plan, Some(&mut posts))?;
    Ok((res, posts))
}

/// Node and transition counts of a sliding decode that commits exactly the
/// true boundaries, with every window after the first seeded over the full
/// `ℓ_max` width. No metric is evaluated.
pub fn count_nodes(plan: &WindowPlan, true_boundaries: &[usize]) -> ComplexityCounters {
    count_nodes_seeded(plan, true_boundaries, plan.max_len)
}

/// [`count_nodes`] with seeds spanning `seed_width` positions. A width of one
/// reproduces a decode whose seeds collapse to a point, as in noiseless runs.
pub fn count_nodes_seeded(plan: &WindowPlan, true_boundaries: &[usize], seed_width: usize) -> ComplexityCounters {
    let mut counters = ComplexityCounters::default();
    let mut epsilon = 0;
    let last = plan.window_count() - 1;
    let seed_hi = seed_width.clamp(1, plan.max_len) - 1;
    for (m, &edge) in plan.edges().iter().enumerate() {
        let len = edge - epsilon;
        counters += Region::new(len, plan.min_len, plan.max_len, 0, if m == 0 { 0 } else { seed_hi }).counters();
        if m == last {
            break;
        }
        let cutoff = epsilon + len - plan.unreliable_tail();
        epsilon = match true_boundaries.iter().rev().find(|&&b| b > epsilon && b <= cutoff) {
            Some(&b) => b,
            None => epsilon + plan.forced_step(len),
        };
    }
    counters
}

#[cfg(test)]
mod tests;
