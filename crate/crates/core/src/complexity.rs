//! Node-count complexity of the full and sliding trellises.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::frame_model::{generate_burst, FrameProfile};
use crate::sliding::{count_nodes, WindowPlan};
use crate::trellis::Region;
use crate::Result;

/// Exact node count of the full trellis: `Σ_n` of the stage widths plus one
/// terminal node per stage that can reach `L`.
pub fn trellis_nodes(burst_len: usize, min_len: usize, max_len: usize) -> u64 {
    let mut total = 1u64; // S_0 = 0
    let mut n = 1;
    // stage n exists while stage n − 1 has a non-terminal state
    while (n - 1) * min_len < burst_len {
        let lo = n * min_len;
        let hi = (n * max_len).min(burst_len - 1);
        if hi >= lo {
            total += (hi - lo + 1) as u64;
        }
        if n * max_len >= burst_len {
            total += 1;
        }
        n += 1;
    }
    total
}

/// Two-triangle decomposition of the trellis region:
/// `Σ_{n<N_min} n(ℓ_max − ℓ_min) + Σ_{N_min≤n≤N_max} (L − nℓ_min)`.
pub fn two_triangle_nodes(burst_len: usize, min_len: usize, max_len: usize) -> f64 {
    let n_min = burst_len.div_ceil(max_len);
    let n_max = burst_len / min_len;
    let first: f64 = (0..n_min).map(|n| (n * (max_len - min_len)) as f64).sum();
    let second: f64 = (n_min..=n_max).map(|n| burst_len as f64 - (n * min_len) as f64).sum();
    first + second
}

/// `L²/2 · (ℓ_max − ℓ_min)/(ℓ_max ℓ_min)`.
pub fn asymptotic_nodes(burst_len: usize, min_len: usize, max_len: usize) -> f64 {
    let l = burst_len as f64;
    l * l / 2.0 * (max_len - min_len) as f64 / (max_len * min_len) as f64
}

/// `M · 𝒩^w` with windows of `L^w = base + L^o` units overlapping on
/// average `L^o = ℓ_h + 1.5 ℓ_max`, so `M = L / base`.
pub fn sliding_nodes_estimate(burst_len: usize, base_len: usize, min_len: usize, max_len: usize, header_units: usize) -> f64 {
    let overlap = header_units as f64 + 1.5 * max_len as f64;
    let window = base_len as f64 + overlap;
    let windows = burst_len as f64 / base_len as f64;
    let per_window = window * window / 2.0 * (max_len - min_len) as f64 / (max_len * min_len) as f64;
    windows * per_window
}

/// One column of the complexity comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityRow {
    pub burst_len: usize,
    pub trellis_formula: f64,
    pub trellis_counted: u64,
    pub sliding_formula: f64,
    /// Mean count-only sliding decode over random bursts.
    pub sliding_counted: f64,
    pub gain_formula: f64,
    pub gain_counted: f64,
}

/// Closed-form and counted node numbers for each burst length, the sliding
/// trellis using windows of `base_len` plus the realized overlap.
pub fn complexity_table(
    profile: &FrameProfile,
    burst_lens: &[usize],
    base_len: usize,
    bursts: usize,
    seed: u64,
) -> Result<Vec<ComplexityRow>> {
    let (min_len, max_len) = (profile.lengths.min_len(), profile.lengths.max_len());
    let mut rows = Vec::with_capacity(burst_lens.len());
    for &l in burst_lens {
        let plan = WindowPlan::new(l, base_len, profile)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut st = 0u64;
        for _ in 0..bursts.max(1) {
            let burst = generate_burst(&mut rng, l, profile)?;
            st += count_nodes(&plan, &burst.boundaries()).nodes_visited;
        }
        let sliding_counted = st as f64 / bursts.max(1) as f64;
        let trellis_formula = two_triangle_nodes(l, min_len, max_len);
        let trellis_counted = Region::full(l, min_len, max_len).counters().nodes_visited;
        let sliding_formula = sliding_nodes_estimate(l, base_len, min_len, max_len, profile.header_units());
        rows.push(ComplexityRow {
            burst_len: l,
            trellis_formula,
            trellis_counted,
            sliding_formula,
            sliding_counted,
            gain_formula: trellis_formula / sliding_formula,
            gain_counted: trellis_counted as f64 / sliding_counted,
        });
    }
    Ok(rows)
}
