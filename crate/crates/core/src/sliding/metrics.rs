//! Reference metrics for transitions into the right edge of a non-final
//! window, where the frame in progress is cut by the window.

use crate::frame_model::{transition_prob, FrameProfile};
use crate::trellis::{ln_marginalize_other_crc, ln_marginalize_payload};

use crate::channel::ln_add;

/// `ln γ^t(ℓ̄′, L_m)`: a frame starting at `prev` whose header lies inside
/// the window but whose end does not. The unknown length is summed over every
/// admissible value not shorter than the remaining span, weighted by `π_λ`.
///
/// `table` covers the window, `window_len` units. Returns `-inf` when the
/// header does not fit or `prev` is out of reach of the edge.
pub fn ln_gamma_truncated(prev: usize, window_len: usize, profile: &FrameProfile, table: &[[f64; 2]]) -> f64 {
    let dist = &profile.lengths;
    let spec = &profile.header;
    let g = profile.granularity();
    let hb = spec.header_bits();
    if prev >= window_len || window_len - prev > dist.max_len() || (window_len - prev) * g < hb {
        return f64::NEG_INFINITY;
    }
    let remaining = window_len - prev;
    let bit0 = prev * g;
    let header = &table[bit0..bit0 + hb];
    let ln_k: f64 = spec
        .constant_bits()
        .iter()
        .zip(&header[spec.constant.range()])
        .map(|(&b, l)| l[b as usize])
        .sum();
    let mut acc = f64::NEG_INFINITY;
    for len in remaining.max(dist.min_len())..=dist.max_len() {
        let u = crate::frame_model::uint_to_bits(len as u64, spec.length.width);
        let ln_u: f64 = u.iter().zip(&header[spec.length.range()]).map(|(&b, l)| l[b as usize]).sum();
        let ln_oc = ln_marginalize_other_crc(spec, len as u64, &header[spec.other.range()], &header[spec.hec.range()])
            .expect("spans sized from the header layout");
        acc = ln_add(acc, dist.prob(len).ln() + ln_u + ln_oc);
    }
    let prior = transition_prob(prev, window_len, window_len, dist).expect("prev < window_len");
    prior.ln() + ln_k + acc + ln_marginalize_payload(&table[bit0 + hb..window_len * g])
}

pub fn gamma_truncated(prev: usize, window_len: usize, profile: &FrameProfile, table: &[[f64; 2]]) -> f64 {
    ln_gamma_truncated(prev, window_len, profile, table).exp()
}

/// `ln γ^e(ℓ̄′, L_m)`: the window cuts the header itself; every bit of the
/// partial header is taken as equiprobable.
pub fn ln_gamma_header_truncated(prev: usize, window_len: usize, profile: &FrameProfile, table: &[[f64; 2]]) -> f64 {
    let dist = &profile.lengths;
    let g = profile.granularity();
    if prev >= window_len || (window_len - prev) * g >= profile.header.header_bits() {
        return f64::NEG_INFINITY;
    }
    let prior = transition_prob(prev, window_len, window_len, dist).expect("prev < window_len");
    prior.ln() + ln_marginalize_payload(&table[prev * g..window_len * g])
}

pub fn gamma_header_truncated(prev: usize, window_len: usize, profile: &FrameProfile, table: &[[f64; 2]]) -> f64 {
    ln_gamma_header_truncated(prev, window_len, profile, table).exp()
}
