//! Branch metrics `γ(ℓ′, ℓ)` of the frame-boundary trellis.
//!
//! The public functions evaluate single transitions directly from a
//! likelihood table and serve as the reference definitions. The decoders use
//! [`BranchMetrics`], which evaluates every transition of a trellis at once:
//! by linearity of a zero-initialized CRC, the HEC register of a header is
//! the register of its known bits XOR the register of its unknown bits, so
//! the sum over the unknown field is computed once per frame start and then
//! read off for every candidate length.

use std::f64::consts::LN_2;

use crate::channel::ln_add;
use crate::frame_model::{padding_prob, transition_prob, uint_to_bits, FrameProfile, HeaderSpec};
use crate::frame_model::FieldKind;
use crate::{Error, Result};

/// `Π ½(P(y_i|0) + P(y_i|1))`: likelihood of an uncoded, equiprobable span.
pub fn marginalize_payload(span: &[[f64; 2]]) -> f64 {
    ln_marginalize_payload(span).exp()
}

pub fn ln_marginalize_payload(span: &[[f64; 2]]) -> f64 {
    span.iter().map(|&[l0, l1]| ln_add(l0, l1) - LN_2).sum()
}

/// `Σ_o P(y_o|o)·P(y_c|c = f(k, u, o))·2^{-ℓ(o)}` for a header whose length
/// field holds `length_value`.
///
/// Runs a forward recursion over the `2^ℓc` CRC register states along the
/// working bits of the header: known bits move the register
/// deterministically, unknown bits branch with weight `½·P(y|bit)`, and each
/// final register value `r` is weighted by `P(y_c | c = r)`.
pub fn marginalize_other_crc(
    spec: &HeaderSpec,
    length_value: u64,
    other: &[[f64; 2]],
    hec: &[[f64; 2]],
) -> Result<f64> {
    ln_marginalize_other_crc(spec, length_value, other, hec).map(f64::exp)
}

pub fn ln_marginalize_other_crc(
    spec: &HeaderSpec,
    length_value: u64,
    other: &[[f64; 2]],
    hec: &[[f64; 2]],
) -> Result<f64> {
    if other.len() != spec.other.width || hec.len() != spec.hec.width {
        return Err(Error::Domain(format!(
            "expected {} other-field and {} HEC likelihoods, got {} and {}",
            spec.other.width,
            spec.hec.width,
            other.len(),
            hec.len()
        )));
    }
    let crc = spec.crc();
    let len_bits = uint_to_bits(length_value, spec.length.width);
    let mut dist = vec![0.0; crc.states()];
    let mut next = vec![0.0; crc.states()];
    dist[0] = 1.0;
    let mut ln_scale = 0.0;
    for i in 0..spec.working_bits() {
        next.iter_mut().for_each(|v| *v = 0.0);
        match spec.kind(i) {
            FieldKind::Other => {
                let [l0, l1] = other[i - spec.other.offset];
                let m = l0.max(l1);
                ln_scale += m;
                let (w0, w1) = (0.5 * (l0 - m).exp(), 0.5 * (l1 - m).exp());
                for (reg, &p) in dist.iter().enumerate() {
                    if p != 0.0 {
                        next[crc.step(reg as u32, 0) as usize] += p * w0;
                        next[crc.step(reg as u32, 1) as usize] += p * w1;
                    }
                }
            }
            kind => {
                let bit = match kind {
                    FieldKind::Constant => spec.constant_bits()[i - spec.constant.offset],
                    _ => len_bits[i - spec.length.offset],
                };
                for (reg, &p) in dist.iter().enumerate() {
                    if p != 0.0 {
                        next[crc.step(reg as u32, bit) as usize] += p;
                    }
                }
            }
        }
        std::mem::swap(&mut dist, &mut next);
    }
    let ln_c: Vec<f64> = (0..crc.states() as u32)
        .map(|reg| {
            crc.register_bits(reg)
                .iter()
                .zip(hec)
                .map(|(&b, l)| l[b as usize])
                .sum()
        })
        .collect();
    let top = ln_c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let total: f64 = dist.iter().zip(&ln_c).map(|(p, l)| p * (l - top).exp()).sum();
    Ok(total.ln() + top + ln_scale)
}

/// `ln φ^d` of a complete data frame of `len_units` starting at bit `start`.
pub(crate) fn ln_data_frame(profile: &FrameProfile, table: &[[f64; 2]], start: usize, len_units: usize) -> f64 {
    let spec = &profile.header;
    let hb = spec.header_bits();
    let header = &table[start..start + hb];
    let known = ln_known_fields(spec, header, len_units as u64);
    let crc = ln_marginalize_other_crc(spec, len_units as u64, &header[spec.other.range()], &header[spec.hec.range()])
        .expect("spans sized from the header layout");
    let payload = ln_marginalize_payload(&table[start + hb..start + len_units * profile.granularity()]);
    known + crc + payload
}

/// `ln P(y_k|k) + ln P(y_u|u)`.
pub(crate) fn ln_known_fields(spec: &HeaderSpec, header: &[[f64; 2]], length_value: u64) -> f64 {
    let k: f64 = spec
        .constant_bits()
        .iter()
        .zip(&header[spec.constant.range()])
        .map(|(&b, l)| l[b as usize])
        .sum();
    let u: f64 = uint_to_bits(length_value, spec.length.width)
        .iter()
        .zip(&header[spec.length.range()])
        .map(|(&b, l)| l[b as usize])
        .sum();
    k + u
}

/// `γ^d(ℓ′, ℓ)`: transition prior times the complete-data-frame likelihood.
/// Zero when `ℓ − ℓ′` is not an admissible frame length.
pub fn gamma_data(prev: usize, next: usize, burst_len: usize, profile: &FrameProfile, table: &[[f64; 2]]) -> f64 {
    ln_gamma_data(prev, next, burst_len, profile, table).exp()
}

pub fn ln_gamma_data(prev: usize, next: usize, burst_len: usize, profile: &FrameProfile, table: &[[f64; 2]]) -> f64 {
    let dist = &profile.lengths;
    if next <= prev || next > burst_len {
        return f64::NEG_INFINITY;
    }
    let len = next - prev;
    let prior = transition_prob(prev, next, burst_len, dist).unwrap_or(0.0);
    if prior == 0.0 || len < dist.min_len() || len > dist.max_len() {
        return f64::NEG_INFINITY;
    }
    prior.ln() + ln_data_frame(profile, table, prev * profile.granularity(), len)
}

/// `γ(ℓ′, L)` for the frame that closes the burst: a data frame with the
/// renormalized prior `π_{L−ℓ′} / Σ_{λ≤L−ℓ′} π_λ` weighted by `P(P_n = 0)`,
/// plus an all-ones padding frame weighted by `P(P_n = 1)`.
pub fn gamma_last(prev: usize, burst_len: usize, profile: &FrameProfile, table: &[[f64; 2]]) -> f64 {
    ln_gamma_last(prev, burst_len, profile, table).exp()
}

pub fn ln_gamma_last(prev: usize, burst_len: usize, profile: &FrameProfile, table: &[[f64; 2]]) -> f64 {
    let (data, pad) = ln_gamma_last_parts(prev, burst_len, profile, table);
    ln_add(data, pad)
}

/// Data and padding terms of [`ln_gamma_last`].
pub fn ln_gamma_last_parts(prev: usize, burst_len: usize, profile: &FrameProfile, table: &[[f64; 2]]) -> (f64, f64) {
    let dist = &profile.lengths;
    let g = profile.granularity();
    if prev >= burst_len || burst_len - prev > dist.max_len() {
        return (f64::NEG_INFINITY, f64::NEG_INFINITY);
    }
    let remaining = burst_len - prev;
    let p_pad = padding_prob(prev, burst_len, dist).expect("prev < burst_len");
    let data_prior = (1.0 - p_pad) * dist.last_data_prior(remaining);
    let data = if data_prior > 0.0 {
        data_prior.ln() + ln_data_frame(profile, table, prev * g, remaining)
    } else {
        f64::NEG_INFINITY
    };
    let pad = if p_pad > 0.0 {
        p_pad.ln() + table[prev * g..burst_len * g].iter().map(|l| l[1]).sum::<f64>()
    } else {
        f64::NEG_INFINITY
    };
    (data, pad)
}

/// How a trellis treats transitions into its right edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRule {
    /// The edge is the end of the burst: last data frame or padding.
    BurstEnd,
    /// The edge cuts the burst: frames may run past it.
    Truncated,
}

/// Prefix sums of log-values that may contain `-inf`.
struct LnPrefix {
    finite: Vec<f64>,
    neg_inf: Vec<u32>,
}

impl LnPrefix {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let mut finite = vec![0.0];
        let mut neg_inf = vec![0];
        let (mut f, mut c) = (0.0, 0);
        for v in values {
            if v == f64::NEG_INFINITY {
                c += 1;
            } else {
                f += v;
            }
            finite.push(f);
            neg_inf.push(c);
        }
        LnPrefix { finite, neg_inf }
    }

    fn sum(&self, range: std::ops::Range<usize>) -> f64 {
        if self.neg_inf[range.end] > self.neg_inf[range.start] {
            f64::NEG_INFINITY
        } else {
            self.finite[range.end] - self.finite[range.start]
        }
    }
}

/// Per-frame-start header quantities shared by every candidate length.
struct HeaderTerms {
    ln_constant: f64,
    ln_scale: f64,
    // W(s) = Σ_r D(r)·C(s ⊕ r), D the register distribution of the unknown
    // field alone, C the HEC likelihood
    hec_weight: Vec<f64>,
}

/// Candidate-length independent precomputation for a profile.
pub(crate) struct HeaderModel<'p> {
    profile: &'p FrameProfile,
    // register of the known fields for each admissible length
    known_register: Vec<u32>,
    length_bits: Vec<Vec<u8>>,
    first_other: Option<usize>,
}

impl<'p> HeaderModel<'p> {
    pub(crate) fn new(profile: &'p FrameProfile) -> Self {
        let spec = &profile.header;
        let dist = &profile.lengths;
        let lengths = dist.min_len()..=dist.max_len();
        let known_register = lengths
            .clone()
            .map(|len| spec.crc().remainder(&spec.working(len as u64, 0)))
            .collect();
        let length_bits = lengths.map(|len| uint_to_bits(len as u64, spec.length.width)).collect();
        let first_other = (0..spec.working_bits()).find(|&i| spec.kind(i) == FieldKind::Other);
        HeaderModel { profile, known_register, length_bits, first_other }
    }

    fn terms(&self, header: &[[f64; 2]], dist: &mut Vec<f64>, next: &mut Vec<f64>) -> HeaderTerms {
        let spec = &self.profile.header;
        let crc = spec.crc();
        let states = crc.states();
        dist.clear();
        dist.resize(states, 0.0);
        dist[0] = 1.0;
        let mut ln_scale = 0.0;
        if let Some(first) = self.first_other {
            for (i, l) in header.iter().enumerate().take(spec.working_bits()).skip(first) {
                next.clear();
                next.resize(states, 0.0);
                if spec.kind(i) == FieldKind::Other {
                    let m = l[0].max(l[1]);
                    ln_scale += m;
                    let (w0, w1) = (0.5 * (l[0] - m).exp(), 0.5 * (l[1] - m).exp());
                    for (reg, &p) in dist.iter().enumerate() {
                        if p != 0.0 {
                            next[crc.step(reg as u32, 0) as usize] += p * w0;
                            next[crc.step(reg as u32, 1) as usize] += p * w1;
                        }
                    }
                } else {
                    for (reg, &p) in dist.iter().enumerate() {
                        next[crc.step(reg as u32, 0) as usize] += p;
                    }
                }
                std::mem::swap(dist, next);
            }
        }
        // XOR-correlate with the HEC likelihood one register bit at a time
        let width = crc.width();
        for (j, l) in header[spec.hec.range()].iter().enumerate() {
            let m = l[0].max(l[1]);
            ln_scale += m;
            let (k_same, k_flip) = ((l[0] - m).exp(), (l[1] - m).exp());
            let bit = 1usize << (width - 1 - j);
            for x in 0..states {
                if x & bit == 0 {
                    let (a, b) = (dist[x], dist[x | bit]);
                    dist[x] = a * k_same + b * k_flip;
                    dist[x | bit] = a * k_flip + b * k_same;
                }
            }
        }
        let ln_constant = spec
            .constant_bits()
            .iter()
            .zip(&header[spec.constant.range()])
            .map(|(&b, l)| l[b as usize])
            .sum();
        HeaderTerms { ln_constant, ln_scale, hec_weight: dist.clone() }
    }

    /// `ln[P(y_k|k)·P(y_u|u(λ))·Σ_o …]` for candidate length `len`.
    fn ln_header(&self, terms: &HeaderTerms, header: &[[f64; 2]], len: usize) -> f64 {
        let spec = &self.profile.header;
        let idx = len - self.profile.lengths.min_len();
        let ln_u: f64 = self.length_bits[idx]
            .iter()
            .zip(&header[spec.length.range()])
            .map(|(&b, l)| l[b as usize])
            .sum();
        terms.ln_constant + ln_u + terms.hec_weight[self.known_register[idx] as usize].ln() + terms.ln_scale
    }
}

/// Every branch metric of a trellis over units `0..len` of a likelihood
/// table.
///
/// Data transitions ending strictly before the edge are stored linearly;
/// the table is expected to be normalized (see
/// [`LikelihoodTable::normalized`](crate::channel::LikelihoodTable::normalized))
/// so that they stay in floating-point range. Transitions into the edge are
/// kept as logarithms.
pub(crate) struct BranchMetrics {
    min_len: usize,
    max_len: usize,
    data: Vec<f64>,
    edge_ln: Vec<f64>,
    edge_padding_share: Vec<f64>,
}

impl BranchMetrics {
    /// `table` holds exactly the `len · granularity` bits of the trellis.
    pub(crate) fn build(profile: &FrameProfile, table: &[[f64; 2]], len: usize, rule: EdgeRule) -> Self {
        let dist = &profile.lengths;
        let g = profile.granularity();
        let hb = profile.header.header_bits();
        assert_eq!(table.len(), len * g, "likelihood table does not cover the trellis");
        let (min_len, max_len) = (dist.min_len(), dist.max_len());
        let width = max_len - min_len + 1;
        let model = HeaderModel::new(profile);
        let payload = LnPrefix::new(table.iter().map(|&[l0, l1]| ln_add(l0, l1) - LN_2));
        let ones = LnPrefix::new(table.iter().map(|l| l[1]));
        let ln_pi: Vec<f64> = (min_len..=max_len).map(|l| dist.prob(l).ln()).collect();

        let mut data = vec![0.0; len * width];
        let mut edge_ln = vec![f64::NEG_INFINITY; len];
        let mut edge_padding_share = vec![0.0; len];
        let (mut buf_a, mut buf_b) = (Vec::new(), Vec::new());
        for start in 0..len {
            let remaining = len - start;
            let bit0 = start * g;
            let header_fits = remaining * g >= hb;
            let needs_header = remaining > min_len || (header_fits && remaining <= max_len);
            if !needs_header {
                if remaining <= max_len {
                    let (ln, share) = edge_without_header(profile, rule, &payload, &ones, start, len);
                    edge_ln[start] = ln;
                    edge_padding_share[start] = share;
                }
                continue;
            }
            let header = &table[bit0..bit0 + hb];
            let terms = model.terms(header, &mut buf_a, &mut buf_b);
            let row = &mut data[start * width..(start + 1) * width];
            for (i, slot) in row.iter_mut().enumerate() {
                let flen = min_len + i;
                if flen >= remaining {
                    break;
                }
                let ln = ln_pi[i] + model.ln_header(&terms, header, flen) + payload.sum(bit0 + hb..bit0 + flen * g);
                *slot = ln.exp();
            }
            if remaining <= max_len {
                let (ln, share) = match rule {
                    EdgeRule::BurstEnd => {
                        let p_pad = padding_prob(start, len, dist).expect("start < len");
                        let data_prior = (1.0 - p_pad) * dist.last_data_prior(remaining);
                        let ln_data = if data_prior > 0.0 {
                            data_prior.ln()
                                + model.ln_header(&terms, header, remaining)
                                + payload.sum(bit0 + hb..len * g)
                        } else {
                            f64::NEG_INFINITY
                        };
                        let ln_pad = if p_pad > 0.0 { p_pad.ln() + ones.sum(bit0..len * g) } else { f64::NEG_INFINITY };
                        split(ln_data, ln_pad)
                    }
                    EdgeRule::Truncated => {
                        let prior = transition_prob(start, len, len, dist).expect("start < len");
                        let mut acc = f64::NEG_INFINITY;
                        for flen in remaining.max(min_len)..=max_len {
                            acc = ln_add(acc, ln_pi[flen - min_len] + model.ln_header(&terms, header, flen));
                        }
                        (prior.ln() + acc + payload.sum(bit0 + hb..len * g), 0.0)
                    }
                };
                edge_ln[start] = ln;
                edge_padding_share[start] = share;
            }
        }
        BranchMetrics { min_len, max_len, data, edge_ln, edge_padding_share }
    }

    /// Linear `γ` of a data frame of `flen` units from `start`, ending before the edge.
    #[inline]
    pub(crate) fn data_row(&self, start: usize) -> &[f64] {
        let width = self.max_len - self.min_len + 1;
        &self.data[start * width..(start + 1) * width]
    }

    /// `ln γ(start → edge)`, `-inf` when unreachable.
    #[inline]
    pub(crate) fn edge_ln(&self, start: usize) -> f64 {
        self.edge_ln[start]
    }

    /// Share of the edge transition from `start` explained by padding.
    pub(crate) fn edge_padding_share(&self, start: usize) -> f64 {
        self.edge_padding_share[start]
    }
}

/// Edge transitions too short to hold a header: forced padding at the end of
/// a burst, an equiprobable truncated header inside a window.
fn edge_without_header(
    profile: &FrameProfile,
    rule: EdgeRule,
    payload: &LnPrefix,
    ones: &LnPrefix,
    start: usize,
    len: usize,
) -> (f64, f64) {
    let dist = &profile.lengths;
    let g = profile.granularity();
    let span = start * g..len * g;
    match rule {
        EdgeRule::BurstEnd => {
            let p_pad = padding_prob(start, len, dist).expect("start < len");
            let ln_pad = if p_pad > 0.0 { p_pad.ln() + ones.sum(span) } else { f64::NEG_INFINITY };
            (ln_pad, 1.0)
        }
        EdgeRule::Truncated => {
            let prior = transition_prob(start, len, len, dist).expect("start < len");
            (prior.ln() + payload.sum(span), 0.0)
        }
    }
}

fn split(ln_data: f64, ln_pad: f64) -> (f64, f64) {
    let total = ln_add(ln_data, ln_pad);
    let share = if total == f64::NEG_INFINITY { 0.0 } else { (ln_pad - total).exp() };
    (total, share)
}
