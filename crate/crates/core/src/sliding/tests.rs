use std::f64::consts::LN_2;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::channel::{ln_add, transmit, ChannelConfig, ChannelKind};
use crate::frame_model::{generate_burst, uint_to_bits};
use crate::trellis::{self, BranchMetrics};

fn toy() -> FrameProfile {
    FrameProfile::toy(3, 4, 10).unwrap()
}

fn random_table(rng: &mut impl Rng, bits: usize) -> Vec<[f64; 2]> {
    (0..bits)
        .map(|_| [rng.random_range(0.01f64..1.5).ln(), rng.random_range(0.01f64..1.5).ln()])
        .collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn observe(bits: &[u8], kind: ChannelKind, sigma2: f64, rng: &mut impl Rng) -> LikelihoodTable {
    let obs = transmit(bits, &ChannelConfig::with_sigma2(kind, sigma2), rng);
    LikelihoodTable::from_observation(&obs, sigma2.max(1e-6)).unwrap()
}

#[test]
fn plan_for_wimax_bursts() {
    let p = FrameProfile::wimax();
    let plan = WindowPlan::new(1800, 600, &p).unwrap();
    assert_eq!(plan.edges(), &[600, 1200, 1800]);
    assert_eq!(plan.window_count(), 3);
    assert_eq!(plan.overlap_bounds(), (206, 406));
    assert_eq!(plan.expected_overlap(), 306.0);
    let plan = WindowPlan::new(1800, 480, &p).unwrap();
    assert_eq!(plan.edges(), &[480, 960, 1440, 1800]);
    // a 100-byte tail joins the previous window
    let plan = WindowPlan::new(1300, 600, &p).unwrap();
    assert_eq!(plan.edges(), &[600, 1300]);
    assert_eq!(WindowPlan::new(1800, 1800, &p).unwrap().window_count(), 1);
    assert_eq!(WindowPlan::single(1800, &p).unwrap().edges(), &[1800]);
    assert!(matches!(WindowPlan::new(1800, 405, &p), Err(Error::Config(_))));
    assert!(WindowPlan::new(1800, 406, &p).is_ok());
}

#[test]
fn reliable_cutoff() {
    let plan = WindowPlan::new(1800, 600, &FrameProfile::wimax()).unwrap();
    // 786 − 200 − 6 = 580
    assert_eq!(reliable_prefix(&[100, 300, 580, 700], 786, &plan), 3);
    assert_eq!(reliable_prefix(&[100, 581], 786, &plan), 1);
    assert_eq!(reliable_prefix(&[100, 90, 300], 786, &plan), 1);
    assert_eq!(reliable_prefix(&[600], 786, &plan), 0);
    assert_eq!(reliable_prefix(&[], 786, &plan), 0);
}

/// Brute-force `φ^t`: every admissible length and every unknown-field value.
fn brute_truncated(profile: &FrameProfile, table: &[[f64; 2]], prev: usize, window_len: usize) -> f64 {
    let spec = &profile.header;
    let dist = &profile.lengths;
    let g = profile.granularity();
    let hb = spec.header_bits();
    let ow = spec.other.width;
    let bit0 = prev * g;
    let remaining = window_len - prev;
    let mut acc = f64::NEG_INFINITY;
    for len in remaining.max(dist.min_len())..=dist.max_len() {
        for o in 0..1u64 << ow {
            let h = spec.encode(len as u64, o);
            let lh: f64 = h.iter().enumerate().map(|(i, &b)| table[bit0 + i][b as usize]).sum();
            acc = ln_add(acc, dist.prob(len).ln() + lh - ow as f64 * LN_2);
        }
    }
    let payload: f64 =
        table[bit0 + hb..window_len * g].iter().map(|l| ((l[0].exp() + l[1].exp()) / 2.0).ln()).sum();
    let prior = crate::frame_model::transition_prob(prev, window_len, window_len, dist).unwrap();
    prior.ln() + acc + payload
}

#[test]
fn truncated_gamma_matches_brute_force() {
    let profile = toy();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let window_len = 30;
    let table = random_table(&mut rng, window_len * 4);
    for prev in window_len - 10..=window_len - 3 {
        let fast = ln_gamma_truncated(prev, window_len, &profile, &table);
        let brute = brute_truncated(&profile, &table, prev, window_len);
        assert!(close(fast, brute, 1e-9), "{prev}: {fast} vs {brute}");
    }
    assert_eq!(ln_gamma_truncated(window_len - 11, window_len, &profile, &table), f64::NEG_INFINITY);
    assert_eq!(ln_gamma_truncated(window_len - 2, window_len, &profile, &table), f64::NEG_INFINITY);
}

#[test]
fn truncated_gamma_edge_cases() {
    let profile = FrameProfile::wimax();
    let spec = &profile.header;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let table = random_table(&mut rng, 786 * 8);
    // only the header is observed: no payload factor, every length possible
    let prev = 780;
    let header = &table[prev * 8..786 * 8];
    let ln_k: f64 = (0..13).map(|i| header[i][0]).sum();
    let mut sum = f64::NEG_INFINITY;
    for len in 50..=200u64 {
        let ln_u: f64 = uint_to_bits(len, 11).iter().zip(&header[13..24]).map(|(&b, l)| l[b as usize]).sum();
        let oc = trellis::ln_marginalize_other_crc(spec, len, &header[24..40], &header[40..48]).unwrap();
        sum = ln_add(sum, (1.0f64 / 151.0).ln() + ln_u + oc);
    }
    assert!(close(ln_gamma_truncated(prev, 786, &profile, &table), ln_k + sum, 1e-10));
    // a full ℓ_max left: only ℓ_max itself is admissible
    let prev = 586;
    let header = &table[prev * 8..prev * 8 + 48];
    let ln_u: f64 = uint_to_bits(200, 11).iter().zip(&header[13..24]).map(|(&b, l)| l[b as usize]).sum();
    let ln_k: f64 = (0..13).map(|i| header[i][0]).sum();
    let oc = trellis::ln_marginalize_other_crc(spec, 200, &header[24..40], &header[40..48]).unwrap();
    let payload = trellis::ln_marginalize_payload(&table[prev * 8 + 48..786 * 8]);
    let expected = (1.0f64 / 151.0).ln() + (1.0f64 / 151.0).ln() + ln_k + ln_u + oc + payload;
    assert!(close(ln_gamma_truncated(prev, 786, &profile, &table), expected, 1e-10));
}

#[test]
fn header_truncated_gamma() {
    let profile = FrameProfile::wimax();
    let d = 0.37f64;
    let table = vec![[d.ln(); 2]; 786 * 8];
    // one byte left; prior is 1 since fewer than ℓ_min bytes remain
    assert!(close(gamma_header_truncated(785, 786, &profile, &table), d.powi(8), 1e-12));
    assert_eq!(ln_gamma_header_truncated(780, 786, &profile, &table), f64::NEG_INFINITY);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let table = random_table(&mut rng, 10 * 8);
    let span = &table[9 * 8..];
    let brute: f64 = (0..1u32 << 8)
        .map(|x| (0..8).map(|i| span[i][((x >> (7 - i)) & 1) as usize].exp()).product::<f64>() / 256.0)
        .sum();
    assert!(close(gamma_header_truncated(9, 10, &profile, &table), brute, 1e-12));
    // 12-bit span on the toy profile
    let toy = toy();
    let table = random_table(&mut rng, 10 * 4);
    let span = &table[7 * 4..];
    assert_eq!(span.len(), 12);
    let brute: f64 = (0..1u32 << 12)
        .map(|x| (0..12).map(|i| span[i][((x >> (11 - i)) & 1) as usize].exp()).product::<f64>() / 4096.0)
        .sum();
    assert_eq!(ln_gamma_header_truncated(7, 10, &toy, &table), f64::NEG_INFINITY);
    assert!(close(trellis::marginalize_payload(span), brute, 1e-12));
    let span = &table[8 * 4..];
    let brute: f64 = (0..1u32 << 8)
        .map(|x| (0..8).map(|i| span[i][((x >> (7 - i)) & 1) as usize].exp()).product::<f64>() / 256.0)
        .sum();
    assert!(close(gamma_header_truncated(8, 10, &toy, &table), brute, 1e-12));
}

#[test]
fn window_edge_metrics_match_reference() {
    let profile = toy();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for len in [23, 30, 41] {
        let table = random_table(&mut rng, len * 4);
        let m = BranchMetrics::build(&profile, &table, len, EdgeRule::Truncated);
        for start in 0..len {
            let reference = ln_add(
                ln_gamma_truncated(start, len, &profile, &table),
                ln_gamma_header_truncated(start, len, &profile, &table),
            );
            assert!(close(m.edge_ln(start), reference, 1e-10), "{len}/{start}: {} vs {reference}", m.edge_ln(start));
            assert_eq!(m.edge_padding_share(start), 0.0);
        }
    }
}

#[test]
fn seed_is_normalized_and_concentrates() {
    let profile = FrameProfile::wimax();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let burst = generate_burst(&mut rng, 1800, &profile).unwrap();
    let table = observe(&burst.bits, ChannelKind::Awgn, 0.05, &mut rng);
    let plan = WindowPlan::new(1800, 600, &profile).unwrap();
    let (res, posts) = run_with_posteriors(&table, &profile, &plan).unwrap();
    let w = &res.windows[0];
    let offset = w.committed.last().unwrap() - w.start;
    let seed = seed_alpha(&posts[0], w.n_committed, offset, 200);
    assert!((seed.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(seed.iter().all(|&s| s >= 0.0));
    assert!(seed[0] > 0.999, "seed {:?}", &seed[..seed.len().min(4)]);
}

#[test]
fn single_window_is_the_full_trellis() {
    let profile = FrameProfile::wimax();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let burst = generate_burst(&mut rng, 1800, &profile).unwrap();
    let table = observe(&burst.bits, ChannelKind::Rayleigh, 0.5, &mut rng);
    let plan = WindowPlan::single(1800, &profile).unwrap();
    let (res, posts) = run_with_posteriors(&table, &profile, &plan).unwrap();
    let full = trellis::forward_backward(&table, &profile, 1800).unwrap();
    assert_eq!(res.estimate, trellis::estimate(&full));
    assert_eq!(res.counters, full.counters);
    for n in 0..full.stage_count() {
        let a = full.stage_posteriors(n);
        let b = posts[0].stage_posteriors(n);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.0, y.0);
            assert_eq!(x.1.to_bits(), y.1.to_bits());
        }
    }
}

#[test]
fn noiseless_wimax_burst() {
    let profile = FrameProfile::wimax();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for base in [480, 600] {
        let burst = generate_burst(&mut rng, 1800, &profile).unwrap();
        let table = observe(&burst.bits, ChannelKind::Awgn, 0.0, &mut rng);
        let plan = WindowPlan::new(1800, base, &profile).unwrap();
        let res = run(&table, &profile, &plan).unwrap();
        assert_eq!(res.estimate.boundaries, burst.boundaries());
        assert_eq!(res.estimate.is_padding_last, burst.padding_present());
        let (lo, hi) = plan.overlap_bounds();
        for pair in res.windows.windows(2) {
            let overlap = pair[0].start + pair[0].len - pair[1].start;
            assert!(lo <= overlap && overlap < hi, "overlap {overlap}");
            assert!(!pair[0].forced);
        }
        let full = trellis::forward_backward(&table, &profile, 1800).unwrap();
        assert!(res.counters.nodes_visited < full.counters.nodes_visited);
    }
}

#[test]
fn noiseless_toy_windows_agree_with_full_trellis() {
    let profile = toy();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let burst = generate_burst(&mut rng, 120, &profile).unwrap();
        let table = observe(&burst.bits, ChannelKind::Awgn, 0.0, &mut rng);
        let (full, _) = trellis::synchronize(&table, &profile, 120).unwrap();
        let plan = WindowPlan::new(120, 24, &profile).unwrap();
        let res = run(&table, &profile, &plan).unwrap();
        assert_eq!(res.estimate, full);
    }
}

#[test]
fn count_only_walker_matches_noiseless_decode() {
    let profile = FrameProfile::wimax();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let burst = generate_burst(&mut rng, 1800, &profile).unwrap();
    let table = observe(&burst.bits, ChannelKind::Awgn, 0.0, &mut rng);
    let plan = WindowPlan::new(1800, 480, &profile).unwrap();
    let res = run(&table, &profile, &plan).unwrap();
    // noiseless seeds collapse to a point
    assert_eq!(count_nodes_seeded(&plan, &burst.boundaries(), 1), res.counters);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn committed_boundaries_increase_to_the_end(
        seed in any::<u64>(),
        burst_len in 30usize..160,
        base in 23usize..60,
        sigma2 in 0.05f64..2.0,
    ) {
        let profile = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let burst = generate_burst(&mut rng, burst_len, &profile).unwrap();
        let table = observe(&burst.bits, ChannelKind::Awgn, sigma2, &mut rng);
        let plan = WindowPlan::new(burst_len, base, &profile).unwrap();
        let res = match run(&table, &profile, &plan) {
            Ok(r) => r,
            Err(Error::DecodeFailure { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let b = &res.estimate.boundaries;
        prop_assert_eq!(b.last().copied(), Some(burst_len));
        let committed: Vec<usize> = res.windows[..res.windows.len() - 1].iter().flat_map(|w| w.committed.clone()).collect();
        prop_assert!(committed.windows(2).all(|p| p[0] < p[1]));
        for pair in res.windows.windows(2) {
            prop_assert!(pair[1].start >= pair[0].start);
            if pair[0].n_committed > 0 {
                prop_assert!(pair[1].start > pair[0].start);
            }
        }
    }

    #[test]
    fn sliding_visits_fewer_nodes_than_full_trellis(seed in any::<u64>(), base in 406usize..1000, factor in 4.0f64..8.0) {
        let profile = FrameProfile::wimax();
        let burst_len = (base as f64 * factor) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let burst = generate_burst(&mut rng, burst_len, &profile).unwrap();
        let plan = WindowPlan::new(burst_len, base, &profile).unwrap();
        let st = count_nodes(&plan, &burst.boundaries()).nodes_visited;
        let full = Region::full(burst_len, 50, 200).counters().nodes_visited;
        prop_assert!(st <= full, "L={} base={}: {} > {}", burst_len, base, st, full);
    }
}

