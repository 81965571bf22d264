use proptest::prelude::*;
use statrs::distribution::{DiscreteCDF, Hypergeometric};

use super::*;
use crate::complexity::trellis_nodes;
use crate::frame_model::Frame;

fn data(start: usize, end: usize) -> Frame {
    Frame { start, end, kind: FrameKind::Data }
}

fn truth(frames: Vec<Frame>) -> Burst {
    let len_units = frames.last().unwrap().end;
    Burst { bits: vec![0; len_units * 8], frames, len_units, granularity: 8 }
}

fn small(methods: Vec<Method>) -> ExperimentConfig {
    ExperimentConfig {
        burst_bytes: 600,
        snr: SnrGrid::new(0.0, 4.0, 2.0),
        methods,
        bursts: 4,
        seed: 11,
        ..ExperimentConfig::default()
    }
}

/// One-sided Fisher exact test that the higher-SNR point is worse.
fn worse_p_value(lo: &EFLRPoint, hi: &EFLRPoint) -> f64 {
    let population = lo.frames_total + hi.frames_total;
    let successes = lo.frames_wrong + hi.frames_wrong;
    if successes == 0 || hi.frames_wrong == 0 {
        return 1.0;
    }
    let h = Hypergeometric::new(population, successes, hi.frames_total).unwrap();
    h.sf(hi.frames_wrong - 1)
}

#[test]
fn score_exact_estimate() {
    let b = truth(vec![data(0, 60), data(60, 150), Frame { start: 150, end: 200, kind: FrameKind::Padding }]);
    let est = SyncEstimate::new(b.boundaries(), true);
    assert_eq!(score_frames(&b, &est, false), (2, 0));
    assert_eq!(score_frames(&b, &est, true), (3, 0));
}

#[test]
fn score_shifted_estimate() {
    let b = truth(vec![data(0, 60), data(60, 150), data(150, 200)]);
    let est = SyncEstimate::new(vec![61, 151, 201], false);
    assert_eq!(score_frames(&b, &est, false), (3, 3));
}

#[test]
fn score_one_wrong_end() {
    let b = truth(vec![data(0, 60), data(60, 150)]);
    let est = SyncEstimate::new(vec![60, 149, 150], false);
    let (total, wrong) = score_frames(&b, &est, false);
    assert_eq!((total, wrong), (2, 1));
    assert_eq!(wrong as f64 / total as f64, 0.5);
    // the boundaries must be consecutive, not merely present
    let est = SyncEstimate::new(vec![30, 60, 100, 150], false);
    assert_eq!(score_frames(&b, &est, false), (2, 2));
}

#[test]
fn padding_scored_only_when_asked() {
    let b = truth(vec![data(0, 60), Frame { start: 60, end: 100, kind: FrameKind::Padding }]);
    let est = SyncEstimate::new(vec![60, 80, 100], false);
    assert_eq!(score_frames(&b, &est, false), (1, 0));
    assert_eq!(score_frames(&b, &est, true), (2, 1));
}

#[test]
fn snr_grid() {
    let g: SnrGrid = "0:12:2".parse().unwrap();
    assert_eq!(g.points(), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0]);
    let g: SnrGrid = "-1:0:0.1".parse().unwrap();
    assert_eq!(g.points().len(), 11);
    assert_eq!(g.points()[3], -0.7);
    assert_eq!("5".parse::<SnrGrid>().unwrap().points(), vec![5.0]);
    for bad in ["", "1:2", "4:2:1", "0:4:0", "0:4:-1", "a:b:c", "0:inf:1"] {
        assert!(bad.parse::<SnrGrid>().is_err(), "{bad}");
    }
}

#[test]
fn method_lists() {
    assert_eq!(parse_methods("trellis,st").unwrap(), vec![Method::Trellis, Method::St]);
    assert_eq!(parse_methods("hunt, sliding ,MU").unwrap(), vec![Method::Hard, Method::St, Method::Mu]);
    assert!(parse_methods("trellis,viterbi").is_err());
    let config = ExperimentConfig { methods: vec![Method::Hard, Method::Trellis, Method::Hard], ..small(vec![]) };
    assert_eq!(config.method_set(), vec![Method::Trellis, Method::Hard]);
}

#[test]
fn invalid_configs() {
    let ok = small(vec![Method::Mu]);
    ok.validate().unwrap();
    let cases = [
        ExperimentConfig { bursts: 0, ..ok.clone() },
        ExperimentConfig { methods: vec![], ..ok.clone() },
        ExperimentConfig { snr: SnrGrid::new(3.0, 1.0, 1.0), ..ok.clone() },
        ExperimentConfig { lmin: 3, ..ok.clone() },
        ExperimentConfig { lmax: 10, lmin: 20, ..ok.clone() },
        ExperimentConfig { sigma2: Some(-1.0), ..ok.clone() },
        ExperimentConfig { methods: vec![Method::St], window_bytes: 300, ..ok.clone() },
    ];
    for c in cases {
        assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        assert!(run_sweep(&c).is_err());
    }
}

#[test]
fn noiseless_trellis_is_exact() {
    let config = ExperimentConfig { sigma2: Some(1e-6), ..small(vec![Method::Trellis]) };
    let pts = run_sweep(&config).unwrap();
    assert_eq!(pts.len(), 3);
    for p in &pts {
        assert_eq!(p.eflr, 0.0);
        assert!(p.frames_total > 0);
        assert_eq!(p.mean_nodes, trellis_nodes(600, 50, 200) as f64);
    }
}

#[test]
fn sweeps_are_deterministic() {
    let config = small(Method::ALL.to_vec());
    let a = run_sweep(&config).unwrap();
    let b = run_sweep(&config).unwrap();
    assert_eq!(a.len(), 12);
    assert!(a.iter().zip(&b).all(|(x, y)| x.same_counts(y)));
    // the method subset does not change the realizations
    let mu = run_sweep(&small(vec![Method::Mu])).unwrap();
    let mu_all: Vec<_> = a.iter().filter(|p| p.method == Method::Mu).collect();
    assert!(mu.iter().zip(mu_all).all(|(x, y)| x.same_counts(y)));
    // every method sees the same frames
    for w in a.chunks(4) {
        assert!(w.iter().all(|p| p.frames_total == w[0].frames_total && p.snr_db == w[0].snr_db));
    }
}

#[test]
fn trellis_nodes_do_not_depend_on_snr() {
    let config = ExperimentConfig { burst_bytes: 1200, ..small(vec![Method::Trellis, Method::St]) };
    let full = trellis_nodes(1200, 50, 200) as f64;
    let pts = run_sweep(&config).unwrap();
    for p in pts.iter().filter(|p| p.method == Method::Trellis) {
        assert_eq!(p.mean_nodes, full);
    }
    for p in pts.iter().filter(|p| p.method == Method::St) {
        assert!(p.mean_nodes > 0.0 && p.mean_nodes < full, "{p:?}");
    }
}

#[test]
fn paired_difference_of_identical_methods() {
    let sweep = run_trials(&small(vec![Method::Trellis, Method::Mu])).unwrap();
    assert_eq!(sweep.records.len(), 3 * 4 * 2);
    assert_eq!(paired_difference(&sweep, 0, Method::Mu, Method::Mu), (0.0, 0.0));
    let (d, se) = paired_difference(&sweep, 0, Method::Mu, Method::Trellis);
    assert!(d > 0.0 && se >= 0.0);
}

#[test]
fn snr_crossing() {
    let p = |snr_db, eflr| EFLRPoint {
        method: Method::Trellis,
        snr_db,
        frames_total: 100,
        frames_wrong: 0,
        eflr,
        mean_nodes: 0.0,
        seconds: 0.0,
    };
    let curve = [p(0.0, 1.0), p(2.0, 0.01), p(4.0, 0.0)];
    assert!((snr_at_eflr(&curve, Method::Trellis, 0.1).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(snr_at_eflr(&curve, Method::Trellis, 1.0), Some(0.0));
    assert!((snr_at_eflr(&curve, Method::Trellis, 0.005).unwrap() - 3.0).abs() < 1e-12);
    assert_eq!(snr_at_eflr(&curve, Method::St, 0.1), None);
    assert_eq!(snr_at_eflr(&curve[..2], Method::Trellis, 1e-3), None);
}

#[test]
fn one_point_is_a_two_line_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    let config = ExperimentConfig { snr: SnrGrid::new(3.0, 3.0, 1.0), ..small(vec![Method::Hard]) };
    let pts = run_sweep(&config).unwrap();
    emit_results(&pts, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[1].starts_with("hard,3.0,"), "{}", lines[1]);
}

#[test]
fn csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let pts = run_sweep(&small(vec![Method::Mu, Method::Hard, Method::St])).unwrap();
    emit_results(&pts, &path).unwrap();
    assert_eq!(read_results(&path).unwrap(), pts);
    assert!(emit_results(&[], &path).is_err());
    assert!(matches!(emit_results(&pts, &dir.path().join("missing/x.csv")), Err(Error::Io(_))));
    std::fs::write(&path, "a,b\n1,2\n").unwrap();
    assert!(read_results(&path).is_err());
}

#[test]
fn default_config_is_the_wimax_setup() {
    let c = ExperimentConfig::default();
    assert_eq!(c.method_set(), Method::ALL.to_vec());
    assert_eq!(c.snr.points().len(), 7);
    assert_eq!((c.burst_bytes, c.lmin, c.lmax, c.window_bytes, c.bursts), (1800, 50, 200, 480, 200));
    c.validate().unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eflr_does_not_rise_with_snr(seed in any::<u64>(), rayleigh in any::<bool>(), lo in 0.0f64..8.0) {
        let config = ExperimentConfig {
            burst_bytes: 500,
            channel: if rayleigh { ChannelKind::Rayleigh } else { ChannelKind::Awgn },
            snr: SnrGrid::new(lo, lo + 16.0, 4.0),
            methods: vec![Method::Mu, Method::Hard],
            bursts: 6,
            seed,
            ..ExperimentConfig::default()
        };
        let pts = run_sweep(&config).unwrap();
        for p in &pts {
            prop_assert!(p.frames_wrong <= p.frames_total);
            prop_assert!((0.0..=1.0).contains(&p.eflr));
            prop_assert_eq!(p.eflr, p.frames_wrong as f64 / p.frames_total as f64);
        }
        for m in [Method::Mu, Method::Hard] {
            let curve: Vec<_> = pts.iter().filter(|p| p.method == m).collect();
            for w in curve.windows(2) {
                prop_assert!(worse_p_value(w[0], w[1]) >= 0.01, "{:?} -> {:?}", w[0], w[1]);
            }
        }
    }
}
