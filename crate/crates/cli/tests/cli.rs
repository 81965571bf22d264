use std::path::Path;
use std::process::{Command, Output};

fn framesync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_framesync")).args(args).output().expect("run framesync")
}

fn rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_owned).collect()
}

const HEADER: &str = "method,snr_db,frames_total,frames_wrong,eflr,mean_nodes,seconds";

#[test]
fn grid_gives_methods_times_points_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let res = framesync(&[
        "simulate", "--methods", "trellis,st", "--snr", "0:12:2", "--bursts", "200", "--seed", "7",
        "--burst-bytes", "500", "--out", out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let lines = rows(&out);
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 1 + 2 * 7);
    assert!(lines[1].starts_with("trellis,0.0,"));
    assert!(lines[2].starts_with("st,0.0,"));
    assert!(lines[14].starts_with("st,12.0,"));
}

#[test]
fn csv_goes_to_stdout_without_out() {
    let res = framesync(&["simulate", "--methods", "hard", "--snr", "10", "--bursts", "3", "--channel", "awgn"]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines, vec![HEADER, lines[1]]);
    assert!(lines[1].starts_with("hard,10.0,"));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        r#"
burst_bytes = 400
channel = "awgn"
snr = "20:24:2"
methods = ["mu", "hard"]
bursts = 5
seed = 3

[mu]
sync_misses = 2
"#,
    )
    .unwrap();
    let out = dir.path().join("a.csv");
    let res = framesync(&["simulate", "--config", cfg.to_str().unwrap(), "--methods", "mu", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let lines = rows(&out);
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.starts_with("mu,")));
    // noiseless-grade SNR: nothing lost
    assert!(lines[1..].iter().all(|l| l.split(',').nth(3) == Some("0")), "{lines:?}");

    let table = dir.path().join("b.toml");
    std::fs::write(&table, "snr = { min = 0.0, max = 1.0, step = 0.5 }\nmethods = \"hard\"\nbursts = 1\nburst_bytes = 300\n").unwrap();
    let res = framesync(&["simulate", "--config", table.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(String::from_utf8(res.stdout).unwrap().lines().count(), 4);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = dir.path().join("bad.toml");
    std::fs::write(&bad_key, "burst_length = 10\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["simulate", "--methods", "viterbi"],
        vec!["simulate", "--methods", ""],
        vec!["simulate", "--snr", "4:2:1"],
        vec!["simulate", "--channel", "rician"],
        vec!["simulate", "--bursts", "0"],
        vec!["simulate", "--window-bytes", "100", "--methods", "st"],
        vec!["simulate", "--config", bad_key.to_str().unwrap()],
        vec!["simulate", "--no-such-flag"],
        vec!["tables"],
        vec![],
    ];
    for args in cases {
        let res = framesync(&args);
        assert_eq!(res.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&res.stderr));
        assert!(!res.stderr.is_empty());
    }
}

#[test]
fn io_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unwritable = dir.path().join("no/such/dir/out.csv");
    let res = framesync(&["simulate", "--methods", "hard", "--snr", "5", "--bursts", "1", "--out", unwritable.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("cannot write"));
    let missing = dir.path().join("missing.toml");
    let res = framesync(&["simulate", "--config", missing.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    let res = framesync(&["--help"]);
    assert_eq!(res.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&res.stdout).contains("simulate"));
}

#[test]
fn complexity_table() {
    let res = framesync(&["tables", "--complexity", "--bursts", "5"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = String::from_utf8(res.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    let cols: Vec<_> = lines[1].split_whitespace().collect();
    assert_eq!(&cols[..3], &["1800", "24300", "24337"]);
    assert!(lines[4].split_whitespace().nth(1) == Some("4320000"));
}
