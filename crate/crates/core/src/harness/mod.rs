//! Monte-Carlo experiment driver: SNR sweeps over synchronizers, EFLR
//! scoring and CSV result files.
//!
//! Every trial draws one burst and one channel realization and hands the
//! same likelihood table (or hard decisions) to every selected method, so
//! the methods are compared on paired realizations. The rng stream of a
//! trial depends only on the seed and the trial index: the set of methods
//! does not change what is transmitted, and the same burst and unit noise
//! sequence are reused, rescaled, at every SNR point.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::{debug, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{hard_decide, hunt_fs, mu_fs, MuConfig, SyndromeTable};
use crate::channel::{transmit, ChannelConfig, ChannelKind, LikelihoodTable};
use crate::frame_model::{generate_burst, Burst, FrameKind, FrameProfile};
use crate::sliding::{self, WindowPlan};
use crate::{trellis, Error, Result, SyncEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Full-burst forward-backward decode.
    #[serde(alias = "full")]
    Trellis,
    /// Sliding trellis.
    #[serde(alias = "sliding")]
    St,
    /// Modified-Ueda automaton on hard decisions.
    Mu,
    /// Hard-decision header hunt.
    #[serde(alias = "hunt")]
    Hard,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Trellis, Method::St, Method::Mu, Method::Hard];

    pub fn name(self) -> &'static str {
        match self {
            Method::Trellis => "trellis",
            Method::St => "st",
            Method::Mu => "mu",
            Method::Hard => "hard",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trellis" | "full" => Ok(Method::Trellis),
            "st" | "sliding" => Ok(Method::St),
            "mu" => Ok(Method::Mu),
            "hard" | "hunt" => Ok(Method::Hard),
            other => Err(Error::Config(format!("unknown method `{other}` (expected trellis, st, mu or hard)"))),
        }
    }
}

/// Parse a comma-separated method list.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

fn methods_from_list_or_text<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Method>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Text(String),
        List(Vec<Method>),
    }
    match Repr::deserialize(d)? {
        Repr::Text(s) => parse_methods(&s).map_err(serde::de::Error::custom),
        Repr::List(v) => Ok(v),
    }
}

/// Inclusive SNR grid in dB.
///
/// Deserializes from `{ min, max, step }` or from a `"MIN:MAX:STEP"` string.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SnrGridRepr")]
pub struct SnrGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl SnrGrid {
    pub fn new(min: f64, max: f64, step: f64) -> Self {
        SnrGrid { min, max, step }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.min.is_finite() && self.max.is_finite() && self.step.is_finite();
        if !finite || self.step <= 0.0 || self.max < self.min {
            return Err(Error::Config(format!(
                "SNR grid {}:{}:{} is empty (need min ≤ max and step > 0)",
                self.min, self.max, self.step
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| ((self.min + i as f64 * self.step) * 1e9).round() / 1e9).collect()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SnrGridRepr {
    Text(String),
    Table { min: f64, max: f64, step: f64 },
}

impl TryFrom<SnrGridRepr> for SnrGrid {
    type Error = Error;

    fn try_from(r: SnrGridRepr) -> Result<Self> {
        match r {
            SnrGridRepr::Text(s) => s.parse(),
            SnrGridRepr::Table { min, max, step } => {
                let g = SnrGrid::new(min, max, step);
                g.validate()?;
                Ok(g)
            }
        }
    }
}

impl FromStr for SnrGrid {
    type Err = Error;

    /// `MIN:MAX:STEP`, or a single value.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| {
            p.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad SNR value `{p}` in `{s}`")))
        };
        let grid = match parts.as_slice() {
            [v] => SnrGrid::new(num(v)?, num(v)?, 1.0),
            [lo, hi, step] => SnrGrid::new(num(lo)?, num(hi)?, num(step)?),
            _ => return Err(Error::Config(format!("SNR grid `{s}` is not MIN:MAX:STEP"))),
        };
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Burst length `L` in bytes.
    pub burst_bytes: usize,
    /// Frame lengths are uniform over `lmin..=lmax` bytes.
    pub lmin: usize,
    pub lmax: usize,
    pub channel: ChannelKind,
    pub snr: SnrGrid,
    #[serde(deserialize_with = "methods_from_list_or_text")]
    pub methods: Vec<Method>,
    /// Base window length of the sliding trellis, bytes.
    pub window_bytes: usize,
    /// Trials per SNR point.
    pub bursts: usize,
    pub seed: u64,
    /// Fixed noise variance used at every point instead of the SNR grid value.
    pub sigma2: Option<f64>,
    /// Count the padding frame in the EFLR denominator.
    pub include_padding: bool,
    pub mu: MuConfig,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            burst_bytes: 1800,
            lmin: 50,
            lmax: 200,
            channel: ChannelKind::Rayleigh,
            snr: SnrGrid::new(0.0, 12.0, 2.0),
            methods: Method::ALL.to_vec(),
            window_bytes: 480,
            bursts: 200,
            seed: 0,
            sigma2: None,
            include_padding: false,
            mu: MuConfig::default(),
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.snr.validate()?;
        if self.bursts == 0 {
            return Err(Error::Config("at least one burst per SNR point is needed".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no method selected".into()));
        }
        if let Some(s2) = self.sigma2 {
            ChannelConfig::with_sigma2(self.channel, s2).validate()?;
        }
        let profile = self.profile()?;
        if self.methods.contains(&Method::St) {
            WindowPlan::new(self.burst_bytes, self.window_bytes, &profile)?;
        }
        if self.burst_bytes < self.lmin {
            return Err(Error::Config(format!(
                "burst of {} bytes cannot hold a {}-byte frame",
                self.burst_bytes, self.lmin
            )));
        }
        Ok(())
    }

    pub fn profile(&self) -> Result<FrameProfile> {
        FrameProfile::wimax_with(self.lmin, self.lmax)
    }

    /// Methods in canonical order, without repeats.
    pub fn method_set(&self) -> Vec<Method> {
        let mut m = self.methods.clone();
        m.sort();
        m.dedup();
        m
    }

    fn channel_at(&self, snr_db: f64) -> ChannelConfig {
        match self.sigma2 {
            Some(s2) => ChannelConfig { kind: self.channel, snr_db, sigma2_override: Some(s2) },
            None => ChannelConfig::new(self.channel, snr_db),
        }
    }
}

/// Aggregated result of one method at one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EFLRPoint {
    pub method: Method,
    pub snr_db: f64,
    pub frames_total: u64,
    pub frames_wrong: u64,
    pub eflr: f64,
    /// Trellis nodes visited per burst; zero for the hard-decision methods.
    pub mean_nodes: f64,
    /// Decoding time summed over the trials of the point.
    pub seconds: f64,
}

impl EFLRPoint {
    /// Everything but the wall time.
    pub fn same_counts(&self, other: &EFLRPoint) -> bool {
        self.method == other.method
            && self.snr_db == other.snr_db
            && self.frames_total == other.frames_total
            && self.frames_wrong == other.frames_wrong
            && self.eflr == other.eflr
            && self.mean_nodes == other.mean_nodes
    }

    /// Binomial standard error of `eflr`.
    pub fn std_err(&self) -> f64 {
        if self.frames_total == 0 {
            return 0.0;
        }
        (self.eflr * (1.0 - self.eflr) / self.frames_total as f64).sqrt()
    }
}

/// Frames of `truth` counted in the EFLR and how many of them `est` misses.
///
/// A frame is located iff its start and end appear as consecutive
/// boundaries of the estimate. The padding frame is left out unless
/// `include_padding` is set.
pub fn score_frames(truth: &Burst, est: &SyncEstimate, include_padding: bool) -> (u64, u64) {
    let found: HashSet<(usize, usize)> = est.frames().collect();
    let mut total = 0;
    let mut wrong = 0;
    for f in &truth.frames {
        if f.kind == FrameKind::Padding && !include_padding {
            continue;
        }
        total += 1;
        if !found.contains(&(f.start, f.end)) {
            wrong += 1;
        }
    }
    (total, wrong)
}

/// Outcome of one method on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub point: usize,
    pub trial: usize,
    pub method: Method,
    pub frames_total: u64,
    pub frames_wrong: u64,
    pub nodes: u64,
    pub seconds: f64,
    pub failed: bool,
}

/// Per-trial records of a sweep, ordered by point, trial and method.
#[derive(Debug, Clone)]
pub struct SweepRecords {
    pub snr_db: Vec<f64>,
    pub methods: Vec<Method>,
    pub records: Vec<TrialRecord>,
}

/// The rng of trial `trial`: stream `trial` of the ChaCha8 generator keyed
/// by `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

struct Decoders {
    profile: FrameProfile,
    plan: Option<WindowPlan>,
    syndromes: SyndromeTable,
    mu: MuConfig,
    burst_len: usize,
}

impl Decoders {
    fn run(&self, method: Method, table: &LikelihoodTable, hard: &[u8]) -> Result<(SyncEstimate, u64)> {
        let p = &self.profile;
        match method {
            Method::Trellis => trellis::synchronize(table, p, self.burst_len).map(|(e, c)| (e, c.nodes_visited)),
            Method::St => {
                let plan = self.plan.as_ref().expect("window plan built for st");
                sliding::run(table, p, plan).map(|r| (r.estimate, r.counters.nodes_visited))
            }
            Method::Mu => Ok((mu_fs(hard, p, self.burst_len, &self.syndromes, &self.mu), 0)),
            Method::Hard => Ok((hunt_fs(hard, p, self.burst_len), 0)),
        }
    }
}

fn run_trial(config: &ExperimentConfig, dec: &Decoders, methods: &[Method], point: usize, snr_db: f64, trial: usize) -> Result<Vec<TrialRecord>> {
    let mut rng = trial_rng(config.seed, trial);
    let burst = generate_burst(&mut rng, config.burst_bytes, &dec.profile)?;
    let channel = config.channel_at(snr_db);
    let obs = transmit(&burst.bits, &channel, &mut rng);
    let needs_table = methods.iter().any(|m| matches!(m, Method::Trellis | Method::St));
    let table = if needs_table { LikelihoodTable::from_observation(&obs, channel.sigma2())? } else { LikelihoodTable::from_ln(Vec::new()) };
    let hard = hard_decide(&obs);
    let mut out = Vec::with_capacity(methods.len());
    for &method in methods {
        let t0 = Instant::now();
        let res = dec.run(method, &table, &hard);
        let seconds = t0.elapsed().as_secs_f64();
        let rec = match res {
            Ok((est, nodes)) => {
                let (frames_total, frames_wrong) = score_frames(&burst, &est, config.include_padding);
                TrialRecord { point, trial, method, frames_total, frames_wrong, nodes, seconds, failed: false }
            }
            Err(e) => {
                warn!("{method} failed on trial {trial} at {snr_db} dB: {e}");
                let (frames_total, _) = score_frames(&burst, &SyncEstimate::default(), config.include_padding);
                TrialRecord { point, trial, method, frames_total, frames_wrong: frames_total, nodes: 0, seconds, failed: true }
            }
        };
        out.push(rec);
    }
    Ok(out)
}

/// Run every trial of the sweep. Trials of a point run in parallel; the
/// records come back in a fixed order.
pub fn run_trials(config: &ExperimentConfig) -> Result<SweepRecords> {
    config.validate()?;
    let profile = config.profile()?;
    let methods = config.method_set();
    let plan = if methods.contains(&Method::St) {
        Some(WindowPlan::new(config.burst_bytes, config.window_bytes, &profile)?)
    } else {
        None
    };
    let dec = Decoders {
        syndromes: SyndromeTable::new(&profile.header),
        profile,
        plan,
        mu: config.mu,
        burst_len: config.burst_bytes,
    };
    let snr_db = config.snr.points();
    let mut records = Vec::with_capacity(snr_db.len() * config.bursts * methods.len());
    for (point, &snr) in snr_db.iter().enumerate() {
        let per_trial: Vec<Vec<TrialRecord>> = (0..config.bursts)
            .into_par_iter()
            .map(|trial| run_trial(config, &dec, &methods, point, snr, trial))
            .collect::<Result<_>>()?;
        records.extend(per_trial.into_iter().flatten());
        debug!("SNR {snr} dB done");
    }
    Ok(SweepRecords { snr_db, methods, records })
}

/// Reduce trial records to one [`EFLRPoint`] per (point, method), in trial
/// order.
pub fn aggregate(sweep: &SweepRecords) -> Vec<EFLRPoint> {
    let mut out = Vec::with_capacity(sweep.snr_db.len() * sweep.methods.len());
    for (point, &snr_db) in sweep.snr_db.iter().enumerate() {
        for &method in &sweep.methods {
            let mut total = 0;
            let mut wrong = 0;
            let mut nodes = 0u64;
            let mut seconds = 0.0;
            let mut trials = 0;
            for r in sweep.records.iter().filter(|r| r.point == point && r.method == method) {
                total += r.frames_total;
                wrong += r.frames_wrong;
                nodes += r.nodes;
                seconds += r.seconds;
                trials += 1;
            }
            let eflr = if total == 0 { 0.0 } else { wrong as f64 / total as f64 };
            out.push(EFLRPoint {
                method,
                snr_db,
                frames_total: total,
                frames_wrong: wrong,
                eflr,
                mean_nodes: if trials == 0 { 0.0 } else { nodes as f64 / trials as f64 },
                seconds,
            });
        }
    }
    out
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<EFLRPoint>> {
    run_trials(config).map(|s| aggregate(&s))
}

/// EFLR of `a` minus EFLR of `b` at `point`, with the standard error of the
/// paired difference over trials.
pub fn paired_difference(sweep: &SweepRecords, point: usize, a: Method, b: Method) -> (f64, f64) {
    let pick = |m: Method| -> Vec<&TrialRecord> {
        sweep.records.iter().filter(|r| r.point == point && r.method == m).collect()
    };
    let (ra, rb) = (pick(a), pick(b));
    assert_eq!(ra.len(), rb.len(), "methods were not run on the same trials");
    let n = ra.len() as f64;
    let total: u64 = ra.iter().map(|r| r.frames_total).sum();
    if total == 0 || ra.is_empty() {
        return (0.0, 0.0);
    }
    let d: Vec<f64> = ra.iter().zip(&rb).map(|(x, y)| x.frames_wrong as f64 - y.frames_wrong as f64).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = if ra.len() > 1 { d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (d.iter().sum::<f64>() / total as f64, (n * var).sqrt() / total as f64)
}

/// First SNR where the EFLR curve of `method` drops to `target`, linearly
/// interpolated in log EFLR between grid points.
pub fn snr_at_eflr(points: &[EFLRPoint], method: Method, target: f64) -> Option<f64> {
    let mut curve: Vec<(f64, f64)> =
        points.iter().filter(|p| p.method == method).map(|p| (p.snr_db, p.eflr)).collect();
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first = curve.first()?;
    if first.1 <= target {
        return Some(first.0);
    }
    for w in curve.windows(2) {
        let ((s0, e0), (s1, e1)) = (w[0], w[1]);
        if e1 <= target {
            if e1 <= 0.0 {
                // no log-scale information below the last nonzero point
                return Some(s0 + (s1 - s0) * (e0 - target) / (e0 - e1));
            }
            let t = (e0.ln() - target.ln()) / (e0.ln() - e1.ln());
            return Some(s0 + t * (s1 - s0));
        }
    }
    None
}

pub const CSV_HEADER: &str = "method,snr_db,frames_total,frames_wrong,eflr,mean_nodes,seconds";

pub fn write_results<W: std::io::Write>(table: &[EFLRPoint], writer: W) -> Result<()> {
    if table.is_empty() {
        return Err(Error::Domain("no results to write".into()));
    }
    let mut w = csv::Writer::from_writer(writer);
    for p in table {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_results(table: &[EFLRPoint], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_results(table, std::io::BufWriter::new(file))
}

pub fn read_results(path: &Path) -> Result<Vec<EFLRPoint>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<&str> = r.headers()?.iter().collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Domain(format!("unexpected CSV header `{}`", header.join(","))));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests;
