use log::trace;
use serde::{Deserialize, Serialize};

use super::syndrome::apply;
use super::{header_at, sane_length, Correction, Segmenter, SyndromeTable};
use crate::frame_model::FrameProfile;
use crate::SyncEstimate;

/// What SYNC does with a syndrome that several error patterns explain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmbiguousPolicy {
    /// Treat the header as uncorrectable.
    #[default]
    Uncorrectable,
    /// Try each candidate and keep the first whose LEN points at a valid
    /// header (or the burst end).
    ValidateNext,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MuConfig {
    /// Verified headers required in PRESYNC before declaring SYNC.
    pub presync_confirmations: usize,
    /// Consecutive unexplainable headers tolerated in SYNC; below this count
    /// the raw LEN is trusted.
    pub sync_misses: usize,
    pub ambiguous: AmbiguousPolicy,
}

impl Default for MuConfig {
    fn default() -> Self {
        MuConfig { presync_confirmations: 1, sync_misses: 1, ambiguous: AmbiguousPolicy::Uncorrectable }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AutomatonState {
    Hunt,
    Presync,
    Sync,
}

struct Automaton<'a> {
    bits: &'a [u8],
    profile: &'a FrameProfile,
    table: &'a SyndromeTable,
    config: MuConfig,
    burst_len: usize,
}

impl Automaton<'_> {
    /// LEN of a header at `pos` whose HCS checks without correction.
    fn verified(&self, pos: usize) -> Option<usize> {
        let h = header_at(self.bits, self.profile, pos)?;
        if self.profile.header.syndrome(h) != 0 {
            return None;
        }
        sane_length(self.profile, h)
    }

    /// A frame of `len` at `pos` is followed by a verified header or ends the burst.
    fn confirmed_by_next(&self, pos: usize, len: usize) -> bool {
        let next = pos + len;
        next >= self.burst_len
            || next + self.profile.header_units() > self.burst_len
            || self.verified(next).is_some()
    }

    /// Verified `confirmations` headers chained from the frame at `pos`.
    fn presync(&self, pos: usize, len: usize) -> bool {
        let (mut p, mut l) = (pos, len);
        for _ in 0..self.config.presync_confirmations {
            let next = p + l;
            if next >= self.burst_len || next + self.profile.header_units() > self.burst_len {
                return true;
            }
            match self.verified(next) {
                Some(nl) => (p, l) = (next, nl),
                None => return false,
            }
        }
        true
    }

    /// LEN of the SYNC-state header at `pos` after HCS correction, if any.
    fn corrected(&self, pos: usize) -> Option<usize> {
        let h = header_at(self.bits, self.profile, pos)?;
        match self.table.lookup(self.profile.header.syndrome(h)) {
            Correction::Valid => sane_length(self.profile, h),
            Correction::Unique(p) => sane_length(self.profile, &apply(h, &p)),
            Correction::Ambiguous(cands) => match self.config.ambiguous {
                AmbiguousPolicy::Uncorrectable => None,
                AmbiguousPolicy::ValidateNext => cands
                    .iter()
                    .filter_map(|p| sane_length(self.profile, &apply(h, p)))
                    .find(|&len| self.confirmed_by_next(pos, len)),
            },
            Correction::Uncorrectable => None,
        }
    }

    fn run(&self) -> (SyncEstimate, Vec<(usize, AutomatonState)>) {
        let mut seg = Segmenter::default();
        let mut transitions = Vec::new();
        // the burst start is known: begin locked
        let mut state = AutomatonState::Sync;
        let mut misses = 0;
        let mut pos = 0;
        while pos < self.burst_len {
            match state {
                AutomatonState::Sync => {
                    if let Some(len) = self.corrected(pos) {
                        misses = 0;
                        pos = seg.accept(pos, len, self.burst_len);
                        continue;
                    }
                    misses += 1;
                    let raw = header_at(self.bits, self.profile, pos).and_then(|h| sane_length(self.profile, h));
                    match raw {
                        Some(len) if misses < self.config.sync_misses => {
                            pos = seg.accept(pos, len, self.burst_len);
                        }
                        _ => {
                            trace!("SYNC lost at {pos}");
                            state = AutomatonState::Hunt;
                            transitions.push((pos, state));
                            pos += 1;
                        }
                    }
                }
                AutomatonState::Hunt => {
                    if self.verified(pos).is_some() {
                        state = AutomatonState::Presync;
                        transitions.push((pos, state));
                    } else {
                        pos += 1;
                    }
                }
                AutomatonState::Presync => {
                    let len = self.verified(pos).expect("PRESYNC entered on a verified header");
                    if self.presync(pos, len) {
                        state = AutomatonState::Sync;
                        transitions.push((pos, state));
                        misses = 0;
                        pos = seg.accept(pos, len, self.burst_len);
                    } else {
                        state = AutomatonState::Hunt;
                        transitions.push((pos, state));
                        pos += 1;
                    }
                }
            }
        }
        (seg.finish(self.burst_len), transitions)
    }
}

/// Modified-Ueda synchronizer: HUNT for a header with zero syndrome,
/// confirm it in PRESYNC with the header its LEN points to, then follow LEN
/// fields in SYNC, correcting header errors through the HCS.
pub fn mu_fs(bits: &[u8], profile: &FrameProfile, burst_len: usize, table: &SyndromeTable, config: &MuConfig) -> SyncEstimate {
    mu_fs_traced(bits, profile, burst_len, table, config).0
}

/// [`mu_fs`] plus the `(unit, state entered)` transitions of the automaton.
pub fn mu_fs_traced(
    bits: &[u8],
    profile: &FrameProfile,
    burst_len: usize,
    table: &SyndromeTable,
    config: &MuConfig,
) -> (SyncEstimate, Vec<(usize, AutomatonState)>) {
    assert_eq!(bits.len(), burst_len * profile.granularity(), "bit count does not match the burst");
    Automaton { bits, profile, table, config: *config, burst_len }.run()
}
