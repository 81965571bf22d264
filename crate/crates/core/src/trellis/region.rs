use super::ComplexityCounters;

/// Shape of one trellis stage: non-terminal states `lo..=hi` (empty when
/// `lo > hi`) and whether the terminal state `len` is reachable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageShape {
    pub lo: usize,
    pub hi: usize,
    pub terminal: bool,
}

impl StageShape {
    pub fn width(&self) -> usize {
        if self.lo > self.hi {
            0
        } else {
            self.hi - self.lo + 1
        }
    }

    pub fn contains(&self, state: usize) -> bool {
        state >= self.lo && state <= self.hi
    }

    pub fn nodes(&self) -> usize {
        self.width() + usize::from(self.terminal)
    }
}

/// Reachable region of a frame-boundary trellis over `len` units. Stage 0
/// holds the initial states `seed_lo..=seed_hi`; each transition advances by
/// `min_len..=max_len` units, and any state within `max_len` of the end may
/// jump to the terminal state `len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub len: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub stages: Vec<StageShape>,
}

impl Region {
    pub fn new(len: usize, min_len: usize, max_len: usize, seed_lo: usize, seed_hi: usize) -> Self {
        assert!(len > 0 && min_len > 0 && min_len <= max_len);
        let seed_hi = seed_hi.min(len - 1);
        let mut stages = vec![StageShape { lo: seed_lo, hi: seed_hi, terminal: false }];
        loop {
            let prev = *stages.last().expect("stage 0 exists");
            if prev.width() == 0 {
                break;
            }
            let lo = prev.lo + min_len;
            let hi = (prev.hi + max_len).min(len - 1);
            let terminal = prev.hi + max_len >= len;
            let next = StageShape { lo, hi, terminal };
            if next.nodes() == 0 {
                break;
            }
            stages.push(next);
        }
        Region { len, min_len, max_len, stages }
    }

    /// Full-burst trellis starting from the single state 0.
    pub fn full(len: usize, min_len: usize, max_len: usize) -> Self {
        Self::new(len, min_len, max_len, 0, 0)
    }

    /// Stages in which the terminal state is reachable.
    pub fn terminal_stages(&self) -> impl Iterator<Item = usize> + '_ {
        self.stages.iter().enumerate().filter(|(_, s)| s.terminal).map(|(n, _)| n)
    }

    /// Number of successors of state `from`, the terminal included.
    pub fn out_degree(&self, from: usize) -> usize {
        let data = (self.min_len..=self.max_len).filter(|l| from + l < self.len).count();
        let term = usize::from(self.len - from <= self.max_len);
        data + term
    }

    /// Node and transition counts of a full forward pass over the region.
    pub fn counters(&self) -> ComplexityCounters {
        let mut c = ComplexityCounters::default();
        for (n, stage) in self.stages.iter().enumerate() {
            c.nodes_visited += stage.nodes() as u64;
            if n + 1 < self.stages.len() {
                let width = stage.width();
                if width > 0 {
                    c.transitions_evaluated += (stage.lo..=stage.hi).map(|l| self.out_degree(l) as u64).sum::<u64>();
                }
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_trellis_shape() {
        // 16-bit burst, frames of 4..=7 bits
        let r = Region::full(16, 4, 7);
        let shapes: Vec<_> = r.stages.iter().map(|s| (s.lo, s.hi, s.terminal)).collect();
        assert_eq!(
            shapes,
            vec![(0, 0, false), (4, 7, false), (8, 14, false), (12, 15, true), (16, 15, true)]
        );
        assert_eq!(r.terminal_stages().collect::<Vec<_>>(), vec![3, 4]);
    }

    #[test]
    fn terminal_stages_span_min_to_max_frame_count() {
        let r = Region::full(1800, 50, 200);
        let t: Vec<_> = r.terminal_stages().collect();
        assert_eq!(t.first(), Some(&9));
        assert_eq!(t.last(), Some(&36));
        assert_eq!(t.len(), 28);
        // non-divisible length still ends with a terminal-only stage
        let r = Region::full(1810, 50, 200);
        let t: Vec<_> = r.terminal_stages().collect();
        assert_eq!((t[0], *t.last().unwrap()), (10, 37));
    }

    #[test]
    fn seeded_region_widens_early_stages() {
        let r = Region::new(786, 50, 200, 0, 199);
        assert_eq!((r.stages[0].lo, r.stages[0].hi), (0, 199));
        assert_eq!((r.stages[1].lo, r.stages[1].hi), (50, 399));
        assert_eq!((r.stages[3].lo, r.stages[3].hi), (150, 785));
    }
}
