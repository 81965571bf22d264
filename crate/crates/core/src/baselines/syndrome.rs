use std::collections::HashMap;

use crate::frame_model::HeaderSpec;

/// Map from HCS syndrome to the header error patterns of weight one and two
/// that produce it.
#[derive(Debug, Clone)]
pub struct SyndromeTable {
    header_bits: usize,
    patterns: HashMap<u32, Vec<Vec<usize>>>,
}

/// Outcome of a syndrome lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Correction {
    Valid,
    /// Exactly one error pattern explains the syndrome.
    Unique(Vec<usize>),
    /// Several two-bit patterns explain the syndrome.
    Ambiguous(Vec<Vec<usize>>),
    Uncorrectable,
}

impl SyndromeTable {
    pub fn new(spec: &HeaderSpec) -> Self {
        let hb = spec.header_bits();
        // the syndrome is linear with zero initial register
        let single: Vec<u32> = (0..hb)
            .map(|i| {
                let mut e = vec![0u8; hb];
                e[i] = 1;
                spec.syndrome(&e)
            })
            .collect();
        let mut patterns: HashMap<u32, Vec<Vec<usize>>> = HashMap::new();
        for (i, &s) in single.iter().enumerate() {
            patterns.entry(s).or_default().push(vec![i]);
        }
        for i in 0..hb {
            for j in i + 1..hb {
                patterns.entry(single[i] ^ single[j]).or_default().push(vec![i, j]);
            }
        }
        patterns.remove(&0);
        SyndromeTable { header_bits: hb, patterns }
    }

    pub fn header_bits(&self) -> usize {
        self.header_bits
    }

    /// Patterns of weight one and two with this syndrome, single-bit first.
    pub fn candidates(&self, syndrome: u32) -> &[Vec<usize>] {
        self.patterns.get(&syndrome).map_or(&[], Vec::as_slice)
    }

    /// Single-bit errors are always preferred: when one explains the
    /// syndrome, two-bit patterns are not considered.
    pub fn lookup(&self, syndrome: u32) -> Correction {
        if syndrome == 0 {
            return Correction::Valid;
        }
        let cands = self.candidates(syndrome);
        let singles: Vec<&Vec<usize>> = cands.iter().filter(|p| p.len() == 1).collect();
        match (singles.len(), cands.len()) {
            (1, _) => Correction::Unique(singles[0].clone()),
            (0, 1) => Correction::Unique(cands[0].clone()),
            (0, 0) => Correction::Uncorrectable,
            (0, _) => Correction::Ambiguous(cands.to_vec()),
            _ => Correction::Ambiguous(singles.into_iter().cloned().collect()),
        }
    }
}

/// `header` with the bits at `positions` flipped.
pub(crate) fn apply(header: &[u8], positions: &[usize]) -> Vec<u8> {
    let mut h = header.to_vec();
    for &p in positions {
        h[p] ^= 1;
    }
    h
}
