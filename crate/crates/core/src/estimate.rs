/// Frame segmentation produced by a synchronizer.
///
/// `boundaries[n]` is the estimated end (exclusive, in alignment units) of
/// frame `n + 1`; the implicit start of the burst is 0. Boundaries are
/// reported as estimated, so under heavy noise the MAP estimators may
/// produce a non-increasing pair and a non-positive length.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SyncEstimate {
    pub boundaries: Vec<usize>,
    pub is_padding_last: bool,
}

impl SyncEstimate {
    pub fn new(boundaries: Vec<usize>, is_padding_last: bool) -> Self {
        SyncEstimate { boundaries, is_padding_last }
    }

    /// Estimated frame count `N̂`.
    pub fn frame_count(&self) -> usize {
        self.boundaries.len()
    }

    /// `λ̂_n = ℓ̂_n − ℓ̂_{n−1}`, signed.
    pub fn lengths(&self) -> Vec<i64> {
        let mut prev = 0i64;
        self.boundaries
            .iter()
            .map(|&b| {
                let len = b as i64 - prev;
                prev = b as i64;
                len
            })
            .collect()
    }

    /// Consecutive `(start, end)` pairs, starting from 0.
    pub fn frames(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        std::iter::once(0)
            .chain(self.boundaries.iter().copied())
            .zip(self.boundaries.iter().copied())
    }
}
