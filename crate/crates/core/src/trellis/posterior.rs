use std::io::Write;

use super::region::{Region, StageShape};
use crate::channel::ln_add;
use crate::{Error, Result};

/// Work counters of a decode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ComplexityCounters {
    pub nodes_visited: u64,
    pub transitions_evaluated: u64,
}

impl std::ops::AddAssign for ComplexityCounters {
    fn add_assign(&mut self, rhs: Self) {
        self.nodes_visited += rhs.nodes_visited;
        self.transitions_evaluated += rhs.transitions_evaluated;
    }
}

/// Forward/backward metrics of one stage.
///
/// Non-terminal metrics are stored scaled, `α_n(ℓ) = alpha[ℓ − lo]·e^{ln_alpha_scale}`
/// with the stored values summing to one; likewise for `β`. The terminal
/// state is kept as an absolute logarithm because the padding likelihood of
/// the last frame can exceed the range of the stage scale.
#[derive(Debug, Clone)]
pub(crate) struct Stage {
    pub shape: StageShape,
    pub alpha: Vec<f64>,
    pub ln_alpha_scale: f64,
    pub beta: Vec<f64>,
    pub ln_beta_scale: f64,
    pub ln_alpha_terminal: f64,
    pub ln_beta_terminal: f64,
}

/// Result of a forward-backward pass over a frame-boundary trellis.
#[derive(Debug, Clone)]
pub struct TrellisPosterior {
    pub(crate) region: Region,
    pub(crate) stages: Vec<Stage>,
    pub(crate) ln_evidence: f64,
    pub(crate) edge_padding_share: Vec<f64>,
    pub counters: ComplexityCounters,
}

impl TrellisPosterior {
    /// Trellis length in units (the burst length, or a window length).
    pub fn len(&self) -> usize {
        self.region.len
    }

    pub fn is_empty(&self) -> bool {
        self.region.len == 0
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// `ln P(y)` up to the per-bit normalization of the likelihood table.
    pub fn ln_evidence(&self) -> f64 {
        self.ln_evidence
    }

    /// Stages from which the end of the trellis is reachable.
    pub fn terminal_stages(&self) -> Vec<usize> {
        self.region.terminal_stages().collect()
    }

    /// Stored (scaled) forward metric, zero outside the region. The terminal
    /// state has no scaled value and reports zero.
    pub fn alpha(&self, n: usize, state: usize) -> f64 {
        self.stages
            .get(n)
            .filter(|s| s.shape.contains(state))
            .map_or(0.0, |s| s.alpha[state - s.shape.lo])
    }

    /// `ln α_n(ℓ)` on the common (unscaled) axis.
    pub fn ln_alpha(&self, n: usize, state: usize) -> f64 {
        let Some(s) = self.stages.get(n) else { return f64::NEG_INFINITY };
        if state == self.region.len {
            if s.shape.terminal {
                s.ln_alpha_terminal
            } else {
                f64::NEG_INFINITY
            }
        } else if s.shape.contains(state) {
            s.alpha[state - s.shape.lo].ln() + s.ln_alpha_scale
        } else {
            f64::NEG_INFINITY
        }
    }

    /// `ln β_n(ℓ)` on the common axis.
    pub fn ln_beta(&self, n: usize, state: usize) -> f64 {
        let Some(s) = self.stages.get(n) else { return f64::NEG_INFINITY };
        if state == self.region.len {
            if s.shape.terminal {
                s.ln_beta_terminal
            } else {
                f64::NEG_INFINITY
            }
        } else if s.shape.contains(state) {
            s.beta[state - s.shape.lo].ln() + s.ln_beta_scale
        } else {
            f64::NEG_INFINITY
        }
    }

    /// `P(S_n = ℓ | y)`.
    pub fn posterior(&self, n: usize, state: usize) -> f64 {
        (self.ln_alpha(n, state) + self.ln_beta(n, state) - self.ln_evidence).exp()
    }

    /// `(ℓ, P(S_n = ℓ | y))` for every state of stage `n`, terminal last.
    pub fn stage_posteriors(&self, n: usize) -> Vec<(usize, f64)> {
        let Some(s) = self.stages.get(n) else { return Vec::new() };
        let mut out: Vec<(usize, f64)> = if s.shape.width() > 0 {
            (s.shape.lo..=s.shape.hi).map(|l| (l, self.posterior(n, l))).collect()
        } else {
            Vec::new()
        };
        if s.shape.terminal {
            out.push((self.region.len, self.posterior(n, self.region.len)));
        }
        out
    }

    /// Share of the closing transition from `prev` explained by a padding frame.
    pub fn padding_share(&self, prev: usize) -> f64 {
        self.edge_padding_share.get(prev).copied().unwrap_or(0.0)
    }

    /// Write `n ℓ P(S_n=ℓ|y)` lines for every node.
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for n in 0..self.stages.len() {
            for (l, p) in self.stage_posteriors(n) {
                writeln!(out, "{n} {l} {p:.12e}")?;
            }
        }
        Ok(())
    }
}

/// Scaled forward-backward pass over `region`.
///
/// `data(from)` returns the linear data-transition metrics out of `from`
/// indexed by `frame length − min_len`; `edge(from)` the log metric of the
/// jump to the terminal state. `seed` gives `α_0` over states `0..seed.len()`.
pub(crate) fn forward_backward<'a>(
    region: Region,
    seed: &[f64],
    data: impl Fn(usize) -> &'a [f64],
    edge: impl Fn(usize) -> f64,
    edge_padding_share: Vec<f64>,
) -> Result<TrellisPosterior> {
    let len = region.len;
    let (min_len, max_len) = (region.min_len, region.max_len);
    let counters = region.counters();
    let mut stages: Vec<Stage> = Vec::with_capacity(region.stages.len());

    // forward
    let first = region.stages[0];
    let mut alpha0: Vec<f64> = (first.lo..=first.hi).map(|l| seed.get(l).copied().unwrap_or(0.0)).collect();
    let total: f64 = alpha0.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::Domain("forward seed has no mass inside the trellis".into()));
    }
    alpha0.iter_mut().for_each(|a| *a /= total);
    stages.push(Stage {
        shape: first,
        alpha: alpha0,
        ln_alpha_scale: total.ln(),
        beta: Vec::new(),
        ln_beta_scale: f64::NEG_INFINITY,
        ln_alpha_terminal: f64::NEG_INFINITY,
        ln_beta_terminal: f64::NEG_INFINITY,
    });
    let mut vanished_at = None;
    for n in 1..region.stages.len() {
        let shape = region.stages[n];
        let prev = &stages[n - 1];
        let mut acc = vec![0.0; shape.width()];
        let mut ln_term = f64::NEG_INFINITY;
        if prev.shape.width() > 0 {
            for from in prev.shape.lo..=prev.shape.hi {
                let a = prev.alpha[from - prev.shape.lo];
                if a == 0.0 {
                    continue;
                }
                let row = data(from);
                for (i, &g) in row.iter().enumerate() {
                    let to = from + min_len + i;
                    if to >= len {
                        break;
                    }
                    acc[to - shape.lo] += a * g;
                }
                if len - from <= max_len {
                    ln_term = ln_add(ln_term, a.ln() + edge(from));
                }
            }
        }
        let total: f64 = acc.iter().sum();
        let ln_alpha_scale = if total > 0.0 {
            acc.iter_mut().for_each(|a| *a /= total);
            prev.ln_alpha_scale + total.ln()
        } else {
            if shape.width() > 0 && vanished_at.is_none() {
                vanished_at = Some(n);
            }
            f64::NEG_INFINITY
        };
        let ln_alpha_terminal = ln_term + prev.ln_alpha_scale;
        stages.push(Stage {
            shape,
            alpha: acc,
            ln_alpha_scale,
            beta: Vec::new(),
            ln_beta_scale: f64::NEG_INFINITY,
            ln_alpha_terminal: if shape.terminal { ln_alpha_terminal } else { f64::NEG_INFINITY },
            ln_beta_terminal: f64::NEG_INFINITY,
        });
    }

    // backward: allowed final stages equally likely
    let terminal_count = region.terminal_stages().count();
    if terminal_count == 0 {
        return Err(Error::Domain("the end of the trellis is unreachable".into()));
    }
    let ln_final = -(terminal_count as f64).ln();
    let last = stages.len() - 1;
    for n in (0..=last).rev() {
        let shape = stages[n].shape;
        if shape.terminal {
            stages[n].ln_beta_terminal = ln_final;
        }
        let mut ln_beta = vec![f64::NEG_INFINITY; shape.width()];
        if n < last && shape.width() > 0 {
            let next = &stages[n + 1];
            for (slot, from) in ln_beta.iter_mut().zip(shape.lo..=shape.hi) {
                let row = data(from);
                let mut lin = 0.0;
                for (i, &g) in row.iter().enumerate() {
                    let to = from + min_len + i;
                    if to >= len {
                        break;
                    }
                    lin += g * next.beta[to - next.shape.lo];
                }
                let mut v = lin.ln() + next.ln_beta_scale;
                if next.shape.terminal && len - from <= max_len {
                    v = ln_add(v, edge(from) + next.ln_beta_terminal);
                }
                *slot = v;
            }
        }
        let top = ln_beta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let stage = &mut stages[n];
        if top == f64::NEG_INFINITY {
            stage.beta = vec![0.0; shape.width()];
            stage.ln_beta_scale = f64::NEG_INFINITY;
        } else {
            stage.beta = ln_beta.iter().map(|v| (v - top).exp()).collect();
            stage.ln_beta_scale = top;
        }
    }

    let ln_evidence = stages
        .iter()
        .filter(|s| s.shape.terminal)
        .fold(f64::NEG_INFINITY, |acc, s| ln_add(acc, s.ln_alpha_terminal + s.ln_beta_terminal));
    if ln_evidence == f64::NEG_INFINITY || ln_evidence.is_nan() {
        return Err(Error::DecodeFailure { stage: vanished_at.unwrap_or(stages.len() - 1) });
    }
    Ok(TrellisPosterior { region, stages, ln_evidence, edge_padding_share, counters })
}
