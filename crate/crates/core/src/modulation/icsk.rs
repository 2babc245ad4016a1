//! Concentration shift keying: symbol `X` releases `X·n` molecules of a
//! single type and the receiver slices the count with `M - 1` thresholds.

use serde::{Deserialize, Serialize};

use super::{JointProbabilityMatrix, Scheme};
use crate::arrivals::{current_symbol_stat, noise_stat, previous_symbol_stat, ChannelParams, GaussianStat};

/// How the previous symbol's amplitude enters the overflow term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverflowModel {
    /// Overflow of previous symbol `Z` has `Z` times the unit-amplitude
    /// mean and variance.
    #[default]
    Scaled,
    /// Every non-zero previous symbol contributes one unit-amplitude
    /// overflow. This reproduces the closed-form four-level expressions
    /// term for term.
    UnitLevel,
}

impl OverflowModel {
    fn level(self, z: usize) -> f64 {
        match self {
            OverflowModel::Scaled => z as f64,
            OverflowModel::UnitLevel => (z.min(1)) as f64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IcskModel {
    order: usize,
    /// Received statistic for (sent `x`, previous `z`) at `x * order + z`,
    /// noise included.
    stats: Vec<GaussianStat>,
}

impl IcskModel {
    pub fn new(order: usize, ch: &ChannelParams, overflow: OverflowModel) -> Self {
        let current = current_symbol_stat(ch);
        let previous = previous_symbol_stat(ch);
        let noise = noise_stat(ch);
        let mut stats = Vec::with_capacity(order * order);
        for x in 0..order {
            for z in 0..order {
                stats.push(
                    noise
                        .plus(current.times_level(x as f64))
                        .plus(previous.times_level(overflow.level(z))),
                );
            }
        }
        Self { order, stats }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn stat(&self, x: usize, z: usize) -> GaussianStat {
        self.stats[x * self.order + z]
    }

    pub fn matrix(&self, tau: &[f64]) -> JointProbabilityMatrix {
        let m = self.order;
        debug_assert_eq!(tau.len(), m - 1);
        let weight = 1.0 / (m * m) as f64;
        let mut entries = vec![0.0; m * m];
        let mut cdf = vec![0.0; m + 1];
        for x in 0..m {
            for z in 0..m {
                let s = self.stat(x, z);
                cdf[0] = 0.0;
                for (i, t) in tau.iter().enumerate() {
                    cdf[i + 1] = s.below(*t);
                }
                cdf[m] = 1.0;
                for y in 0..m {
                    entries[x * m + y] += weight * (cdf[y + 1] - cdf[y]).max(0.0);
                }
            }
        }
        JointProbabilityMatrix::from_entries(Scheme::Icsk { order: m }, m, entries)
    }
}
