//! Molecule-type shift keying: symbol `X` releases `n` molecules of isomer
//! `X`, and the receiver has one counting receptor per isomer.
//!
//! Decision rule: every receptor whose count reaches the threshold `τ` is a
//! detection. A single detection decodes that isomer. Several detections
//! are resolved in favour of the largest count. With no detection the
//! receiver guesses uniformly. The exclusive single-detection events are
//! exactly the product terms of the closed-form binary expressions (see
//! [`exclusive_b_imosk_terms`]); the other two cases complete the rule so
//! that every row is a distribution.

use super::{JointProbabilityMatrix, Scheme};
use crate::arrivals::{current_symbol_stat, density, noise_stat, previous_symbol_stat, ChannelParams, GaussianStat};
use crate::quadrature::integrate;

const QUAD_TOL: f64 = 1e-14;
const SPAN_SIGMAS: f64 = 12.0;

#[derive(Debug, Clone)]
pub struct ImoskModel {
    order: usize,
    /// Receptor of the sent isomer when the previous symbol was the same isomer.
    repeated: GaussianStat,
    /// Receptor of the sent isomer when the previous symbol differed.
    fresh: GaussianStat,
    /// Receptor of the previous isomer (overflow only).
    overflow: GaussianStat,
    noise: GaussianStat,
}

impl ImoskModel {
    pub fn new(order: usize, ch: &ChannelParams) -> Self {
        let noise = noise_stat(ch);
        let current = current_symbol_stat(ch);
        let previous = previous_symbol_stat(ch);
        Self {
            order,
            repeated: noise.plus(current).plus(previous),
            fresh: noise.plus(current),
            overflow: noise.plus(previous),
            noise,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// The diagonal and off-diagonal entry values; by symmetry every
    /// diagonal entry is equal and so is every off-diagonal entry.
    pub fn entry_values(&self, tau: f64) -> (f64, f64) {
        let m = self.order as f64;
        let others = self.order - 1;
        // previous == sent: receptor X holds current + overflow, the rest noise
        let same = decode_probabilities(&[(self.repeated, 1), (self.noise, others)], tau);
        // previous == Z != sent
        let diff = decode_probabilities(
            &[(self.fresh, 1), (self.overflow, 1), (self.noise, self.order - 2)],
            tau,
        );
        let diag = (same[0] / m + diff[0] * (m - 1.0) / m) / m;
        let off = (same[1] / m + diff[1] / m + diff[2] * (m - 2.0) / m) / m;
        (diag, off)
    }

    pub fn matrix(&self, tau: f64) -> JointProbabilityMatrix {
        let (diag, off) = self.entry_values(tau);
        let m = self.order;
        let entries = (0..m * m)
            .map(|i| if i / m == i % m { diag } else { off })
            .collect();
        JointProbabilityMatrix::from_entries(Scheme::ImoskAwgn { order: m }, m, entries)
    }
}

/// Probability that one particular receptor of each class is decoded.
///
/// `classes` lists `(statistic, count)` for groups of identically
/// distributed, independent receptors. The result has one entry per class:
/// the decode probability of a single member of that class.
pub fn decode_probabilities(classes: &[(GaussianStat, usize)], tau: f64) -> Vec<f64> {
    let total: usize = classes.iter().map(|c| c.1).sum();
    let none: f64 = classes
        .iter()
        .map(|(s, k)| s.below(tau).powi(*k as i32))
        .product();
    let guess = none / total.max(1) as f64;

    let mut breaks = Vec::new();
    for (s, k) in classes {
        if *k == 0 {
            continue;
        }
        let sd = s.std();
        for j in [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
            breaks.push(s.mean + j * sd);
        }
    }

    classes
        .iter()
        .enumerate()
        .map(|(c, (stat, count))| {
            if *count == 0 {
                return 0.0;
            }
            let detected = if stat.variance <= 0.0 {
                point_mass_wins(classes, c, tau)
            } else {
                let others = |s: f64| -> f64 {
                    classes
                        .iter()
                        .enumerate()
                        .map(|(j, (o, k))| {
                            let k = if j == c { k - 1 } else { *k };
                            if k == 0 {
                                1.0
                            } else {
                                o.below(s).powi(k as i32)
                            }
                        })
                        .product()
                };
                let sd = stat.std();
                let lo = tau.max(stat.mean - SPAN_SIGMAS * sd);
                let hi = stat.mean + SPAN_SIGMAS * sd;
                integrate(|s| density(stat, s) * others(s), lo, hi, &breaks, QUAD_TOL)
            };
            detected + guess
        })
        .collect()
}

/// Detection-and-win probability of a deterministic receptor of class `c`.
fn point_mass_wins(classes: &[(GaussianStat, usize)], c: usize, tau: f64) -> f64 {
    let m = classes[c].0.mean;
    if m < tau {
        return 0.0;
    }
    let mut p = 1.0;
    let mut tied = 0usize;
    for (j, (o, k)) in classes.iter().enumerate() {
        let k = if j == c { k - 1 } else { *k };
        if k == 0 {
            continue;
        }
        if o.variance <= 0.0 {
            if o.mean > m {
                return 0.0;
            }
            if o.mean == m {
                tied += k;
            }
        } else {
            p *= o.below(m).powi(k as i32);
        }
    }
    p / (1 + tied) as f64
}

/// The closed-form binary product expressions: probabilities of the events
/// "only the receptor of `Y` detects", for `X` sent, averaged over the
/// previous symbol. Rows do not sum to 1/2; the remainder is the mass of
/// multiple or missing detections.
pub fn exclusive_b_imosk_terms(ch: &ChannelParams, tau: f64) -> [[f64; 2]; 2] {
    let model = ImoskModel::new(2, ch);
    let above = |s: &GaussianStat| s.tail(tau);
    let below = |s: &GaussianStat| s.below(tau);
    let (pcn, cn, pn, n) = (&model.repeated, &model.fresh, &model.overflow, &model.noise);
    let diag = 0.25 * (above(pcn) * below(n) + above(cn) * below(pn));
    let cross = 0.25 * (above(n) * below(pcn) + above(pn) * below(cn));
    [[diag, cross], [cross, diag]]
}
