//! Quadrature ratio shift keying with two molecule types.
//!
//! Symbol `s_k` (`k = 0..4`) releases `k·n` molecules of the first type and
//! `(3 - k)·n` of the second. Each receptor slices its count into four
//! bands with the shared thresholds; band pair `(b1, b2)` with
//! `b1 + b2 = 3` decodes `s_{b1}` exactly as in the band-product formula.
//! Inconsistent band pairs decode to the nearest symbol of the averaged
//! level estimate `(b1 + 3 - b2) / 2`, splitting half-way cases evenly.

use super::{JointProbabilityMatrix, Scheme};
use crate::arrivals::{current_symbol_stat, noise_stat, previous_symbol_stat, ChannelParams, GaussianStat};

const LEVELS: usize = 4;

/// Release amplitude (in units of `n`) of molecule type `molecule` (0 or 1)
/// for symbol index `symbol`.
pub fn irsk_level(symbol: usize, molecule: usize) -> f64 {
    match molecule {
        0 => symbol as f64,
        _ => (LEVELS - 1 - symbol) as f64,
    }
}

/// Decision weights of band pair `(b1, b2)`: `(symbol, weight)` pairs.
fn cell_decision(b1: usize, b2: usize) -> [(usize, f64); 2] {
    let twice = b1 + LEVELS - 1 - b2;
    if twice.is_multiple_of(2) {
        [(twice / 2, 1.0), (twice / 2, 0.0)]
    } else {
        [(twice / 2, 0.5), (twice / 2 + 1, 0.5)]
    }
}

#[derive(Debug, Clone)]
pub struct IrskModel {
    /// Received statistic of each type for (sent, previous) at `x * 4 + z`.
    first: Vec<GaussianStat>,
    second: Vec<GaussianStat>,
}

impl IrskModel {
    pub fn new(first: &ChannelParams, second: &ChannelParams) -> Self {
        let build = |ch: &ChannelParams, molecule: usize| {
            let current = current_symbol_stat(ch);
            let previous = previous_symbol_stat(ch);
            let noise = noise_stat(ch);
            let mut stats = Vec::with_capacity(LEVELS * LEVELS);
            for x in 0..LEVELS {
                for z in 0..LEVELS {
                    stats.push(
                        noise
                            .plus(current.times_level(irsk_level(x, molecule)))
                            .plus(previous.times_level(irsk_level(z, molecule))),
                    );
                }
            }
            stats
        };
        Self {
            first: build(first, 0),
            second: build(second, 1),
        }
    }

    pub fn stat(&self, molecule: usize, x: usize, z: usize) -> GaussianStat {
        match molecule {
            0 => self.first[x * LEVELS + z],
            _ => self.second[x * LEVELS + z],
        }
    }

    pub fn matrix(&self, tau: &[f64]) -> JointProbabilityMatrix {
        debug_assert_eq!(tau.len(), LEVELS - 1);
        let bands = |s: GaussianStat| {
            let mut cdf = [0.0, 0.0, 0.0, 0.0, 1.0];
            for (i, t) in tau.iter().enumerate() {
                cdf[i + 1] = s.below(*t);
            }
            let mut out = [0.0; LEVELS];
            for b in 0..LEVELS {
                out[b] = (cdf[b + 1] - cdf[b]).max(0.0);
            }
            out
        };
        let weight = 1.0 / (LEVELS * LEVELS) as f64;
        let mut entries = vec![0.0; LEVELS * LEVELS];
        for x in 0..LEVELS {
            for z in 0..LEVELS {
                let b1 = bands(self.first[x * LEVELS + z]);
                let b2 = bands(self.second[x * LEVELS + z]);
                for (i, p1) in b1.iter().enumerate() {
                    for (j, p2) in b2.iter().enumerate() {
                        for (y, w) in cell_decision(i, j) {
                            entries[x * LEVELS + y] += weight * w * p1 * p2;
                        }
                    }
                }
            }
        }
        JointProbabilityMatrix::from_entries(Scheme::QIrsk, LEVELS, entries)
    }
}

/// Warns when the two ratio molecules are the α and β anomers of the same
/// sugar, which interconvert during propagation.
pub fn irsk_pair_warning(first: &str, second: &str) -> Option<String> {
    fn split(name: &str) -> Option<(&'static str, String)> {
        let lower = name.trim().to_ascii_lowercase();
        for (form, prefixes) in [("alpha", ["alpha-", "a-", "α-"]), ("beta", ["beta-", "b-", "β-"])] {
            for p in prefixes {
                if let Some(rest) = lower.strip_prefix(p) {
                    return Some((form, rest.to_string()));
                }
            }
        }
        None
    }
    match (split(first), split(second)) {
        (Some((f1, base1)), Some((f2, base2))) if f1 != f2 && base1 == base2 => Some(format!(
            "`{first}` and `{second}` are anomers of the same sugar and interconvert by mutarotation; \
             prefer a non-anomeric pair for ratio keying"
        )),
        _ => None,
    }
}
