//! Gaussian arrival statistics with one symbol of channel memory, and the
//! Q-function primitives the modulation formulas are built from.
//!
//! Received counts are binomial in the number of released molecules; for
//! large `n` they are replaced by normals:
//!
//! * current symbol: `N(n p1, n p1 (1 - p1))`
//! * overflow of the previous symbol: `N(n p2, ·) - N(n p1, ·)`, i.e. mean
//!   `n (p2 - p1)` and variance `n [p2 (1 - p2) + p1 (1 - p1)]`
//! * counting noise: `N(0, σ²)`

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Per-link parameters. `n` is the number of molecules released per unit
/// amplitude of a symbol (per molecule type for type-based schemes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub n: f64,
    /// Hitting probability within one symbol duration.
    pub p1: f64,
    /// Hitting probability within two symbol durations.
    pub p2: f64,
    /// Standard deviation of the additive counting noise, molecules.
    pub noise_std: f64,
    /// Symbol duration, seconds.
    pub ts: f64,
    /// Transmitter-receiver distance, meters.
    pub distance: f64,
}

impl ChannelParams {
    /// Hexose link: `T_s` = 5.9 s, `d` = 16 µm, `p1` = 0.6097, `p2` = 0.7208.
    pub fn table_hexose(n: f64, noise_std: f64) -> Self {
        Self {
            n,
            p1: 0.6097,
            p2: 0.7208,
            noise_std,
            ts: 5.9,
            distance: 16e-6,
        }
    }

    pub fn with_n(self, n: f64) -> Self {
        Self { n, ..self }
    }

    pub fn with_noise(self, noise_std: f64) -> Self {
        Self { noise_std, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n >= 0.0 && self.n.is_finite()) {
            return Err(domain(format!("n must be non-negative, got {}", self.n)));
        }
        if !(0.0 <= self.p1 && self.p1 <= self.p2 && self.p2 <= 1.0) {
            return Err(domain(format!(
                "hitting probabilities must satisfy 0 <= p1 <= p2 <= 1, got p1 = {}, p2 = {}",
                self.p1, self.p2
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(domain(format!(
                "noise std must be non-negative, got {}",
                self.noise_std
            )));
        }
        if !(self.ts >= 0.0) {
            return Err(domain(format!("symbol duration must be non-negative, got {}", self.ts)));
        }
        Ok(())
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_std * self.noise_std
    }
}

/// Mean and variance of a normal count.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GaussianStat {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianStat {
    pub const ZERO: GaussianStat = GaussianStat {
        mean: 0.0,
        variance: 0.0,
    };

    pub fn new(mean: f64, variance: f64) -> Self {
        debug_assert!(variance >= 0.0);
        Self { mean, variance }
    }

    /// Sum of independent normals.
    pub fn plus(self, other: GaussianStat) -> Self {
        Self::new(self.mean + other.mean, self.variance + other.variance)
    }

    /// The same statistic for `level` times as many released molecules:
    /// binomial mean and variance both scale linearly.
    pub fn times_level(self, level: f64) -> Self {
        Self::new(self.mean * level, self.variance * level)
    }

    pub fn with_extra_variance(self, var: f64) -> Self {
        Self::new(self.mean, self.variance + var)
    }

    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }

    /// `P(X >= threshold)`.
    pub fn tail(&self, threshold: f64) -> f64 {
        tail_prob(self, 0.0, threshold)
    }

    /// `P(X < threshold)`.
    pub fn below(&self, threshold: f64) -> f64 {
        below_prob(self, threshold)
    }

    /// `P(lo <= X < hi)`; infinite bounds are allowed.
    pub fn band(&self, lo: f64, hi: f64) -> f64 {
        (self.below(hi) - self.below(lo)).max(0.0)
    }
}

/// Received count from the current symbol: `N(n p1, n p1 (1 - p1))`.
pub fn current_symbol_stat(ch: &ChannelParams) -> GaussianStat {
    GaussianStat::new(ch.n * ch.p1, ch.n * ch.p1 * (1.0 - ch.p1))
}

/// Overflow from the previous symbol received now: mean `n (p2 - p1)`,
/// variance `n [p2 (1 - p2) + p1 (1 - p1)]`.
pub fn previous_symbol_stat(ch: &ChannelParams) -> GaussianStat {
    GaussianStat::new(
        ch.n * (ch.p2 - ch.p1),
        ch.n * (ch.p2 * (1.0 - ch.p2) + ch.p1 * (1.0 - ch.p1)),
    )
}

/// Counting noise `N(0, σ²)`.
pub fn noise_stat(ch: &ChannelParams) -> GaussianStat {
    GaussianStat::new(0.0, ch.noise_var())
}

/// Standard normal upper tail, `Q(x) = erfc(x / √2) / 2`.
pub fn q_function(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(x / SQRT_2)
}

/// `P(value >= threshold)` for a normal statistic with extra independent
/// noise variance. A zero combined variance yields a step function.
pub fn tail_prob(stat: &GaussianStat, extra_noise_var: f64, threshold: f64) -> f64 {
    let var = stat.variance + extra_noise_var;
    if var <= 0.0 {
        return if stat.mean >= threshold { 1.0 } else { 0.0 };
    }
    if threshold == f64::INFINITY {
        return 0.0;
    }
    if threshold == f64::NEG_INFINITY {
        return 1.0;
    }
    q_function((threshold - stat.mean) / var.sqrt())
}

/// `P(value < threshold)`, the complement of [`tail_prob`] computed without
/// cancellation.
pub fn below_prob(stat: &GaussianStat, threshold: f64) -> f64 {
    if stat.variance <= 0.0 {
        return if stat.mean < threshold { 1.0 } else { 0.0 };
    }
    if threshold == f64::INFINITY {
        return 1.0;
    }
    if threshold == f64::NEG_INFINITY {
        return 0.0;
    }
    q_function((stat.mean - threshold) / stat.std())
}

/// Normal density of `stat` at `x`; zero-variance statistics have no density.
pub fn density(stat: &GaussianStat, x: f64) -> f64 {
    let var = stat.variance;
    if var <= 0.0 {
        return 0.0;
    }
    let z = (x - stat.mean) / var.sqrt();
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(n: f64) -> ChannelParams {
        ChannelParams::table_hexose(n, 100.0)
    }

    #[test]
    fn current_symbol_values() {
        assert_eq!(current_symbol_stat(&table(0.0)), GaussianStat::ZERO);
        let s = current_symbol_stat(&table(1000.0));
        assert!((s.mean - 609.7).abs() < 1e-9);
        assert!((s.variance - 238.0).abs() < 0.1);
        let certain = ChannelParams {
            p1: 1.0,
            p2: 1.0,
            ..table(50.0)
        };
        assert_eq!(current_symbol_stat(&certain).variance, 0.0);
    }

    #[test]
    fn previous_symbol_values() {
        let s = previous_symbol_stat(&table(1000.0));
        assert!((s.mean - 111.1).abs() < 1e-9);
        assert!((s.variance - 439.3).abs() < 0.5);
        let flat = ChannelParams {
            p2: 0.6097,
            ..table(1000.0)
        };
        assert_eq!(previous_symbol_stat(&flat).mean, 0.0);
        assert!(s.variance >= current_symbol_stat(&table(1000.0)).variance);
    }

    #[test]
    fn q_function_reference_values() {
        // Reference values from a 50-digit erfc evaluation.
        assert_eq!(q_function(0.0), 0.5);
        assert!((q_function(1.96) - 0.024_997_895_148_220_435).abs() < 1e-15);
        assert!((q_function(-1.9886) - 0.976_627_314_297_011_8).abs() < 1e-12);
        assert!((q_function(5.0) - 2.866_515_718_791_939e-7).abs() < 1e-18);
        assert_eq!(q_function(f64::INFINITY), 0.0);
        assert_eq!(q_function(f64::NEG_INFINITY), 1.0);
    }

    #[test]
    fn tail_prob_examples() {
        let s = GaussianStat::new(609.7, 238.0);
        assert_eq!(tail_prob(&s, 100.0, 609.7), 0.5);
        assert_eq!(tail_prob(&s, 100.0, f64::INFINITY), 0.0);
        let p = tail_prob(&s, 2500.0, 500.0);
        let z = (500.0 - 609.7) / (238.0f64 + 2500.0).sqrt();
        assert!((p - q_function(z)).abs() < 1e-15);
        assert!((p - 0.981_980_008_896_627_1).abs() < 1e-12);
    }

    #[test]
    fn degenerate_statistics_are_steps() {
        let s = GaussianStat::new(3.0, 0.0);
        assert_eq!(tail_prob(&s, 0.0, 3.0), 1.0);
        assert_eq!(tail_prob(&s, 0.0, 3.1), 0.0);
        assert_eq!(below_prob(&s, 3.0), 0.0);
        assert_eq!(below_prob(&s, 3.1), 1.0);
        assert_eq!(s.band(2.0, 4.0), 1.0);
    }

    #[test]
    fn channel_validation() {
        assert!(table(10.0).validate().is_ok());
        assert!(ChannelParams { p1: 0.8, ..table(10.0) }.validate().is_err());
        assert!(table(-1.0).validate().is_err());
        assert!(table(1.0).with_noise(-1.0).validate().is_err());
    }

    proptest! {
        #[test]
        fn q_symmetry(x in -40.0f64..40.0) {
            prop_assert!((q_function(x) + q_function(-x) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn tail_monotone_in_threshold(mean in -100.0f64..1000.0, var in 0.0f64..1e4,
                                      t in -500.0f64..2000.0, dt in 0.0f64..500.0) {
            let s = GaussianStat::new(mean, var);
            let a = tail_prob(&s, 25.0, t);
            let b = tail_prob(&s, 25.0, t + dt);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(b <= a);
            prop_assert!((s.tail(t) + s.below(t) - 1.0).abs() < 1e-12);
        }
    }
}
