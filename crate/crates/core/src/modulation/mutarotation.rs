//! Mutarotation between the α and β anomers during propagation, and the
//! corrected binary type-shift-keying matrix built on it.
//!
//! The normalised optical rotation relaxes linearly,
//! `(R_t - R_eq) / (R_0 - R_eq) = 1 - k t` with `k = 0.99 / 3600` s⁻¹,
//! and the anomer counts follow from the lever rule
//! `n_α = (R_t - R_β) n / (R_α - R_β)`.

use serde::{Deserialize, Serialize};

use super::imosk::ImoskModel;
use super::{JointProbabilityMatrix, Scheme};
use crate::arrivals::ChannelParams;
use crate::error::{domain, Result};
use crate::physics::MessengerSpec;

/// Relaxation rate of the normalised optical rotation, 1/s.
pub const MUTAROTATION_RATE: f64 = 0.99 / 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnomericForm {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutarotationState {
    pub n_alpha: f64,
    pub n_beta: f64,
    pub elapsed: f64,
}

impl MutarotationState {
    /// Molecules found in the form that was not sent.
    pub fn converted(&self, sent: AnomericForm) -> f64 {
        match sent {
            AnomericForm::Alpha => self.n_beta,
            AnomericForm::Beta => self.n_alpha,
        }
    }
}

/// Anomer counts `t` seconds after releasing `n` molecules of form `sent`.
/// The linear law is clamped at equilibrium.
pub fn mutarotation_fractions(
    messenger: &MessengerSpec,
    sent: AnomericForm,
    t: f64,
    n: f64,
) -> Result<MutarotationState> {
    let rot = messenger.optical_rotation()?;
    rot.validate()?;
    if !(t >= 0.0) {
        return Err(domain(format!("elapsed time must be non-negative, got {t}")));
    }
    if !(n >= 0.0) {
        return Err(domain(format!("molecule count must be non-negative, got {n}")));
    }
    let progress = (MUTAROTATION_RATE * t).min(1.0);
    let span = rot.alpha - rot.beta;
    let (n_alpha, n_beta) = match sent {
        AnomericForm::Alpha => {
            let r_t = rot.equilibrium + (rot.alpha - rot.equilibrium) * (1.0 - progress);
            let n_alpha = (r_t - rot.beta) * n / span;
            (n_alpha, n - n_alpha)
        }
        AnomericForm::Beta => {
            let r_t = rot.equilibrium - (rot.equilibrium - rot.beta) * (1.0 - progress);
            let n_beta = (r_t - rot.alpha) * n / (rot.beta - rot.alpha);
            (n - n_beta, n_beta)
        }
    };
    Ok(MutarotationState {
        n_alpha,
        n_beta,
        elapsed: t,
    })
}

/// Binary α/β type shift keying with the mutarotation correction: when the
/// converted count reaches the threshold, the converted fraction moves from
/// the correct decision to the wrong one.
#[derive(Debug, Clone)]
pub struct MutaModel {
    awgn: ImoskModel,
    n: f64,
    alpha_sent: MutarotationState,
    beta_sent: MutarotationState,
}

impl MutaModel {
    pub fn new(ch: &ChannelParams, messenger: &MessengerSpec) -> Result<Self> {
        Ok(Self {
            awgn: ImoskModel::new(2, ch),
            n: ch.n,
            alpha_sent: mutarotation_fractions(messenger, AnomericForm::Alpha, ch.ts, ch.n)?,
            beta_sent: mutarotation_fractions(messenger, AnomericForm::Beta, ch.ts, ch.n)?,
        })
    }

    pub fn matrix(&self, tau: f64) -> JointProbabilityMatrix {
        let mut m = self.awgn.matrix(tau);
        m.scheme = Scheme::BImoskMuta;
        if self.n > 0.0 {
            for (row, state, sent) in [
                (0, &self.alpha_sent, AnomericForm::Alpha),
                (1, &self.beta_sent, AnomericForm::Beta),
            ] {
                let converted = state.converted(sent);
                if converted >= tau {
                    let diag = row * 2 + row;
                    let cross = row * 2 + (1 - row);
                    let shift = (converted / self.n).min(m.entries[diag]).max(0.0);
                    m.entries[cross] += shift;
                    m.entries[diag] -= shift;
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::super::{b_imosk_awgn_matrix, b_imosk_muta_matrix, Thresholds};
    use super::*;

    fn hexose() -> MessengerSpec {
        MessengerSpec::hexose()
    }

    #[test]
    fn fresh_release_is_pure() {
        let s = mutarotation_fractions(&hexose(), AnomericForm::Alpha, 0.0, 1000.0).unwrap();
        assert_eq!(s.n_alpha, 1000.0);
        assert_eq!(s.n_beta, 0.0);
        let s = mutarotation_fractions(&hexose(), AnomericForm::Beta, 0.0, 1000.0).unwrap();
        assert!((s.n_beta - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn reaches_equilibrium_split() {
        let t = 3600.0 / 0.99;
        let s = mutarotation_fractions(&hexose(), AnomericForm::Alpha, t, 1.0).unwrap();
        let oracle = (52.7 - 18.7) / (112.2 - 18.7);
        assert!((s.n_alpha - oracle).abs() < 1e-12);
        assert!((s.n_alpha - 0.3636).abs() < 1e-4);
        let b = mutarotation_fractions(&hexose(), AnomericForm::Beta, t, 1.0).unwrap();
        assert!((b.n_alpha - oracle).abs() < 1e-12);
        // clamped beyond equilibrium
        let late = mutarotation_fractions(&hexose(), AnomericForm::Alpha, 10.0 * t, 1.0).unwrap();
        assert!((late.n_alpha - oracle).abs() < 1e-12);
    }

    #[test]
    fn one_symbol_of_conversion() {
        let s = mutarotation_fractions(&hexose(), AnomericForm::Alpha, 5.9, 1e5).unwrap();
        let oracle = 1e5 * (112.2 - 52.7) * (0.99 * 5.9 / 3600.0) / (112.2 - 18.7);
        assert!((s.n_beta - oracle).abs() < 1e-9);
        assert!((s.n_beta - 103.0).abs() < 0.5);
    }

    #[test]
    fn missing_optics_is_config_error() {
        let mut m = hexose();
        m.optical_rotation = None;
        assert!(mutarotation_fractions(&m, AnomericForm::Alpha, 1.0, 1.0).is_err());
    }

    #[test]
    fn zero_duration_matches_awgn() {
        let mut c = ChannelParams::table_hexose(1000.0, 100.0);
        c.ts = 0.0;
        for tau in [0.0, 200.0, 450.0] {
            let t = Thresholds::single(tau).unwrap();
            let a = b_imosk_awgn_matrix(&c, &t).unwrap();
            let b = b_imosk_muta_matrix(&c, &t, &hexose()).unwrap();
            assert_eq!(a.entries, b.entries);
        }
    }

    #[test]
    fn conversion_below_threshold_leaves_awgn() {
        let c = ChannelParams::table_hexose(1e5, 100.0);
        let t = Thresholds::single(500.0).unwrap();
        let a = b_imosk_awgn_matrix(&c, &t).unwrap();
        let b = b_imosk_muta_matrix(&c, &t, &hexose()).unwrap();
        assert_eq!(a.entries, b.entries);
    }

    #[test]
    fn conversion_above_threshold_moves_mass() {
        let c = ChannelParams::table_hexose(1e5, 100.0);
        let t = Thresholds::single(50.0).unwrap();
        let a = b_imosk_awgn_matrix(&c, &t).unwrap();
        let b = b_imosk_muta_matrix(&c, &t, &hexose()).unwrap();
        let n_beta = mutarotation_fractions(&hexose(), AnomericForm::Alpha, 5.9, 1e5).unwrap().n_beta;
        assert!((b.get(0, 1) - a.get(0, 1) - n_beta / 1e5).abs() < 1e-15);
        assert!((b.get(0, 1) - a.get(0, 1) - 103.0 / 1e5).abs() < 1e-5);
        b.check_distribution(1e-12).unwrap();
    }
}
