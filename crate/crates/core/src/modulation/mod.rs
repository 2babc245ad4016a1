//! Joint probability matrices `P(X sent, Y decoded)` for every modulation
//! scheme, averaged over the equiprobable previous symbol.
//!
//! Each scheme is first *prepared* for a link ([`DetectionModel`]), which
//! fixes all Gaussian statistics; evaluating the prepared model at a
//! threshold tuple is then cheap, which is what the rate optimiser needs.

mod icsk;
mod imosk;
mod irsk;
mod mutarotation;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arrivals::ChannelParams;
use crate::error::{config, domain, Error, Result};
use crate::physics::MessengerSpec;

pub use icsk::{IcskModel, OverflowModel};
pub use imosk::{decode_probabilities, exclusive_b_imosk_terms, ImoskModel};
pub use irsk::{irsk_level, irsk_pair_warning, IrskModel};
pub use mutarotation::{mutarotation_fractions, AnomericForm, MutaModel, MutarotationState, MUTAROTATION_RATE};

/// A modulation scheme and its order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Concentration shift keying with `order` amplitude levels `0, n, 2n, ...`.
    Icsk { order: usize },
    /// Molecule-type shift keying over `order` isomers, additive noise only.
    ImoskAwgn { order: usize },
    /// Binary type shift keying with the α/β anomer pair, corrected for
    /// mutarotation during propagation.
    BImoskMuta,
    /// Quadrature ratio shift keying with two molecule types.
    QIrsk,
}

impl Scheme {
    pub const B_ICSK: Scheme = Scheme::Icsk { order: 2 };
    pub const Q_ICSK: Scheme = Scheme::Icsk { order: 4 };
    pub const B_IMOSK_AWGN: Scheme = Scheme::ImoskAwgn { order: 2 };
    pub const IMOSK_32: Scheme = Scheme::ImoskAwgn { order: 32 };

    /// Number of transmit symbols.
    pub fn order(&self) -> usize {
        match *self {
            Scheme::Icsk { order } | Scheme::ImoskAwgn { order } => order,
            Scheme::BImoskMuta => 2,
            Scheme::QIrsk => 4,
        }
    }

    /// Number of thresholds the receiver uses.
    pub fn threshold_count(&self) -> usize {
        match *self {
            Scheme::Icsk { order } => order - 1,
            Scheme::ImoskAwgn { .. } | Scheme::BImoskMuta => 1,
            Scheme::QIrsk => 3,
        }
    }

    /// Largest transmit amplitude in units of `n` on any one molecule type.
    pub fn max_level(&self) -> f64 {
        match *self {
            Scheme::Icsk { order } => (order - 1) as f64,
            Scheme::ImoskAwgn { .. } | Scheme::BImoskMuta => 1.0,
            Scheme::QIrsk => 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Scheme::Icsk { order } | Scheme::ImoskAwgn { order } if order < 2 => {
                Err(config(format!("scheme order must be at least 2, got {order}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Scheme::Icsk { order: 2 } => f.write_str("B_ICSK"),
            Scheme::Icsk { order: 4 } => f.write_str("Q_ICSK"),
            Scheme::Icsk { order } => write!(f, "ICSK_{order}"),
            Scheme::ImoskAwgn { order: 2 } => f.write_str("B_IMOSK_AWGN"),
            Scheme::ImoskAwgn { order } => write!(f, "IMOSK_{order}"),
            Scheme::BImoskMuta => f.write_str("B_IMOSK_MUTA"),
            Scheme::QIrsk => f.write_str("Q_IRSK"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        let scheme = match upper.as_str() {
            "B_ICSK" => Scheme::B_ICSK,
            "Q_ICSK" => Scheme::Q_ICSK,
            "B_IMOSK" | "B_IMOSK_AWGN" => Scheme::B_IMOSK_AWGN,
            "B_IMOSK_MUTA" => Scheme::BImoskMuta,
            "Q_IRSK" => Scheme::QIrsk,
            other => {
                let parse_order = |rest: &str| {
                    rest.parse::<usize>()
                        .map_err(|_| config(format!("unknown scheme `{s}`")))
                };
                if let Some(rest) = other.strip_prefix("ICSK_") {
                    Scheme::Icsk {
                        order: parse_order(rest)?,
                    }
                } else if let Some(rest) = other.strip_prefix("IMOSK_") {
                    Scheme::ImoskAwgn {
                        order: parse_order(rest)?,
                    }
                } else {
                    return Err(config(format!("unknown scheme `{s}`")));
                }
            }
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

impl Serialize for Scheme {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scheme {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Receiver thresholds in molecules, strictly increasing and non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Thresholds(Vec<f64>);

impl Thresholds {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("at least one threshold is required"));
        }
        if values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(domain(format!("thresholds must be non-negative, got {values:?}")));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain(format!("thresholds must be strictly increasing, got {values:?}")));
        }
        Ok(Self(values))
    }

    pub fn single(tau: f64) -> Result<Self> {
        Self::new(vec![tau])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `P(X, Y)` for an `order`-ary scheme, rows indexed by the sent symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointProbabilityMatrix {
    pub scheme: Scheme,
    pub order: usize,
    /// Row-major `order × order` entries.
    pub entries: Vec<f64>,
    pub priors: Vec<f64>,
}

impl JointProbabilityMatrix {
    pub(crate) fn from_entries(scheme: Scheme, order: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), order * order);
        Self {
            scheme,
            order,
            entries,
            priors: vec![1.0 / order as f64; order],
        }
    }

    /// Joint matrix from row-major entries with uniform priors.
    pub fn new(scheme: Scheme, entries: Vec<f64>) -> Result<Self> {
        let order = scheme.order();
        if entries.len() != order * order {
            return Err(domain(format!(
                "{scheme} needs {} entries, got {}",
                order * order,
                entries.len()
            )));
        }
        Ok(Self::from_entries(scheme, order, entries))
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries[x * self.order + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.entries[x * self.order..(x + 1) * self.order]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.order).map(|x| self.row(x).iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.order)
            .map(|y| (0..self.order).map(|x| self.get(x, y)).sum())
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// Checks non-negativity, total mass and uniform row mass within `tol`.
    pub fn check_distribution(&self, tol: f64) -> Result<()> {
        if let Some(bad) = self.entries.iter().find(|p| !(**p >= 0.0 && **p <= 1.0)) {
            return Err(Error::Integrity(format!("entry {bad} outside [0, 1]")));
        }
        let total = self.total();
        if (total - 1.0).abs() > tol {
            return Err(Error::Integrity(format!("total mass {total} differs from 1")));
        }
        let row = 1.0 / self.order as f64;
        for (x, s) in self.row_sums().into_iter().enumerate() {
            if (s - row).abs() > tol {
                return Err(Error::Integrity(format!("row {x} has mass {s}, expected {row}")));
            }
        }
        Ok(())
    }

    /// CSV with one row per sent symbol and one column per decoded symbol.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sent");
        for y in 0..self.order {
            out.push_str(&format!(",y{y}"));
        }
        out.push('\n');
        for x in 0..self.order {
            out.push_str(&x.to_string());
            for p in self.row(x) {
                out.push_str(&format!(",{p:.9e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Everything a scheme needs to know about the link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub channel: ChannelParams,
    /// Second molecule type of a ratio scheme; defaults to `channel`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_channel: Option<ChannelParams>,
    /// Anomer constants for the mutarotation-corrected scheme.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub messenger: Option<MessengerSpec>,
    #[serde(default)]
    pub overflow: OverflowModel,
}

impl LinkSpec {
    pub fn new(channel: ChannelParams) -> Self {
        Self {
            channel,
            second_channel: None,
            messenger: None,
            overflow: OverflowModel::default(),
        }
    }

    pub fn with_messenger(mut self, messenger: MessengerSpec) -> Self {
        self.messenger = Some(messenger);
        self
    }

    pub fn with_second_channel(mut self, second: ChannelParams) -> Self {
        self.second_channel = Some(second);
        self
    }

    pub fn with_overflow(mut self, overflow: OverflowModel) -> Self {
        self.overflow = overflow;
        self
    }

    /// The same link with `n` molecules per unit amplitude on every type.
    pub fn with_n(&self, n: f64) -> Self {
        Self {
            channel: self.channel.with_n(n),
            second_channel: self.second_channel.map(|c| c.with_n(n)),
            ..self.clone()
        }
    }

    pub fn second(&self) -> ChannelParams {
        self.second_channel.unwrap_or(self.channel)
    }
}

/// A scheme with every Gaussian statistic precomputed for one link.
#[derive(Debug, Clone)]
pub enum DetectionModel {
    Icsk(IcskModel),
    Imosk(ImoskModel),
    Muta(MutaModel),
    Irsk(IrskModel),
}

impl DetectionModel {
    pub fn prepare(scheme: Scheme, link: &LinkSpec) -> Result<Self> {
        scheme.validate()?;
        link.channel.validate()?;
        Ok(match scheme {
            Scheme::Icsk { order } => DetectionModel::Icsk(IcskModel::new(order, &link.channel, link.overflow)),
            Scheme::ImoskAwgn { order } => DetectionModel::Imosk(ImoskModel::new(order, &link.channel)),
            Scheme::BImoskMuta => {
                let messenger = link
                    .messenger
                    .as_ref()
                    .ok_or_else(|| config("mutarotation scheme needs a messenger with optical constants"))?;
                DetectionModel::Muta(MutaModel::new(&link.channel, messenger)?)
            }
            Scheme::QIrsk => {
                let second = link.second();
                second.validate()?;
                DetectionModel::Irsk(IrskModel::new(&link.channel, &second))
            }
        })
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            DetectionModel::Icsk(m) => Scheme::Icsk { order: m.order() },
            DetectionModel::Imosk(m) => Scheme::ImoskAwgn { order: m.order() },
            DetectionModel::Muta(_) => Scheme::BImoskMuta,
            DetectionModel::Irsk(_) => Scheme::QIrsk,
        }
    }

    /// Evaluates the joint matrix. `tau` must hold `threshold_count`
    /// strictly increasing values; use [`build_matrix`] for checked input.
    pub fn matrix(&self, tau: &[f64]) -> JointProbabilityMatrix {
        match self {
            DetectionModel::Icsk(m) => m.matrix(tau),
            DetectionModel::Imosk(m) => m.matrix(tau[0]),
            DetectionModel::Muta(m) => m.matrix(tau[0]),
            DetectionModel::Irsk(m) => m.matrix(tau),
        }
    }
}

/// Builds the joint matrix of `scheme` at the given thresholds.
pub fn build_matrix(scheme: Scheme, link: &LinkSpec, tau: &Thresholds) -> Result<JointProbabilityMatrix> {
    if tau.len() != scheme.threshold_count() {
        return Err(domain(format!(
            "{scheme} needs {} thresholds, got {}",
            scheme.threshold_count(),
            tau.len()
        )));
    }
    Ok(DetectionModel::prepare(scheme, link)?.matrix(tau.values()))
}

pub fn b_icsk_matrix(ch: &ChannelParams, tau: &Thresholds) -> Result<JointProbabilityMatrix> {
    build_matrix(Scheme::B_ICSK, &LinkSpec::new(*ch), tau)
}

pub fn q_icsk_matrix(ch: &ChannelParams, tau: &Thresholds) -> Result<JointProbabilityMatrix> {
    build_matrix(Scheme::Q_ICSK, &LinkSpec::new(*ch), tau)
}

pub fn b_imosk_awgn_matrix(ch: &ChannelParams, tau: &Thresholds) -> Result<JointProbabilityMatrix> {
    build_matrix(Scheme::B_IMOSK_AWGN, &LinkSpec::new(*ch), tau)
}

pub fn b_imosk_muta_matrix(
    ch: &ChannelParams,
    tau: &Thresholds,
    messenger: &MessengerSpec,
) -> Result<JointProbabilityMatrix> {
    build_matrix(Scheme::BImoskMuta, &LinkSpec::new(*ch).with_messenger(messenger.clone()), tau)
}

pub fn imosk32_matrix(ch: &ChannelParams, tau: &Thresholds) -> Result<JointProbabilityMatrix> {
    build_matrix(Scheme::IMOSK_32, &LinkSpec::new(*ch), tau)
}

pub fn q_irsk_matrix(
    channels: (&ChannelParams, &ChannelParams),
    tau: &Thresholds,
) -> Result<JointProbabilityMatrix> {
    build_matrix(
        Scheme::QIrsk,
        &LinkSpec::new(*channels.0).with_second_channel(*channels.1),
        tau,
    )
}
