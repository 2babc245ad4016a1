//! Run configuration: TOML on disk, presets embedded in the binary.

use isolink::arrivals::ChannelParams;
use isolink::brownian::{hit_probability_pair, rescale_hit_probability, Dimensions, GeometryParams, McConfig};
use isolink::energy::CellParams;
use isolink::modulation::{LinkSpec, OverflowModel, Scheme};
use isolink::physics::{builtin_catalog, diffusion_coefficient, MediumParams, MessengerSpec, OpticalRotation};
use isolink::rate::SearchConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const PRESETS: &[(&str, &str)] = &[
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
    ("fig9", include_str!("../presets/fig9.toml")),
    ("fig10", include_str!("../presets/fig10.toml")),
    ("fig11", include_str!("../presets/fig11.toml")),
    ("fig12", include_str!("../presets/fig12.toml")),
    ("calibration", include_str!("../presets/calibration.toml")),
    ("energy", include_str!("../presets/energy.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub schemes: Vec<Scheme>,
    /// Messenger families to compare. The first one uses the channel's hit
    /// probabilities; the others are rescaled by their diffusion coefficient.
    #[serde(default = "default_messengers")]
    pub messengers: Vec<String>,
    /// Output directory; `--out` and `ISOLINK_OUT_DIR` take precedence.
    /// Never embedded in outputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default = "MediumParams::body_water")]
    pub medium: MediumParams,
    #[serde(default)]
    pub cell: CellParams,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub mc: McSettings,
    #[serde(default)]
    pub energy: EnergySettings,
    /// Extra or overridden messenger families.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub catalog: Vec<MessengerEntry>,
}

fn default_messengers() -> Vec<String> {
    vec!["hexose".into()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HitSource {
    #[default]
    Table,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondType {
    pub p1: f64,
    pub p2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    /// Seconds.
    pub ts: f64,
    /// Meters.
    pub distance: f64,
    pub p1: f64,
    pub p2: f64,
    /// Molecules.
    pub noise_std: f64,
    pub hit_source: HitSource,
    pub overflow: OverflowModel,
    /// Hit probabilities of the second ratio-keying molecule type.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second: Option<SecondType>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            ts: 5.9,
            distance: 16e-6,
            p1: 0.6097,
            p2: 0.7208,
            noise_std: 100.0,
            hit_source: HitSource::Table,
            overflow: OverflowModel::Scaled,
            second: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub snr_db: SnrGrid,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            snr_db: SnrGrid::Range {
                start: -10.0,
                stop: 30.0,
                step: 1.0,
            },
        }
    }
}

impl SnrGrid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match *self {
            SnrGrid::List(ref v) => Ok(v.clone()),
            SnrGrid::Range { start, stop, step } => {
                if !(step > 0.0) || !(stop >= start) {
                    return Err(CliError::config("sweep.snr_db: range needs step > 0 and stop >= start"));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=count).map(|i| start + step * i as f64).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSettings {
    pub particle_count: u64,
    /// Seconds; defaults to `channel.ts / 1000`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_step: Option<f64>,
    /// Seconds; defaults to `channel.ts`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    pub dimensions: Dimensions,
    /// Meters. Required unless calibrating.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub receiver_radius: Option<f64>,
    pub calibrate: bool,
    /// Defaults to `channel.p1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_p1: Option<f64>,
    /// Defaults to `channel.p2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_p2: Option<f64>,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            particle_count: 20_000,
            time_step: None,
            horizon: None,
            dimensions: Dimensions::ThreeD,
            receiver_radius: None,
            calibrate: false,
            target_p1: None,
            reference_p2: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySettings {
    pub molecules: Vec<f64>,
}

impl Default for EnergySettings {
    fn default() -> Self {
        Self {
            molecules: vec![0.0, 1e3, 1e4, 1e5],
        }
    }
}

/// Messenger family supplied by the configuration. Missing fields are
/// taken from the built-in entry of the same name, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MessengerEntry {
    pub name: String,
    /// Meters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// J/mol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formation_enthalpy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optical_rotation: Option<OpticalRotation>,
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(format!("{origin}: {e}")))
    }

    pub fn preset(name: &str) -> Result<Self, CliError> {
        let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
            CliError::usage(format!("unknown preset `{name}`; available: {}", names.join(", ")))
        })?;
        Self::from_toml(text, &format!("preset {name}"))
    }

    /// The configuration as embedded in outputs.
    pub fn embedded(&self) -> Self {
        Self {
            output_dir: None,
            ..self.clone()
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.embedded()).expect("config serializes to TOML")
    }

    pub fn messenger(&self, name: &str) -> Result<MessengerSpec, CliError> {
        let builtin = builtin_catalog().into_iter().find(|m| m.name == name);
        let entry = self.catalog.iter().find(|e| e.name == name);
        let spec = match (entry, builtin) {
            (None, Some(b)) => b,
            (None, None) => {
                return Err(CliError::config(format!(
                    "messengers: `{name}` is neither built in nor defined under [[catalog]]"
                )))
            }
            (Some(e), builtin) => {
                let missing = |field: &str| {
                    CliError::config(format!(
                        "catalog.{name}.{field}: required, no built-in default (preset is incomplete until supplied)"
                    ))
                };
                MessengerSpec {
                    name: name.to_string(),
                    radius: e.radius.or(builtin.as_ref().map(|b| b.radius)).ok_or_else(|| missing("radius"))?,
                    formation_enthalpy: e
                        .formation_enthalpy
                        .or(builtin.as_ref().map(|b| b.formation_enthalpy))
                        .ok_or_else(|| missing("formation_enthalpy"))?,
                    optical_rotation: e.optical_rotation.or(builtin.as_ref().and_then(|b| b.optical_rotation)),
                    family_order: e
                        .family_order
                        .or(builtin.as_ref().map(|b| b.family_order))
                        .ok_or_else(|| missing("family_order"))?,
                }
            }
        };
        spec.validate()
            .map_err(|e| CliError::config(format!("catalog.{name}: {e}")))?;
        Ok(spec)
    }

    /// Messenger names whose constants are not fully known.
    pub fn incomplete_messengers(&self) -> Vec<String> {
        self.messengers
            .iter()
            .filter(|m| self.messenger(m).is_err())
            .cloned()
            .collect()
    }

    pub fn validate_common(&self) -> Result<(), CliError> {
        if self.messengers.is_empty() {
            return Err(CliError::usage("messengers: at least one messenger is required"));
        }
        self.medium
            .validate()
            .map_err(|e| CliError::config(format!("medium: {e}")))?;
        self.channel_params(0.6097, 0.7208)
            .validate()
            .map_err(|e| CliError::config(format!("channel: {e}")))?;
        if !(self.channel.ts > 0.0) {
            return Err(CliError::config("channel.ts: must be positive"));
        }
        Ok(())
    }

    fn channel_params(&self, p1: f64, p2: f64) -> ChannelParams {
        ChannelParams {
            n: 0.0,
            p1,
            p2,
            noise_std: self.channel.noise_std,
            ts: self.channel.ts,
            distance: self.channel.distance,
        }
    }

    pub fn diffusion(&self, messenger: &MessengerSpec) -> Result<f64, CliError> {
        diffusion_coefficient(&self.medium, messenger).map_err(|e| CliError::config(format!("medium: {e}")))
    }

    pub fn mc_config(&self, horizon: Option<f64>) -> McConfig {
        McConfig {
            particle_count: self.mc.particle_count,
            time_step: self.mc.time_step.unwrap_or(self.channel.ts / 1000.0),
            horizon: horizon.or(self.mc.horizon).unwrap_or(self.channel.ts),
            seed: self.seed,
        }
    }

    pub fn geometry(&self) -> Result<GeometryParams, CliError> {
        let radius = self
            .mc
            .receiver_radius
            .ok_or_else(|| CliError::config("mc.receiver_radius: required for Monte Carlo hit probabilities"))?;
        let g = GeometryParams {
            distance: self.channel.distance,
            receiver_radius: radius,
            dimensions: self.mc.dimensions,
        };
        g.validate().map_err(|e| CliError::config(format!("mc: {e}")))?;
        Ok(g)
    }

    /// Link fixture (with `n = 0`) for the messenger at position `index`
    /// of `messengers`.
    pub fn link_for(&self, index: usize) -> Result<LinkSpec, CliError> {
        let name = &self.messengers[index];
        let messenger = self.messenger(name)?;
        let (p1, p2) = match self.channel.hit_source {
            HitSource::Table if index == 0 => (self.channel.p1, self.channel.p2),
            HitSource::Table => {
                let reference = self.messenger(&self.messengers[0])?;
                let (d_ref, d_new) = (self.diffusion(&reference)?, self.diffusion(&messenger)?);
                let scale = |p| rescale_hit_probability(p, d_ref, d_new).map_err(|e| CliError::config(format!("channel: {e}")));
                (scale(self.channel.p1)?, scale(self.channel.p2)?)
            }
            HitSource::Mc => {
                let d = self.diffusion(&messenger)?;
                let (a, b) = hit_probability_pair(&self.geometry()?, d, self.channel.ts, &self.mc_config(None))
                    .map_err(|e| CliError::config(format!("mc: {e}")))?;
                (a.p_hat, b.p_hat)
            }
        };
        let channel = self.channel_params(p1, p2);
        channel
            .validate()
            .map_err(|e| CliError::config(format!("channel ({name}): {e}")))?;
        let mut link = LinkSpec::new(channel)
            .with_messenger(messenger)
            .with_overflow(self.channel.overflow);
        if let Some(second) = self.channel.second {
            link = link.with_second_channel(ChannelParams {
                p1: second.p1,
                p2: second.p2,
                ..channel
            });
        }
        Ok(link)
    }
}
