//! Physical constants, medium and messenger descriptions, and the
//! closed-form diffusion relations.
//!
//! Everything is SI internally: meters, seconds, kelvin, joules.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};

/// Fixed constants used by the diffusion and energy models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Boltzmann constant, J/K (CODATA 2018, exact).
    pub boltzmann: f64,
    /// Avogadro number as used in the per-molecule synthesis cost.
    pub avogadro: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    boltzmann: 1.380_649e-23,
    avogadro: 6.02e23,
};

/// Propagation medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    /// Kelvin.
    pub temperature: f64,
    /// kg/(s·m).
    pub viscosity: f64,
}

impl MediumParams {
    pub fn new(temperature: f64, viscosity: f64) -> Result<Self> {
        let m = Self {
            temperature,
            viscosity,
        };
        m.validate()?;
        Ok(m)
    }

    /// Water at body temperature (310 K, 0.001 kg/(s·m)).
    pub fn body_water() -> Self {
        Self {
            temperature: 310.0,
            viscosity: 0.001,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(domain(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if !(self.viscosity > 0.0 && self.viscosity.is_finite()) {
            return Err(domain(format!(
                "viscosity must be positive, got {}",
                self.viscosity
            )));
        }
        Ok(())
    }
}

impl Default for MediumParams {
    fn default() -> Self {
        Self::body_water()
    }
}

/// Specific optical rotations (degrees) of the two anomers and of the
/// equilibrium mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalRotation {
    pub alpha: f64,
    pub beta: f64,
    pub equilibrium: f64,
}

impl OpticalRotation {
    /// D-glucopyranose: 112.2°, 18.7°, 52.7°.
    pub const GLUCOSE: OpticalRotation = OpticalRotation {
        alpha: 112.2,
        beta: 18.7,
        equilibrium: 52.7,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.beta < self.equilibrium && self.equilibrium < self.alpha) {
            return Err(config(format!(
                "optical rotations must satisfy beta < equilibrium < alpha, got {} / {} / {}",
                self.beta, self.equilibrium, self.alpha
            )));
        }
        Ok(())
    }

    /// Fraction of the alpha anomer in the equilibrium mixture.
    pub fn equilibrium_alpha_fraction(&self) -> f64 {
        (self.equilibrium - self.beta) / (self.alpha - self.beta)
    }
}

/// One family of messenger molecules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessengerSpec {
    pub name: String,
    /// Molecular radius in meters.
    pub radius: f64,
    /// Enthalpy of formation, J/mol.
    pub formation_enthalpy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optical_rotation: Option<OpticalRotation>,
    /// Number of distinguishable isomers in the family.
    pub family_order: usize,
}

impl MessengerSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(domain(format!(
                "messenger `{}`: radius must be positive, got {}",
                self.name, self.radius
            )));
        }
        if !(self.formation_enthalpy > 0.0 && self.formation_enthalpy.is_finite()) {
            return Err(domain(format!(
                "messenger `{}`: formation enthalpy must be positive, got {}",
                self.name, self.formation_enthalpy
            )));
        }
        if self.family_order == 0 {
            return Err(domain(format!(
                "messenger `{}`: family order must be at least 1",
                self.name
            )));
        }
        if let Some(rot) = &self.optical_rotation {
            rot.validate()?;
        }
        Ok(())
    }

    /// Aldohexoses: 0.38 nm, 1271 kJ/mol, 16 stereoisomers times two
    /// pyranose anomers. Optical rotations are those of D-glucose.
    pub fn hexose() -> Self {
        Self {
            name: "hexose".into(),
            radius: 0.38e-9,
            formation_enthalpy: 1271e3,
            optical_rotation: Some(OpticalRotation::GLUCOSE),
            family_order: 32,
        }
    }

    /// Aldotrioses, four distinguishable isomers.
    ///
    /// Radius and enthalpy are placeholder defaults (not measured values
    /// for this model); override them in the configuration.
    pub fn triose() -> Self {
        Self {
            name: "triose".into(),
            radius: 0.30e-9,
            formation_enthalpy: 598e3,
            optical_rotation: None,
            family_order: 4,
        }
    }

    pub fn optical_rotation(&self) -> Result<OpticalRotation> {
        self.optical_rotation.ok_or_else(|| {
            config(format!(
                "messenger `{}` has no optical-rotation constants",
                self.name
            ))
        })
    }
}

/// Built-in messenger families.
pub fn builtin_catalog() -> Vec<MessengerSpec> {
    vec![MessengerSpec::hexose(), MessengerSpec::triose()]
}

/// Stokes-Einstein diffusion coefficient `K_b T / (6 π η r)` in m²/s.
pub fn diffusion_coefficient(medium: &MediumParams, messenger: &MessengerSpec) -> Result<f64> {
    medium.validate()?;
    if !(messenger.radius > 0.0) {
        return Err(domain(format!(
            "messenger radius must be positive, got {}",
            messenger.radius
        )));
    }
    Ok(CONSTANTS.boltzmann * medium.temperature
        / (6.0 * PI * medium.viscosity * messenger.radius))
}

/// Standard deviation `sqrt(2 D t)` of the 1-D Brownian displacement.
pub fn displacement_std(diffusion: f64, t: f64) -> Result<f64> {
    if !(diffusion > 0.0) {
        return Err(domain(format!(
            "diffusion coefficient must be positive, got {diffusion}"
        )));
    }
    if !(t >= 0.0) {
        return Err(domain(format!("time must be non-negative, got {t}")));
    }
    Ok((2.0 * diffusion * t).sqrt())
}

/// Normalised 1-D concentration `exp(-x²/4Dt) / sqrt(4πDt)` of a unit
/// impulse released at the origin.
pub fn concentration_profile(diffusion: f64, x: f64, t: f64) -> Result<f64> {
    if !(diffusion > 0.0) {
        return Err(domain(format!(
            "diffusion coefficient must be positive, got {diffusion}"
        )));
    }
    if !(t > 0.0) {
        return Err(domain(format!("time must be positive, got {t}")));
    }
    let four_dt = 4.0 * diffusion * t;
    Ok((-x * x / four_dt).exp() / (PI * four_dt).sqrt())
}
