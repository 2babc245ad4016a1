//! Transmit-energy model of a cell-like nanomachine and the SNR convention
//! shared by every scheme.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::physics::{MessengerSpec, CONSTANTS};

/// Zeptojoules per joule.
pub const ZJ_PER_JOULE: f64 = 1e21;
/// Energy of one ATP hydrolysis, zJ.
pub const ATP_ZJ: f64 = 83.0;
/// Length of one motor-protein step along a microtubule, nm.
pub const MOTOR_STEP_NM: f64 = 8.0;

/// Intracellular geometry of the transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    /// Vesicle radius, nm.
    pub vesicle_radius: f64,
    /// Cell radius, nm.
    pub cell_radius: f64,
}

impl Default for CellParams {
    /// 50 nm vesicles in a 10 µm cell. These are placeholder geometry values,
    /// not measured constants.
    fn default() -> Self {
        Self {
            vesicle_radius: 50.0,
            cell_radius: 10_000.0,
        }
    }
}

impl CellParams {
    pub fn validate(&self, messenger: &MessengerSpec) -> Result<()> {
        if !(self.vesicle_radius > 0.0 && self.cell_radius > 0.0) {
            return Err(domain(format!(
                "vesicle and cell radius must be positive, got {} nm / {} nm",
                self.vesicle_radius, self.cell_radius
            )));
        }
        let messenger_nm = messenger.radius * 1e9;
        if self.vesicle_radius <= messenger_nm {
            return Err(domain(format!(
                "vesicle radius {} nm must exceed messenger radius {} nm",
                self.vesicle_radius, messenger_nm
            )));
        }
        Ok(())
    }
}

/// Component costs of transmitting `n` molecules. All energies in joules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub molecules: f64,
    pub e_synthesis: f64,
    pub e_vesicle: f64,
    pub e_carry: f64,
    pub e_exocytosis: f64,
    pub capacity: u64,
    pub e_total: f64,
}

/// Synthesis cost of one messenger molecule, `ΔH / N_A` joules.
pub fn synthesis_cost(messenger: &MessengerSpec) -> f64 {
    messenger.formation_enthalpy / CONSTANTS.avogadro
}

/// Number of messenger molecules one vesicle holds,
/// `floor((r_v / (r_mm √3))³)`, at least one.
pub fn vesicle_capacity(cell: &CellParams, messenger: &MessengerSpec) -> Result<u64> {
    cell.validate(messenger)?;
    let ratio = cell.vesicle_radius / (messenger.radius * 1e9 * 3f64.sqrt());
    // ratio == 1 can land a hair below one after rounding.
    let raw = ratio.powi(3) * (1.0 + 4.0 * f64::EPSILON);
    Ok((raw.floor() as u64).max(1))
}

// Dividing by the exact power of ten keeps integer zJ values correctly rounded.
fn zj(value: f64) -> f64 {
    value / ZJ_PER_JOULE
}

/// Vesicle membrane synthesis cost, `83·5·4π r_v²` zJ with `r_v` in nm.
pub fn vesicle_cost(cell: &CellParams) -> f64 {
    zj(ATP_ZJ * 5.0 * 4.0 * PI * cell.vesicle_radius.powi(2))
}

/// Transport cost over half the cell radius, one ATP per whole motor step.
pub fn carry_cost(cell: &CellParams) -> f64 {
    zj(ATP_ZJ * ((cell.cell_radius / 2.0) / MOTOR_STEP_NM).ceil())
}

/// Membrane-fusion cost, `83·10` zJ.
pub fn exocytosis_cost() -> f64 {
    zj(ATP_ZJ * 10.0)
}

/// Total energy `n E_S + (n / c_v)(E_V + E_C + E_E)`.
pub fn total_energy(n: f64, cell: &CellParams, messenger: &MessengerSpec) -> Result<EnergyBreakdown> {
    if !(n >= 0.0 && n.is_finite()) {
        return Err(domain(format!("molecule count must be non-negative, got {n}")));
    }
    let capacity = vesicle_capacity(cell, messenger)?;
    let e_synthesis = synthesis_cost(messenger);
    let e_vesicle = vesicle_cost(cell);
    let e_carry = carry_cost(cell);
    let e_exocytosis = exocytosis_cost();
    let e_total =
        n * e_synthesis + n / capacity as f64 * (e_vesicle + e_carry + e_exocytosis);
    Ok(EnergyBreakdown {
        molecules: n,
        e_synthesis,
        e_vesicle,
        e_carry,
        e_exocytosis,
        capacity,
        e_total,
    })
}

/// Received-signal to noise ratio in dB, `10 log10(n p1 / σ)`.
///
/// Signal and noise are both molecule counts scaled by the same
/// per-molecule energy, so the energy factor cancels.
pub fn snr_db(n: f64, p1: f64, noise_std: f64) -> Result<f64> {
    if !(noise_std > 0.0) {
        return Err(domain(format!("noise std must be positive, got {noise_std}")));
    }
    if !(n >= 0.0) || !(0.0..=1.0).contains(&p1) {
        return Err(domain(format!("invalid n = {n} or p1 = {p1}")));
    }
    Ok(10.0 * (n * p1 / noise_std).log10())
}

/// Molecules per symbol needed to reach `snr` dB; inverse of [`snr_db`].
pub fn molecules_for_snr(snr: f64, p1: f64, noise_std: f64) -> Result<f64> {
    if !(noise_std > 0.0) {
        return Err(domain(format!("noise std must be positive, got {noise_std}")));
    }
    if !(p1 > 0.0 && p1 <= 1.0) {
        return Err(domain(format!("p1 must be in (0, 1], got {p1}")));
    }
    if !snr.is_finite() {
        return Err(domain(format!("SNR must be finite, got {snr}")));
    }
    Ok(noise_std * 10f64.powf(snr / 10.0) / p1)
}
