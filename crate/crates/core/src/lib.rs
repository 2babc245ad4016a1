//! Link-level analysis of diffusion-based molecular communication with
//! isomer messenger molecules.
//!
//! The crate is organised bottom-up:
//!
//! * [`physics`]: Stokes-Einstein diffusion, Brownian displacement and the
//!   messenger catalog.
//! * [`brownian`]: Monte Carlo first-hitting estimates for an absorbing
//!   receiver, including the receiver-radius calibration.
//! * [`energy`]: transmit-energy bookkeeping and the SNR definition.
//! * [`arrivals`]: Gaussian arrival statistics and the Q-function.
//! * [`modulation`]: joint probability matrices for concentration-, type- and
//!   ratio-shift keying with one symbol of channel memory.
//! * [`rate`]: mutual information, threshold optimisation and SNR sweeps.
//!
//! With the default `parallel` feature, grid searches, sweeps and particle
//! simulations run on rayon; without it every loop runs sequentially and
//! produces the same numbers.

pub mod arrivals;
pub mod brownian;
pub mod energy;
pub mod error;
pub mod modulation;
pub mod par;
pub mod physics;
pub mod quadrature;
pub mod rate;

pub use error::{Error, Result};
