//! Effective transmissivity of one optical path.
//!
//! Diffraction, pointing and detector losses are treated as independent and
//! multiplied. The geometric models are simple placeholders: a far-field
//! Gaussian beam caught by a circular aperture, and Gaussian pointing jitter
//! averaged over the beam profile.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::sensing::ChannelPair;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub range_m: f64,
    /// Beam waist radius at the transmitter.
    pub tx_waist_m: f64,
    /// Receiver aperture radius.
    pub rx_aperture_m: f64,
    pub wavelength_m: f64,
    /// rms pointing jitter, radians.
    #[serde(default)]
    pub pointing_jitter_rad: f64,
}

impl LinkGeometry {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("range_m", self.range_m),
            ("tx_waist_m", self.tx_waist_m),
            ("rx_aperture_m", self.rx_aperture_m),
            ("wavelength_m", self.wavelength_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} must be positive")));
            }
        }
        if !(self.pointing_jitter_rad >= 0.0 && self.pointing_jitter_rad.is_finite()) {
            return Err(Error::param(
                "pointing_jitter_rad",
                format!("{} must be non-negative", self.pointing_jitter_rad),
            ));
        }
        Ok(())
    }

    /// Beam radius at the receiver, `w₀ √(1 + (λL/(πw₀²))²)`.
    pub fn beam_radius(&self) -> f64 {
        let w0 = self.tx_waist_m;
        w0 * (self.wavelength_m * self.range_m / (PI * w0 * w0)).hypot(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub eta_diffraction: f64,
    pub eta_pointing: f64,
    pub eta_detector: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<LinkGeometry>,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            eta_diffraction: 1.0,
            eta_pointing: 1.0,
            eta_detector: 1.0,
            geometry: None,
        }
    }
}

impl LinkBudget {
    /// Budget whose diffraction and pointing factors come from `geometry`.
    pub fn from_geometry(geometry: LinkGeometry, eta_detector: f64) -> Result<Self> {
        Ok(Self {
            eta_diffraction: diffraction_eta(&geometry)?,
            eta_pointing: pointing_eta(&geometry)?,
            eta_detector: check_unit("eta_detector", eta_detector)?,
            geometry: Some(geometry),
        })
    }
}

pub fn compose_eta(budget: &LinkBudget) -> Result<f64> {
    let d = check_unit("eta_diffraction", budget.eta_diffraction)?;
    let p = check_unit("eta_pointing", budget.eta_pointing)?;
    let q = check_unit("eta_detector", budget.eta_detector)?;
    Ok(d * p * q)
}

/// Power fraction `1 − exp(−2a²/w(L)²)` of the received Gaussian beam inside
/// the aperture.
pub fn diffraction_eta(geometry: &LinkGeometry) -> Result<f64> {
    geometry.validate()?;
    let ratio = geometry.rx_aperture_m / geometry.beam_radius();
    Ok((-(-2.0 * ratio * ratio).exp_m1()).clamp(0.0, 1.0))
}

/// Mean pointing factor `1/(1 + 2(σ_θ L / w(L))²)`.
pub fn pointing_eta(geometry: &LinkGeometry) -> Result<f64> {
    geometry.validate()?;
    let spread = geometry.pointing_jitter_rad * geometry.range_m / geometry.beam_radius();
    Ok(1.0 / (1.0 + 2.0 * spread * spread))
}

/// Channel pair from two per-path budgets with the default vacuum policy.
pub fn channel_from_budgets(path1: &LinkBudget, path2: &LinkBudget) -> Result<ChannelPair> {
    ChannelPair::new(compose_eta(path1)?, compose_eta(path2)?)
}
