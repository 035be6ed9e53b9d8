//! Closed-form photocurrent statistics and minimum measurable offsets.
//!
//! All photocurrents are expressed with the field prefactor `|ε|²` set to
//! one; the physical detector gain is not modeled. Offsets are obtained by
//! inverting `SNR = ⟨I⟩/√⟨δI²⟩` at the configured threshold (1 by default),
//! where both `|ε|` and `N_lo` cancel.

use std::f64::consts::LN_10;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::gaussian::VacuumPolicy;
use crate::temporal::{timing_params, SpectralProfile, TimingModeParams};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Angular frequency of light with vacuum wavelength `lambda` (meters).
pub fn omega_from_wavelength(lambda: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / lambda
}

pub fn r_from_db(r_db: f64) -> Result<f64> {
    if !(r_db >= 0.0 && r_db.is_finite()) {
        return Err(Error::param("r_db", format!("{r_db} must be finite and non-negative")));
    }
    Ok(r_db * LN_10 / 20.0)
}

/// Inverse of [`r_from_db`]: `-10 log10(e^{-2r})`.
pub fn db_from_r(r: f64) -> f64 {
    -10.0 * (-2.0 * r).exp().log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingConfig {
    /// Squeezing level, dB.
    pub r_db: f64,
    /// Total photons emitted by the source.
    pub n_in: f64,
    /// Local-oscillator photons per detector.
    pub n_lo: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta_lo: f64,
    /// Carrier angular frequency, rad/s.
    pub omega0: f64,
    /// Frequency spread, rad/s.
    pub delta_omega: f64,
    /// Fraction of `n_in` sent along path 1.
    pub split: f64,
    /// SNR at which an offset counts as measurable.
    pub snr: f64,
}

impl Default for SensingConfig {
    /// LEO link parameters: 815 nm carrier, 2π·1 MHz spread, 10³ photons.
    fn default() -> Self {
        Self {
            r_db: 0.0,
            n_in: 1e3,
            n_lo: 1.0,
            theta1: 0.0,
            theta2: 0.0,
            theta_lo: 0.0,
            omega0: omega_from_wavelength(815e-9),
            delta_omega: 2.0 * std::f64::consts::PI * 1e6,
            split: 0.5,
            snr: 1.0,
        }
    }
}

impl SensingConfig {
    pub fn with_r_db(mut self, r_db: f64) -> Self {
        self.r_db = r_db;
        self
    }

    pub fn with_n_in(mut self, n_in: f64) -> Self {
        self.n_in = n_in;
        self
    }

    pub fn with_lambda0(mut self, lambda0: f64) -> Self {
        self.omega0 = omega_from_wavelength(lambda0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        r_from_db(self.r_db)?;
        let positive = [
            ("n_in", self.n_in),
            ("n_lo", self.n_lo),
            ("omega0", self.omega0),
            ("delta_omega", self.delta_omega),
            ("snr", self.snr),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} must be positive and finite")));
            }
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::param("split", format!("{} must lie in (0, 1)", self.split)));
        }
        for (name, v) in [
            ("theta1", self.theta1),
            ("theta2", self.theta2),
            ("theta_lo", self.theta_lo),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "phase must be finite"));
            }
        }
        Ok(())
    }

    pub fn r(&self) -> Result<f64> {
        r_from_db(self.r_db)
    }

    pub fn timing(&self) -> Result<TimingModeParams> {
        timing_params(&SpectralProfile::gaussian(self.omega0, self.delta_omega)?)
    }

    /// Photons on each path, `(N₁, N₂)`.
    pub fn path_photons(&self) -> (f64, f64) {
        (self.split * self.n_in, (1.0 - self.split) * self.n_in)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPair {
    pub eta1: f64,
    pub eta2: f64,
    pub policy: VacuumPolicy,
}

impl ChannelPair {
    pub fn new(eta1: f64, eta2: f64) -> Result<Self> {
        Self::with_policy(eta1, eta2, VacuumPolicy::Shared(0))
    }

    pub fn symmetric(eta: f64) -> Result<Self> {
        Self::new(eta, eta)
    }

    pub fn with_policy(eta1: f64, eta2: f64, policy: VacuumPolicy) -> Result<Self> {
        let ch = Self { eta1, eta2, policy };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("eta1", self.eta1)?;
        check_unit("eta2", self.eta2)?;
        Ok(())
    }

    pub fn lossless() -> Self {
        Self {
            eta1: 1.0,
            eta2: 1.0,
            policy: VacuumPolicy::Shared(0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    TmsvIdeal,
    TmsvReal,
    Sql,
    SmsvReal,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::TmsvIdeal => "tmsv_ideal",
            Scheme::TmsvReal => "tmsv_real",
            Scheme::Sql => "sql",
            Scheme::SmsvReal => "smsv_real",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffsetResult {
    /// Minimum measurable offset, seconds.
    pub delta_u: f64,
    pub scheme: Scheme,
    pub config: SensingConfig,
    pub channel: Option<ChannelPair>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    One,
    Two,
}

/// Expected photocurrent of one homodyne detector with the local oscillator
/// shaped in the timing mode.
pub fn photocurrent_mean_single(cfg: &SensingConfig, path: Path, delta_u: f64) -> Result<f64> {
    cfg.validate()?;
    let t = cfg.timing()?;
    let (n1, n2) = cfg.path_photons();
    let (n, theta) = match path {
        Path::One => (n1, cfg.theta1),
        Path::Two => (n2, cfg.theta2),
    };
    let phase = theta - cfg.theta_lo;
    Ok(2.0
        * (n * cfg.n_lo).sqrt()
        * (delta_u / t.u0 * phase.cos() + t.timing_overlap() * phase.sin()))
}

/// `N_lo cosh 2r`, the same for both detectors.
pub fn photocurrent_variance_single(cfg: &SensingConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(cfg.n_lo * (2.0 * cfg.r()?).cosh())
}

/// Mean of the summed photocurrent with `θ₁ = θ₂ = θ_lo`.
pub fn post_mean_ideal(cfg: &SensingConfig, delta_u: f64) -> Result<f64> {
    post_mean_real(cfg, &ChannelPair::lossless(), delta_u)
}

/// Variance of the summed photocurrent at arbitrary LO phase, including the
/// finite-bandwidth factor `(Ω²−1)/(Ω²+1)`.
pub fn post_variance_ideal(cfg: &SensingConfig) -> Result<f64> {
    cfg.validate()?;
    let r = cfg.r()?;
    let big = cfg.timing()?.big_omega;
    let w = (big * big - 1.0) / (big * big + 1.0);
    Ok(2.0 * cfg.n_lo * ((2.0 * r).cosh() - w * (2.0 * cfg.theta_lo).cos() * (2.0 * r).sinh()))
}

pub fn post_mean_real(cfg: &SensingConfig, ch: &ChannelPair, delta_u: f64) -> Result<f64> {
    cfg.validate()?;
    ch.validate()?;
    Ok(2.0 * delta_u * cfg.n_lo.sqrt() / cfg.timing()?.u0 * collected_amplitude(cfg, ch))
}

/// Summed-photocurrent variance behind lossy channels, `2 N_lo Q`.
pub fn post_variance_real(cfg: &SensingConfig, ch: &ChannelPair) -> Result<f64> {
    cfg.validate()?;
    Ok(2.0 * cfg.n_lo * q_factor(cfg.r()?, ch)?)
}

/// `√(η₁N₁) + √(η₂N₂)`
fn collected_amplitude(cfg: &SensingConfig, ch: &ChannelPair) -> f64 {
    let (n1, n2) = cfg.path_photons();
    (ch.eta1 * n1).sqrt() + (ch.eta2 * n2).sqrt()
}

/// Radicand of the lossy TMSV offset:
///
/// ```text
/// Q = (η₁+η₂) sinh²r + 1 + √((1−η₁)(1−η₂)) − √(η₁η₂) sinh 2r
/// ```
///
/// evaluated as the sum of non-negative terms
/// `(√η₁−√η₂)² sinh²r + (1−√(η₁η₂)) + √(η₁η₂) e^{−2r} + √((1−η₁)(1−η₂))`
/// to avoid cancellation at large `r`. The vacuum cross term is dropped for
/// [`VacuumPolicy::Independent`].
pub fn q_factor(r: f64, ch: &ChannelPair) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::param("r", format!("{r} must be finite and non-negative")));
    }
    ch.validate()?;
    let (a, b) = (ch.eta1.sqrt(), ch.eta2.sqrt());
    let ab = a * b;
    let cross = match ch.policy {
        VacuumPolicy::Shared(_) => ((1.0 - ch.eta1) * (1.0 - ch.eta2)).sqrt(),
        VacuumPolicy::Independent => 0.0,
    };
    Ok((a - b).powi(2) * r.sinh().powi(2) + (1.0 - ab) + ab * (-2.0 * r).exp() + cross)
}

pub fn delta_u_tmsv_ideal(cfg: &SensingConfig) -> Result<OffsetResult> {
    cfg.validate()?;
    let (n1, n2) = cfg.path_photons();
    let u0 = cfg.timing()?.u0;
    let delta_u = cfg.snr * u0 * (-cfg.r()?).exp() / (2f64.sqrt() * (n1.sqrt() + n2.sqrt()));
    Ok(OffsetResult {
        delta_u,
        scheme: Scheme::TmsvIdeal,
        config: *cfg,
        channel: None,
    })
}

fn lossy_tmsv(cfg: &SensingConfig, ch: &ChannelPair, r: f64, scheme: Scheme) -> Result<OffsetResult> {
    cfg.validate()?;
    ch.validate()?;
    let amplitude = collected_amplitude(cfg, ch);
    if amplitude <= 0.0 {
        return Err(Error::Divergent(format!(
            "no photons reach the receiver (η₁ = {}, η₂ = {})",
            ch.eta1, ch.eta2
        )));
    }
    let u0 = cfg.timing()?.u0;
    let delta_u = cfg.snr * u0 * (2.0 * q_factor(r, ch)?).sqrt() / (2.0 * amplitude);
    Ok(OffsetResult {
        delta_u,
        scheme,
        config: *cfg,
        channel: Some(*ch),
    })
}

pub fn delta_u_tmsv_real(cfg: &SensingConfig, ch: &ChannelPair) -> Result<OffsetResult> {
    lossy_tmsv(cfg, ch, cfg.r()?, Scheme::TmsvReal)
}

/// Standard quantum limit of the two-path receiver: the lossy TMSV offset
/// with no squeezing.
pub fn delta_u_sql(cfg: &SensingConfig, ch: &ChannelPair) -> Result<OffsetResult> {
    lossy_tmsv(cfg, ch, 0.0, Scheme::Sql)
}

/// Single-mode squeezed vacuum carrying all `N_in` photons over one channel.
pub fn delta_u_smsv_real(cfg: &SensingConfig, eta1: f64) -> Result<OffsetResult> {
    cfg.validate()?;
    let eta = check_unit("eta1", eta1)?;
    if eta == 0.0 {
        return Err(Error::Divergent("η₁ = 0 blocks the single channel".into()));
    }
    let u0 = cfg.timing()?.u0;
    let noise = eta * (-2.0 * cfg.r()?).exp() + (1.0 - eta);
    let delta_u = cfg.snr * 0.5 * u0 * (noise / (eta * cfg.n_in)).sqrt();
    Ok(OffsetResult {
        delta_u,
        scheme: Scheme::SmsvReal,
        config: *cfg,
        channel: Some(ChannelPair {
            eta1: eta,
            eta2: 0.0,
            policy: VacuumPolicy::Independent,
        }),
    })
}

/// `Δu_SQL − Δu_TMSV`; positive means the squeezed source wins.
pub fn quantum_advantage(cfg: &SensingConfig, ch: &ChannelPair) -> Result<f64> {
    Ok(delta_u_sql(cfg, ch)?.delta_u - delta_u_tmsv_real(cfg, ch)?.delta_u)
}

/// `1 − Δu_TMSV/Δu_SQL`.
pub fn relative_advantage(cfg: &SensingConfig, ch: &ChannelPair) -> Result<f64> {
    Ok(1.0 - delta_u_tmsv_real(cfg, ch)?.delta_u / delta_u_sql(cfg, ch)?.delta_u)
}

/// Range of `η₁` (at fixed `η₂`) over which the lossy TMSV beats the SQL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdvantageWindow {
    pub lower: f64,
    /// `None` when the window extends past `η₁ = 1`.
    pub upper: Option<f64>,
}

fn check_boundary_inputs(r: f64, eta2: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param(
            "r",
            format!("{r}: no advantage boundary exists without squeezing"),
        ));
    }
    if !(eta2 > 0.0 && eta2 <= 1.0) {
        return Err(Error::param("eta2", format!("{eta2} must lie in (0, 1]")));
    }
    Ok(())
}

/// `Q(r) − Q(0)` at fixed transmissivities; negative iff there is an
/// advantage. Independent of the vacuum policy.
fn squeezing_excess(r: f64, eta1: f64, eta2: f64) -> f64 {
    (eta1 + eta2) * r.sinh().powi(2) - (eta1 * eta2).sqrt() * (2.0 * r).sinh()
}

/// Advantage holds iff `tanh r < 2√(η₁η₂)/(η₁+η₂)`. Writing `x = √(η₁/η₂)`
/// this is the quadratic `x² tanh r − 2x + tanh r < 0`, whose roots are
/// `tanh(r/2)` and `coth(r/2)`.
pub fn advantage_window_eta1(r: f64, eta2: f64) -> Result<AdvantageWindow> {
    check_boundary_inputs(r, eta2)?;
    let t = (0.5 * r).tanh();
    let mut lower = eta2 * t * t;
    if !(lower.is_finite() && lower > 0.0 && lower < eta2) {
        lower = bisect_advantage_boundary(r, eta2, 1e-12)?;
    }
    let upper = eta2 / (t * t);
    Ok(AdvantageWindow {
        lower,
        upper: (upper <= 1.0).then_some(upper),
    })
}

/// Smallest `η₁` giving an advantage at fixed `η₂`.
pub fn advantage_boundary_eta1(r: f64, eta2: f64) -> Result<f64> {
    Ok(advantage_window_eta1(r, eta2)?.lower)
}

/// Bisection on `(0, η₂]`, where the advantage sign flips exactly once.
pub fn bisect_advantage_boundary(r: f64, eta2: f64, tol: f64) -> Result<f64> {
    check_boundary_inputs(r, eta2)?;
    let (mut lo, mut hi) = (0.0, eta2);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if squeezing_excess(r, mid, eta2) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
