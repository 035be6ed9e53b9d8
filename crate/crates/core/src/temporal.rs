//! Temporal-mode expansion of a pulse offset.
//!
//! A Gaussian pulse envelope `g(u)` with intensity rms width `σ = 1/(2Δω)`
//! (so that `Δω` is the rms spectral width) modulated at the carrier `ω₀`
//! defines the fundamental mode `y₀`. Its first Hermite-Gauss companion is
//! `y₁ = (u/σ) g(u) e^{-iω₀u}`, and the timing mode
//! `z₁ = (y₁ + iΩ y₀)/√(Ω²+1)` is the normalized direction of `-dy₀/du`.
//! Shifting `y₀` by a small `Δu` excites `y₀` and `y₁` with first-order
//! amplitudes `1 + iω₀Δu` and `ΔωΔu`.
//!
//! Numerical checks run on a uniform grid with trapezoidal quadrature and are
//! only practical in natural units (ω₀, Δω of order 1-10); the closed forms
//! accept optical-carrier values.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    Gaussian,
    /// Accepted by the closed forms, but no mode family is built for it.
    Rectangular,
}

/// Uniform sampling grid, `points` samples over `±half_span/Δω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub points: usize,
    pub half_span: f64,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            points: 4096,
            half_span: 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    /// Carrier angular frequency, rad/s.
    pub omega0: f64,
    /// rms angular frequency spread, rad/s.
    pub delta_omega: f64,
    pub shape: PulseShape,
    pub grid: QuadratureGrid,
}

impl SpectralProfile {
    pub fn gaussian(omega0: f64, delta_omega: f64) -> Result<Self> {
        let profile = Self {
            omega0,
            delta_omega,
            shape: PulseShape::Gaussian,
            grid: QuadratureGrid::default(),
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn with_grid(mut self, grid: QuadratureGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::param("omega0", format!("{} must be positive", self.omega0)));
        }
        if !(self.delta_omega > 0.0 && self.delta_omega.is_finite()) {
            return Err(Error::param(
                "delta_omega",
                format!("{} must be positive", self.delta_omega),
            ));
        }
        Ok(())
    }

    fn sigma(&self) -> f64 {
        0.5 / self.delta_omega
    }

    fn step(&self) -> f64 {
        2.0 * self.grid.half_span / self.delta_omega / (self.grid.points - 1) as f64
    }

    fn check_grid(&self) -> Result<()> {
        let QuadratureGrid { points, half_span } = self.grid;
        if points < 3 {
            return Err(Error::GridTooCoarse(format!("{points} points")));
        }
        if half_span < 6.0 {
            return Err(Error::GridTooCoarse(format!(
                "half span {half_span}/Δω truncates the envelope"
            )));
        }
        let h = self.step();
        if h > self.sigma() / 4.0 {
            return Err(Error::GridTooCoarse(format!(
                "step {h:.3e} s exceeds a quarter of the envelope width {:.3e} s",
                self.sigma()
            )));
        }
        if h * self.omega0 > std::f64::consts::FRAC_PI_4 {
            return Err(Error::GridTooCoarse(format!(
                "step {h:.3e} s undersamples the carrier at {:.3e} rad/s",
                self.omega0
            )));
        }
        Ok(())
    }

    /// Unit-norm Gaussian envelope.
    fn envelope(&self, u: f64) -> f64 {
        let sigma = self.sigma();
        (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25) * (-u * u / (4.0 * sigma * sigma)).exp()
    }

    fn carrier(&self, u: f64) -> Complex64 {
        Complex64::from_polar(1.0, -self.omega0 * u)
    }

    fn y0_at(&self, u: f64) -> Complex64 {
        self.carrier(u) * self.envelope(u)
    }

    fn y1_at(&self, u: f64) -> Complex64 {
        self.carrier(u) * (u / self.sigma() * self.envelope(u))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingModeParams {
    /// Normalization `1/√(ω₀²+Δω²)`, seconds.
    pub u0: f64,
    /// `Ω = ω₀/Δω`.
    pub big_omega: f64,
    pub omega0: f64,
    pub delta_omega: f64,
}

impl TimingModeParams {
    /// `2/(Ω²+1)`: how far `(Ω²−1)/(Ω²+1)` falls short of one.
    pub fn monochromatic_error(&self) -> f64 {
        2.0 / (self.big_omega * self.big_omega + 1.0)
    }

    /// Weight of `y₀` inside `z₁`, `Ω/√(Ω²+1)`.
    pub fn timing_overlap(&self) -> f64 {
        self.big_omega / (self.big_omega * self.big_omega + 1.0).sqrt()
    }
}

pub fn timing_params(profile: &SpectralProfile) -> Result<TimingModeParams> {
    profile.validate()?;
    let (w0, dw) = (profile.omega0, profile.delta_omega);
    Ok(TimingModeParams {
        u0: 1.0 / w0.hypot(dw),
        big_omega: w0 / dw,
        omega0: w0,
        delta_omega: dw,
    })
}

/// Complex samples of a mode on a uniform light-cone grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFunction {
    pub label: usize,
    pub u_start: f64,
    pub step: f64,
    pub samples: Vec<Complex64>,
}

impl ModeFunction {
    fn sample(label: usize, profile: &SpectralProfile, f: impl Fn(f64) -> Complex64) -> Self {
        let h = profile.step();
        let u_start = -profile.grid.half_span / profile.delta_omega;
        let samples = (0..profile.grid.points)
            .map(|k| f(u_start + k as f64 * h))
            .collect();
        Self {
            label,
            u_start,
            step: h,
            samples,
        }
    }

    pub fn grid_point(&self, k: usize) -> f64 {
        self.u_start + k as f64 * self.step
    }

    /// Trapezoidal `∫ conj(self) · other du`. Both functions must share a grid.
    pub fn inner(&self, other: &ModeFunction) -> Complex64 {
        assert_eq!(self.samples.len(), other.samples.len(), "mismatched grids");
        let last = self.samples.len() - 1;
        let sum: Complex64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .enumerate()
            .map(|(k, (a, b))| {
                let w = if k == 0 || k == last { 0.5 } else { 1.0 };
                a.conj() * b * w
            })
            .sum();
        sum * self.step
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct TimingModes {
    pub y0: ModeFunction,
    pub y1: ModeFunction,
    pub z1: ModeFunction,
}

pub fn mode_functions(profile: &SpectralProfile) -> Result<TimingModes> {
    profile.validate()?;
    if profile.shape != PulseShape::Gaussian {
        return Err(Error::UnsupportedShape(format!("{:?}", profile.shape)));
    }
    profile.check_grid()?;
    let params = timing_params(profile)?;
    let y0 = ModeFunction::sample(0, profile, |u| profile.y0_at(u));
    let y1 = ModeFunction::sample(1, profile, |u| profile.y1_at(u));
    let norm = (params.big_omega * params.big_omega + 1.0).sqrt();
    let z1 = ModeFunction {
        label: 1,
        u_start: y0.u_start,
        step: y0.step,
        samples: y1
            .samples
            .iter()
            .zip(&y0.samples)
            .map(|(a, b)| (a + Complex64::i() * params.big_omega * b) / norm)
            .collect(),
    };
    Ok(TimingModes { y0, y1, z1 })
}

/// First-order mode amplitudes of a pulse carrying `n_photons` shifted by
/// `delta_u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftCoefficients {
    pub c0: Complex64,
    pub c1: Complex64,
    /// `|Δu|/u₀`; the expansion is trustworthy well below 0.1.
    pub offset_ratio: f64,
}

impl ShiftCoefficients {
    pub const VALIDITY_LIMIT: f64 = 0.1;

    pub fn is_first_order_valid(&self) -> bool {
        self.offset_ratio <= Self::VALIDITY_LIMIT
    }
}

pub fn shift_coefficients(
    params: &TimingModeParams,
    n_photons: f64,
    theta: f64,
    delta_u: f64,
) -> Result<ShiftCoefficients> {
    if !(n_photons >= 0.0 && n_photons.is_finite()) {
        return Err(Error::param("n_photons", format!("{n_photons} must be non-negative")));
    }
    let amp = Complex64::from_polar(n_photons.sqrt(), theta);
    Ok(ShiftCoefficients {
        c0: Complex64::new(1.0, params.omega0 * delta_u) * amp,
        c1: amp * (params.delta_omega * delta_u),
        offset_ratio: delta_u.abs() / params.u0,
    })
}

/// Shifts `y₀` by `delta_u`, projects onto `{y₀, y₁}` and returns the largest
/// deviation of the projections from the first-order amplitudes, normalized
/// by the unshifted amplitude. The deviation is `O((Δu/u₀)²)`.
pub fn shift_expansion_check(profile: &SpectralProfile, delta_u: f64) -> Result<f64> {
    let modes = mode_functions(profile)?;
    if delta_u.abs() > profile.grid.half_span / profile.delta_omega / 4.0 {
        return Err(Error::GridTooCoarse(format!(
            "shift {delta_u:e} s moves the pulse off the grid"
        )));
    }
    let shifted = ModeFunction::sample(0, profile, |u| profile.y0_at(u - delta_u));
    let p0 = modes.y0.inner(&shifted);
    let p1 = modes.y1.inner(&shifted);
    let expected = shift_coefficients(&timing_params(profile)?, 1.0, 0.0, delta_u)?;
    Ok((p0 - expected.c0).norm().max((p1 - expected.c1).norm()))
}

/// Least-squares log-log slope of the expansion residual over `points`
/// log-spaced offsets with `Δu/u₀` in `[lo, hi]`.
pub fn residual_slope(profile: &SpectralProfile, lo: f64, hi: f64, points: usize) -> Result<f64> {
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return Err(Error::param("range", "need 0 < lo < hi and at least two points"));
    }
    let u0 = timing_params(profile)?.u0;
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    for k in 0..points {
        let ratio = lo * (hi / lo).powf(k as f64 / (points - 1) as f64);
        let residual = shift_expansion_check(profile, ratio * u0)?;
        xs.push(ratio.ln());
        ys.push(residual.ln());
    }
    let n = points as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn natural() -> SpectralProfile {
        SpectralProfile::gaussian(10.0, 1.0).unwrap()
    }

    #[test]
    fn params_at_optical_scale() {
        let w0 = 2.0 * std::f64::consts::PI * 299_792_458.0 / 815e-9;
        let p = timing_params(&SpectralProfile::gaussian(w0, 2.0 * std::f64::consts::PI * 1e6).unwrap()).unwrap();
        assert_relative_eq!(p.u0, 4.326_702_528_984e-16, max_relative = 1e-11);
        assert_relative_eq!(p.big_omega, 3.678_435_067e8, max_relative = 1e-9);
        assert_relative_eq!(p.u0 * p.u0 * (w0 * w0 + p.delta_omega.powi(2)), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn params_symmetric_and_natural() {
        let p = timing_params(&SpectralProfile::gaussian(3.0, 3.0).unwrap()).unwrap();
        assert_relative_eq!(p.u0, 1.0 / (2f64.sqrt() * 3.0), max_relative = 1e-15);
        assert_eq!(p.big_omega, 1.0);
        let p = timing_params(&natural()).unwrap();
        assert_relative_eq!(p.u0, 1.0 / 101f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn profile_validation() {
        assert!(SpectralProfile::gaussian(0.0, 1.0).is_err());
        assert!(SpectralProfile::gaussian(1.0, -1.0).is_err());
        assert!(SpectralProfile::gaussian(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn modes_are_orthonormal() {
        let m = mode_functions(&natural()).unwrap();
        assert!((m.y0.inner(&m.y0).re - 1.0).abs() < 1e-8);
        assert!((m.y1.inner(&m.y1).re - 1.0).abs() < 1e-8);
        assert!(m.y0.inner(&m.y1).norm() < 1e-8);
        assert!((m.z1.norm() - 1.0).abs() < 1e-8);
        let overlap = m.z1.inner(&m.y0).norm();
        assert!((overlap - 10.0 / 101f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn z1_is_the_normalized_derivative_direction() {
        // -y0'(u) / ‖y0'‖ evaluated by central differences
        let profile = natural();
        let m = mode_functions(&profile).unwrap();
        let norm = 101f64.sqrt();
        let h = 1e-6;
        for k in [1000, 2048, 2500] {
            let u = m.y0.grid_point(k);
            let d = -(profile.y0_at(u + h) - profile.y0_at(u - h)) / (2.0 * h) / norm;
            assert!((d - m.z1.samples[k]).norm() < 1e-7);
        }
    }

    #[test]
    fn unsupported_shape_and_coarse_grid() {
        let mut p = natural();
        p.shape = PulseShape::Rectangular;
        assert!(matches!(mode_functions(&p), Err(Error::UnsupportedShape(_))));
        assert!(timing_params(&p).is_ok());

        let coarse = natural().with_grid(QuadratureGrid { points: 64, half_span: 8.0 });
        assert!(matches!(mode_functions(&coarse), Err(Error::GridTooCoarse(_))));
        let w0 = 2.311e15;
        let optical = SpectralProfile::gaussian(w0, 6.28e6).unwrap();
        assert!(matches!(mode_functions(&optical), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn shift_coefficient_values() {
        let p = timing_params(&natural()).unwrap();
        let c = shift_coefficients(&p, 4.0, 0.3, 0.0).unwrap();
        assert_relative_eq!(c.c0.norm(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(c.c0.arg(), 0.3, max_relative = 1e-15);
        assert_eq!(c.c1.norm(), 0.0);

        let c = shift_coefficients(&p, 1.0, 0.0, 1e-3).unwrap();
        assert_relative_eq!(c.c0.re, 1.0);
        assert_relative_eq!(c.c0.im, 0.01, max_relative = 1e-12);
        assert_relative_eq!(c.c1.re, 1e-3, max_relative = 1e-12);
        assert!(c.is_first_order_valid());

        let w0 = 2.0 * std::f64::consts::PI * 299_792_458.0 / 815e-9;
        let optical = timing_params(&SpectralProfile::gaussian(w0, 2.0 * std::f64::consts::PI * 1e6).unwrap()).unwrap();
        let c = shift_coefficients(&optical, 1e3, 0.0, 1e-17).unwrap();
        assert_relative_eq!(c.c1.re, 1.986_917_653e-9, max_relative = 1e-9);
        assert_relative_eq!(c.c1.norm() / 1e3f64.sqrt(), optical.delta_omega * 1e-17, max_relative = 1e-15);

        let far = shift_coefficients(&p, 1.0, 0.0, 0.5 * p.u0).unwrap();
        assert!(!far.is_first_order_valid());
        assert!(shift_coefficients(&p, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn expansion_residual_behaviour() {
        let profile = natural();
        let u0 = timing_params(&profile).unwrap().u0;
        assert!(shift_expansion_check(&profile, 0.0).unwrap() < 1e-8);
        let r = shift_expansion_check(&profile, 1e-3 * u0).unwrap();
        assert!(r <= 1e-5, "residual {r}");
        let half = shift_expansion_check(&profile, 0.5e-3 * u0).unwrap();
        let ratio = r / half;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn expansion_residual_is_second_order() {
        let slope = residual_slope(&natural(), 1e-4, 1e-2, 9).unwrap();
        assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn shift_off_grid_is_rejected() {
        assert!(shift_expansion_check(&natural(), 5.0).is_err());
    }
}
