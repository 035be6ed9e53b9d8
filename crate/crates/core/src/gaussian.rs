//! Gaussian-state engine used as the brute-force oracle for the closed-form
//! photocurrent variances.
//!
//! States are stored as a mean vector and covariance matrix over the
//! quadrature ordering `x1, p1, x2, p2, ...` with ħ = 2, so the vacuum has
//! identity covariance. Every operation consumes the state and returns the
//! transformed one, which keeps oracle chains readable:
//!
//! ```
//! use tmsv_sync::gaussian::{GaussianState, HomodynePattern, VacuumPolicy};
//!
//! let r = 0.5;
//! let var = GaussianState::two_mode_squeezed(r)
//!     .unwrap()
//!     .pure_loss(0, 0.9, VacuumPolicy::Shared(0))
//!     .unwrap()
//!     .pure_loss(1, 0.8, VacuumPolicy::Shared(0))
//!     .unwrap()
//!     .homodyne_variance(&HomodynePattern::x(vec![1.0, 1.0]).unwrap())
//!     .unwrap();
//! assert!(var > 0.0);
//! ```

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};

/// How a loss channel's vacuum port is populated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VacuumPolicy {
    /// Each channel mixes in its own fresh vacuum mode through a physical beam
    /// splitter.
    Independent,
    /// All channels carrying the same tag reference one common vacuum mode.
    /// The ancilla is left untouched, so the map is linear but not
    /// symplectic: the cross-correlation it induces between the lossy modes
    /// can violate the uncertainty relation.
    Shared(u32),
}

impl VacuumPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            VacuumPolicy::Independent => "independent",
            VacuumPolicy::Shared(_) => "shared",
        }
    }
}

/// Mean vector and covariance matrix of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    shared_vacua: Vec<(u32, usize)>,
}

/// Linear combination of the same rotated quadrature across modes.
#[derive(Debug, Clone, PartialEq)]
pub struct HomodynePattern {
    coefficients: Vec<f64>,
    phase: f64,
}

impl HomodynePattern {
    /// `phase` = 0 measures X, π/2 measures P.
    pub fn new(coefficients: Vec<f64>, phase: f64) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().all(|c| *c == 0.0) {
            return Err(Error::param(
                "coefficients",
                "homodyne pattern needs at least one nonzero coefficient",
            ));
        }
        if coefficients.iter().any(|c| !c.is_finite()) || !phase.is_finite() {
            return Err(Error::param("coefficients", "non-finite pattern entry"));
        }
        Ok(Self {
            coefficients,
            phase,
        })
    }

    pub fn x(coefficients: Vec<f64>) -> Result<Self> {
        Self::new(coefficients, 0.0)
    }

    pub fn p(coefficients: Vec<f64>) -> Result<Self> {
        Self::new(coefficients, FRAC_PI_2)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }
}

/// Standard symplectic form for the interleaved `x, p` ordering.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

impl GaussianState {
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::param("n_modes", "a state needs at least one mode"));
        }
        Ok(Self {
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes),
            shared_vacua: Vec::new(),
        })
    }

    /// Two-mode squeezed vacuum built the way the transmitter does it: an
    /// X-squeezed and a P-squeezed mode mixed on a balanced beam splitter.
    /// With this orientation the summed X quadrature carries variance
    /// `2 e^{-2r}`.
    pub fn two_mode_squeezed(r: f64) -> Result<Self> {
        Self::vacuum(2)?
            .squeeze(0, r, 0.0)?
            .squeeze(1, r, FRAC_PI_2)?
            .beam_splitter(0, 1, 0.5)
    }

    /// Builds a state from raw moments. The covariance must be square,
    /// symmetric and match the mean's dimension.
    pub fn from_moments(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::param("mean", "length must be a positive even number"));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::param("cov", format!("expected {dim}x{dim}")));
        }
        let scale = cov.amax().max(1.0);
        if (&cov - cov.transpose()).amax() > 1e-12 * scale {
            return Err(Error::param("cov", "covariance is not symmetric"));
        }
        Ok(Self {
            mean,
            cov,
            shared_vacua: Vec::new(),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// The 2x2 covariance block of one mode.
    pub fn mode_cov(&self, mode: usize) -> Result<DMatrix<f64>> {
        self.check_mode(mode)?;
        Ok(self.cov.view((2 * mode, 2 * mode), (2, 2)).into_owned())
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            Err(Error::ModeOutOfRange {
                index: mode,
                n_modes: self.n_modes(),
            })
        } else {
            Ok(())
        }
    }

    /// Applies `mean -> T mean`, `cov -> T cov Tᵀ`.
    fn transform(mut self, t: &DMatrix<f64>) -> Self {
        self.mean = t * &self.mean;
        self.cov = t * &self.cov * t.transpose();
        // Re-symmetrize to keep rounding from accumulating asymmetry.
        self.cov = (&self.cov + self.cov.transpose()) * 0.5;
        self
    }

    /// Shifts the mean of one mode by `(dx, dp)`.
    pub fn displace(mut self, mode: usize, dx: f64, dp: f64) -> Result<Self> {
        self.check_mode(mode)?;
        self.mean[2 * mode] += dx;
        self.mean[2 * mode + 1] += dp;
        Ok(self)
    }

    /// Single-mode squeezing. `angle` orients the squeezed quadrature: 0
    /// squeezes X to `e^{-2r}`, π/2 squeezes P.
    pub fn squeeze(self, mode: usize, r: f64, angle: f64) -> Result<Self> {
        self.check_mode(mode)?;
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::param(
                "r",
                format!("{r} must be finite and non-negative; use `angle` for direction"),
            ));
        }
        let (s, c) = angle.sin_cos();
        let (sq, asq) = ((-r).exp(), r.exp());
        // R(angle) diag(e^{-r}, e^{r}) R(angle)ᵀ
        let local = [
            [c * c * sq + s * s * asq, c * s * (sq - asq)],
            [c * s * (sq - asq), s * s * sq + c * c * asq],
        ];
        let n = self.n_modes();
        let mut t = DMatrix::identity(2 * n, 2 * n);
        for (i, row) in local.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t[(2 * mode + i, 2 * mode + j)] = *v;
            }
        }
        Ok(self.transform(&t))
    }

    /// Beam splitter with transmissivity `eta` acting identically on the X
    /// and P quadratures:
    ///
    /// ```text
    /// m1' =  √η m1 − √(1−η) m2
    /// m2' = √(1−η) m1 + √η m2
    /// ```
    pub fn beam_splitter(self, m1: usize, m2: usize, eta: f64) -> Result<Self> {
        self.check_mode(m1)?;
        self.check_mode(m2)?;
        if m1 == m2 {
            return Err(Error::param("m2", "beam splitter needs two distinct modes"));
        }
        let eta = check_unit("eta", eta)?;
        let t = self.two_port_matrix(m1, m2, eta, true);
        Ok(self.transform(&t))
    }

    /// Embeds the beam-splitter coefficients. When `touch_second` is false
    /// the second mode's rows are left as identity, which is the linear map
    /// used for a shared vacuum reference.
    fn two_port_matrix(&self, m1: usize, m2: usize, eta: f64, touch_second: bool) -> DMatrix<f64> {
        let n = self.n_modes();
        let (t, l) = (eta.sqrt(), (1.0 - eta).sqrt());
        let mut m = DMatrix::identity(2 * n, 2 * n);
        for q in 0..2 {
            let (a, b) = (2 * m1 + q, 2 * m2 + q);
            m[(a, a)] = t;
            m[(a, b)] = -l;
            if touch_second {
                m[(b, a)] = l;
                m[(b, b)] = t;
            }
        }
        m
    }

    fn with_vacuum_ancilla(mut self) -> (Self, usize) {
        let n = self.n_modes();
        let mut mean = DVector::zeros(2 * n + 2);
        mean.rows_mut(0, 2 * n).copy_from(&self.mean);
        let mut cov = DMatrix::identity(2 * n + 2, 2 * n + 2);
        cov.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&self.cov);
        self.mean = mean;
        self.cov = cov;
        (self, n)
    }

    /// Pure-loss channel of transmissivity `eta` on one mode. The vacuum
    /// ancilla is appended to the state and kept, so later homodyne patterns
    /// see any correlations it carries.
    pub fn pure_loss(self, mode: usize, eta: f64, policy: VacuumPolicy) -> Result<Self> {
        self.check_mode(mode)?;
        let eta = check_unit("eta", eta)?;
        match policy {
            VacuumPolicy::Independent => {
                let (state, ancilla) = self.with_vacuum_ancilla();
                state.beam_splitter(mode, ancilla, eta)
            }
            VacuumPolicy::Shared(tag) => {
                let existing = self
                    .shared_vacua
                    .iter()
                    .find(|(t, _)| *t == tag)
                    .map(|(_, m)| *m);
                let (mut state, ancilla) = match existing {
                    Some(ancilla) => {
                        if ancilla == mode {
                            return Err(Error::param(
                                "mode",
                                "cannot route a mode's loss through itself",
                            ));
                        }
                        if !self.is_undisturbed_vacuum(ancilla) {
                            return Err(Error::SharedVacuumDisturbed { tag, mode: ancilla });
                        }
                        (self, ancilla)
                    }
                    None => {
                        let (mut state, ancilla) = self.with_vacuum_ancilla();
                        state.shared_vacua.push((tag, ancilla));
                        (state, ancilla)
                    }
                };
                let t = state.two_port_matrix(mode, ancilla, eta, false);
                let vacua = std::mem::take(&mut state.shared_vacua);
                let mut state = state.transform(&t);
                state.shared_vacua = vacua;
                Ok(state)
            }
        }
    }

    fn is_undisturbed_vacuum(&self, mode: usize) -> bool {
        let (i, j) = (2 * mode, 2 * mode + 1);
        let tol = 1e-12;
        self.mean[i].abs() < tol
            && self.mean[j].abs() < tol
            && (self.cov[(i, i)] - 1.0).abs() < tol
            && (self.cov[(j, j)] - 1.0).abs() < tol
            && self.cov[(i, j)].abs() < tol
    }

    fn pattern_vector(&self, pattern: &HomodynePattern) -> Result<DVector<f64>> {
        let n = self.n_modes();
        if pattern.coefficients.len() > n {
            return Err(Error::param(
                "coefficients",
                format!(
                    "pattern has {} entries but the state has {n} modes",
                    pattern.coefficients.len()
                ),
            ));
        }
        let (s, c) = pattern.phase.sin_cos();
        let mut v = DVector::zeros(2 * n);
        for (k, coef) in pattern.coefficients.iter().enumerate() {
            v[2 * k] = coef * c;
            v[2 * k + 1] = coef * s;
        }
        Ok(v)
    }

    /// Variance of `Σ c_k (cos φ x_k + sin φ p_k)`. Patterns shorter than the
    /// mode count are zero-padded, so appended ancillas need not be listed.
    pub fn homodyne_variance(&self, pattern: &HomodynePattern) -> Result<f64> {
        let v = self.pattern_vector(pattern)?;
        Ok((v.transpose() * &self.cov * &v)[(0, 0)])
    }

    pub fn homodyne_mean(&self, pattern: &HomodynePattern) -> Result<f64> {
        let v = self.pattern_vector(pattern)?;
        Ok(v.dot(&self.mean))
    }

    /// Smallest eigenvalue of `cov + iΩ`, computed on its real symmetric
    /// embedding. Physical states have this ≥ 0.
    pub fn min_uncertainty_eigenvalue(&self) -> f64 {
        let dim = self.cov.nrows();
        let omega = symplectic_form(self.n_modes());
        let mut embed = DMatrix::zeros(2 * dim, 2 * dim);
        embed.view_mut((0, 0), (dim, dim)).copy_from(&self.cov);
        embed.view_mut((dim, dim), (dim, dim)).copy_from(&self.cov);
        embed.view_mut((0, dim), (dim, dim)).copy_from(&(-&omega));
        embed.view_mut((dim, 0), (dim, dim)).copy_from(&omega);
        SymmetricEigen::new(embed).eigenvalues.min()
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.min_uncertainty_eigenvalue() >= -tol
    }
}
