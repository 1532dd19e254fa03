//! Probe preparation by sequential non-commutative Gaussian measurements.
//!
//! A thermal state is dephased first in q (uncertainty σ_q) and then in p
//! (uncertainty σ_p), averaged over outcomes, so the mean stays zero. The
//! uncertainties are dimensionless: σ = 1 means the measurement does nothing
//! to the initial probe. The resulting covariance is
//! diag((2n̄+1)/σ_p², (2n̄+1)/σ_q²), physical iff σ_q·σ_p ≤ 2n̄+1.

use crate::gaussian::{
    thermal_occupation, validate_cov, CovarianceMatrix, GaussianState, QuadratureVector,
    ValidityReport,
};
use crate::{Error, Result};

/// Dimensionless measurement uncertainties.
#[derive(Debug, Clone, Copy)]
pub struct MeasurementSettings {
    pub sigma_q: f64,
    pub sigma_p: f64,
}

impl MeasurementSettings {
    pub fn new(sigma_q: f64, sigma_p: f64) -> Result<Self> {
        if !sigma_q.is_finite() || !sigma_p.is_finite() || sigma_q <= 0.0 || sigma_p <= 0.0 {
            return Err(Error::Domain(format!(
                "measurement uncertainties must be positive, got ({sigma_q}, {sigma_p})"
            )));
        }
        Ok(Self { sigma_q, sigma_p })
    }
}

/// Overall scale σ plus dimensionless asymmetry ε ∈ (−1, 1).
#[derive(Debug, Clone, Copy)]
pub struct AsymmetrySettings {
    pub sigma: f64,
    pub epsilon: f64,
}

impl AsymmetrySettings {
    pub fn new(sigma: f64, epsilon: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::Domain(format!("scale must be positive, got {sigma}")));
        }
        if !epsilon.is_finite() || epsilon.abs() >= 1.0 {
            return Err(Error::Domain(format!(
                "asymmetry must satisfy |epsilon| < 1, got {epsilon}"
            )));
        }
        Ok(Self { sigma, epsilon })
    }
}

/// σ_q = σ(1−ε)^{−1/2}, σ_p = σ(1+ε)^{−1/2}.
pub fn settings_from_asymmetry(a: &AsymmetrySettings) -> MeasurementSettings {
    MeasurementSettings {
        sigma_q: a.sigma / (1.0 - a.epsilon).sqrt(),
        sigma_p: a.sigma / (1.0 + a.epsilon).sqrt(),
    }
}

/// Either direct uncertainties or the (σ, ε) parametrization.
#[derive(Debug, Clone, Copy)]
pub enum Settings {
    Direct(MeasurementSettings),
    Asymmetric(AsymmetrySettings),
}

impl Settings {
    pub fn resolve(&self) -> MeasurementSettings {
        match self {
            Settings::Direct(m) => *m,
            Settings::Asymmetric(a) => settings_from_asymmetry(a),
        }
    }
}

/// Thermal occupation plus measurement settings: fully determines the probe.
#[derive(Debug, Clone, Copy)]
pub struct ProbeSpec {
    pub nbar: f64,
    pub settings: Settings,
}

impl ProbeSpec {
    pub fn new(nbar: f64, settings: Settings) -> Result<Self> {
        if !nbar.is_finite() || nbar < 0.0 {
            return Err(Error::Domain(format!(
                "thermal occupation must be nonnegative, got {nbar}"
            )));
        }
        Ok(Self { nbar, settings })
    }

    /// Builds the spec from inverse temperature and frequency.
    pub fn from_beta_omega(beta: f64, omega: f64, settings: Settings) -> Result<Self> {
        Ok(Self {
            nbar: thermal_occupation(beta, omega)?,
            settings,
        })
    }
}

/// Post-measurement covariance diag((2n̄+1)/σ_p², (2n̄+1)/σ_q²).
///
/// The q-measurement broadens p and vice versa, hence the crossed indices.
/// Means are untouched by the outcome-averaged measurements.
pub fn probe_cov(nbar: f64, m: &MeasurementSettings) -> Result<CovarianceMatrix> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::Domain(format!(
            "thermal occupation must be nonnegative, got {nbar}"
        )));
    }
    if m.sigma_q <= 0.0 || m.sigma_p <= 0.0 {
        return Err(Error::Domain(
            "measurement uncertainties must be positive".into(),
        ));
    }
    let c = 2.0 * nbar + 1.0;
    Ok(CovarianceMatrix::diagonal(
        c / (m.sigma_p * m.sigma_p),
        c / (m.sigma_q * m.sigma_q),
    ))
}

/// A prepared probe with its uncertainty-bound verdict attached.
///
/// Sweeps keep evaluating flagged grid points instead of aborting, so the
/// violation is carried as data rather than raised as an error.
#[derive(Debug, Clone, Copy)]
pub struct PreparedProbe {
    pub state: GaussianState,
    pub validity: ValidityReport,
}

/// Prepares the probe state for a spec; zero mean, covariance per [`probe_cov`].
pub fn prepare_probe(spec: &ProbeSpec) -> Result<PreparedProbe> {
    let settings = spec.settings.resolve();
    let cov = probe_cov(spec.nbar, &settings)?;
    let validity = validate_cov(&cov)?;
    Ok(PreparedProbe {
        state: GaussianState::new(QuadratureVector::zero(), cov),
        validity,
    })
}

/// Result of the probe uncertainty-bound check σ_q·σ_p ≤ 2n̄+1.
#[derive(Debug, Clone, Copy)]
pub struct ProbeValidity {
    pub ok: bool,
    pub product: f64,
    pub bound: f64,
}

/// Checks σ_q·σ_p ≤ (2n̄+1)(1 + tol) without constructing the state.
pub fn validate_probe(spec: &ProbeSpec) -> ProbeValidity {
    let settings = spec.settings.resolve();
    let product = settings.sigma_q * settings.sigma_p;
    let bound = 2.0 * spec.nbar + 1.0;
    ProbeValidity {
        ok: product <= bound * (1.0 + 1e-12),
        product,
        bound,
    }
}
