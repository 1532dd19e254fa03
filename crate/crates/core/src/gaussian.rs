//! Value types and elementary functionals for single-mode Gaussian states.
//!
//! Convention: ℏ = m = ω = 1 and the covariance matrix is normalized so the
//! vacuum is the identity. A thermal state with mean occupation n̄ then has
//! Σ = (2n̄ + 1)·I, and 2n̄ + 1 = coth(βω/2) bridges to inverse temperature.

use crate::linalg::Mat2;
use crate::{Error, Result};

/// Tolerance on the Robertson–Schrödinger bound det Σ ≥ 1; minimum-uncertainty
/// states sit exactly on the boundary up to float round-off.
pub const COV_TOL: f64 = 1e-12;

/// First statistical moments (q, p) of a single mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureVector {
    pub q: f64,
    pub p: f64,
}

impl QuadratureVector {
    pub const fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.p.is_finite()
    }

    pub fn norm_sq(&self) -> f64 {
        self.q * self.q + self.p * self.p
    }
}

/// Second statistical moments. Only the upper triangle is stored; s21 ≡ s12.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
}

impl CovarianceMatrix {
    pub const fn new(s11: f64, s12: f64, s22: f64) -> Self {
        Self { s11, s12, s22 }
    }

    pub const fn diagonal(s11: f64, s22: f64) -> Self {
        Self::new(s11, 0.0, s22)
    }

    pub const fn identity() -> Self {
        Self::diagonal(1.0, 1.0)
    }

    pub const fn scaled_identity(a: f64) -> Self {
        Self::diagonal(a, a)
    }

    pub fn det(&self) -> f64 {
        self.s11 * self.s22 - self.s12 * self.s12
    }

    pub fn trace(&self) -> f64 {
        self.s11 + self.s22
    }

    pub fn is_finite(&self) -> bool {
        self.s11.is_finite() && self.s12.is_finite() && self.s22.is_finite()
    }

    /// The q↔p relabeling (s11 ↔ s22).
    pub fn swap_qp(&self) -> Self {
        Self::new(self.s22, self.s12, self.s11)
    }

    pub fn to_mat2(&self) -> Mat2 {
        Mat2::new(self.s11, self.s12, self.s12, self.s22)
    }

    /// Symmetrizes a general 2×2 matrix into covariance storage.
    pub fn from_mat2_symmetric(m: &Mat2) -> Self {
        Self::new(m.m11, 0.5 * (m.m12 + m.m21), m.m22)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.s11 + o.s11, self.s12 + o.s12, self.s22 + o.s22)
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let d = self.det();
        if !d.is_finite() || d.abs() < 1e-300 {
            return Err(Error::Numerical(format!(
                "covariance matrix is singular (det = {d})"
            )));
        }
        Ok(Mat2::new(self.s22 / d, -self.s12 / d, -self.s12 / d, self.s11 / d))
    }
}

/// A single-mode Gaussian state, fully described by its moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub mean: QuadratureVector,
    pub cov: CovarianceMatrix,
}

impl GaussianState {
    pub const fn new(mean: QuadratureVector, cov: CovarianceMatrix) -> Self {
        Self { mean, cov }
    }

    pub const fn vacuum() -> Self {
        Self::new(QuadratureVector::zero(), CovarianceMatrix::identity())
    }

    pub fn is_finite(&self) -> bool {
        self.mean.is_finite() && self.cov.is_finite()
    }
}

/// The symplectic form Ω with Ω₁₂ = 1, Ω₂₁ = −1.
pub struct SymplecticForm;

impl SymplecticForm {
    pub const fn matrix() -> Mat2 {
        Mat2::new(0.0, 1.0, -1.0, 0.0)
    }
}

/// Outcome of the uncertainty-bound check on a covariance matrix.
#[derive(Debug, Clone, Copy)]
pub struct ValidityReport {
    pub physical: bool,
    /// det Σ − 1; negative values beyond [`COV_TOL`] are violations.
    pub det_margin: f64,
}

/// Mean thermal occupation n̄ = 1/(e^{βω} − 1), so that 2n̄ + 1 = coth(βω/2).
pub fn thermal_occupation(beta: f64, omega: f64) -> Result<f64> {
    if !beta.is_finite() || !omega.is_finite() || beta <= 0.0 || omega <= 0.0 {
        return Err(Error::Domain(format!(
            "thermal occupation requires beta > 0 and omega > 0, got beta = {beta}, omega = {omega}"
        )));
    }
    Ok(1.0 / (beta * omega).exp_m1())
}

/// Thermal state: zero mean, Σ = (2n̄ + 1)·I.
pub fn make_thermal(nbar: f64) -> Result<GaussianState> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::Domain(format!(
            "thermal occupation must be nonnegative, got {nbar}"
        )));
    }
    Ok(GaussianState::new(
        QuadratureVector::zero(),
        CovarianceMatrix::scaled_identity(2.0 * nbar + 1.0),
    ))
}

/// Checks positivity and the uncertainty bound det Σ ≥ 1 − [`COV_TOL`].
pub fn validate_cov(cov: &CovarianceMatrix) -> Result<ValidityReport> {
    if !cov.is_finite() {
        return Err(Error::Malformed(format!(
            "covariance entries must be finite, got ({}, {}, {})",
            cov.s11, cov.s12, cov.s22
        )));
    }
    let margin = cov.det() - 1.0;
    Ok(ValidityReport {
        physical: cov.s11 > 0.0 && margin >= -COV_TOL,
        det_margin: margin,
    })
}

fn require_physical(cov: &CovarianceMatrix) -> Result<()> {
    let report = validate_cov(cov)?;
    if !report.physical {
        return Err(Error::UnphysicalState(format!(
            "det Sigma = {} violates the uncertainty bound",
            cov.det()
        )));
    }
    Ok(())
}

/// Symplectic eigenvalue ν = sqrt(det Σ); ν ≥ 1 for physical states.
pub fn symplectic_eigenvalue(cov: &CovarianceMatrix) -> Result<f64> {
    require_physical(cov)?;
    Ok(cov.det().sqrt())
}

/// Purity (det Σ)^{−1/2}; 1 exactly for pure states.
pub fn purity(state: &GaussianState) -> Result<f64> {
    let nu = symplectic_eigenvalue(&state.cov)?;
    Ok(1.0 / nu)
}

/// Von Neumann entropy (nats) of a state with symplectic eigenvalue ν.
///
/// Evaluated as ((ν−1)/2)·ln(1 + 2/(ν−1)) + ln((ν+1)/2), which is stable for
/// large ν and goes to 0 in the ν → 1 limit.
pub fn entropy_from_symplectic(nu: f64) -> f64 {
    if nu - 1.0 < COV_TOL {
        return 0.0;
    }
    let xm = 0.5 * (nu - 1.0);
    let xp = 0.5 * (nu + 1.0);
    xm * (1.0 / xm).ln_1p() + xp.ln()
}

/// Entropy (nats) of a thermal state with mean occupation n̄:
/// (n̄+1)·ln(n̄+1) − n̄·ln n̄, with the n̄ → 0 limit taken as 0.
pub fn thermal_entropy(nbar: f64) -> f64 {
    if nbar < 0.5 * COV_TOL {
        return 0.0;
    }
    nbar * (1.0 / nbar).ln_1p() + nbar.ln_1p()
}

/// Von Neumann entropy of a Gaussian state in nats.
pub fn von_neumann_entropy(state: &GaussianState) -> Result<f64> {
    let nu = symplectic_eigenvalue(&state.cov)?;
    Ok(entropy_from_symplectic(nu))
}

/// Uhlmann fidelity between two single-mode Gaussian states.
///
/// F = 2/(√(Δ+δ) − √δ) · exp[−½ Δd⃗ᵀ(Σ_a+Σ_b)^{−1} Δd⃗] with
/// Δ = det(Σ_a+Σ_b) and δ = (det Σ_a − 1)(det Σ_b − 1). The difference of
/// square roots is evaluated as Δ/(√(Δ+δ) + √δ) to avoid cancellation.
pub fn fidelity(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    require_physical(&a.cov)?;
    require_physical(&b.cov)?;
    if !a.mean.is_finite() || !b.mean.is_finite() {
        return Err(Error::Malformed("state means must be finite".into()));
    }
    let sum = a.cov.add(&b.cov);
    let big = sum.det();
    // Round-off can push det − 1 of a minimum-uncertainty state slightly
    // negative; the product is then a spurious tiny negative.
    let small = ((a.cov.det() - 1.0) * (b.cov.det() - 1.0)).max(0.0);
    let s_plus = (big + small).sqrt();
    let s_minus = small.sqrt();
    if !s_plus.is_finite() || big <= 0.0 {
        return Err(Error::Numerical(format!(
            "singular covariance sum in fidelity (det = {big})"
        )));
    }
    let denom = big / (s_plus + s_minus);
    let dd = [a.mean.q - b.mean.q, a.mean.p - b.mean.p];
    let inv = sum.inverse()?;
    let w = inv.mul_vec(dd);
    let quad = dd[0] * w[0] + dd[1] * w[1];
    let f = 2.0 / denom * (-0.5 * quad).exp();
    if !f.is_finite() {
        return Err(Error::Numerical("fidelity evaluated to a non-finite value".into()));
    }
    Ok(f)
}

/// Bures distance d = √2·√(1 − √F).
pub fn bures_distance(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    let f = fidelity(a, b)?;
    Ok(std::f64::consts::SQRT_2 * (1.0 - f.sqrt()).max(0.0).sqrt())
}
