//! Quantum Fisher information three ways.
//!
//! For a differentiable family θ ↦ ρ_θ of single-mode Gaussian states the QFI
//! splits into three terms,
//!
//! ```text
//! I(θ) = Tr[(Σ⁻¹Σ')²] / (2(1+P²)) + 2(P')²/(1−P⁴) + d'ᵀ Σ⁻¹ d',
//! ```
//!
//! with P = (det Σ)^{−1/2} the purity. [`qfi_generic`] evaluates this from
//! analytic or finite-difference derivatives; [`qfi_bures`] estimates the same
//! quantity from the fidelity between neighbouring states; and the
//! channel-specific closed forms ([`qfi_att_phi`], [`qfi_att_mbar`],
//! [`qfi_amp_rg`], [`qfi_amp_mbar`]) evaluate the symplectic-eigenvalue
//! expressions for the attenuator and amplifier. The three routes are
//! independent and are cross-checked against each other in the tests.

use crate::gaussian::{fidelity, validate_cov, CovarianceMatrix, GaussianState, QuadratureVector};
use crate::linalg::Mat2;
use crate::{Error, Result};

/// Derivatives of the moments of a state family at one parameter value.
#[derive(Debug, Clone, Copy)]
pub struct StateDerivative {
    pub dcov: Mat2,
    pub dmean: QuadratureVector,
}

type EvalFn = dyn Fn(f64) -> GaussianState + Send + Sync;
type DerivFn = dyn Fn(f64) -> StateDerivative + Send + Sync;

/// A differentiable map θ ↦ GaussianState with optional analytic derivatives.
///
/// Evaluation closures must be re-entrant; families built here hold no
/// mutable state and may be shared across sweep workers.
pub struct StateFamily {
    parameter: String,
    eval: Box<EvalFn>,
    analytic: Option<Box<DerivFn>>,
}

impl StateFamily {
    pub fn new(
        parameter: impl Into<String>,
        eval: impl Fn(f64) -> GaussianState + Send + Sync + 'static,
    ) -> Self {
        Self {
            parameter: parameter.into(),
            eval: Box::new(eval),
            analytic: None,
        }
    }

    pub fn with_analytic(
        mut self,
        derivative: impl Fn(f64) -> StateDerivative + Send + Sync + 'static,
    ) -> Self {
        self.analytic = Some(Box::new(derivative));
        self
    }

    pub fn parameter(&self) -> &str {
        &self.parameter
    }

    pub fn has_analytic(&self) -> bool {
        self.analytic.is_some()
    }

    pub fn state_at(&self, theta: f64) -> GaussianState {
        (self.eval)(theta)
    }

    /// Analytic derivative when available, otherwise central differences with
    /// step h = step·max(|θ|, 1).
    pub fn derivative_at(&self, theta: f64, step: f64) -> StateDerivative {
        if let Some(d) = &self.analytic {
            return d(theta);
        }
        let h = step * theta.abs().max(1.0);
        let plus = self.state_at(theta + h);
        let minus = self.state_at(theta - h);
        let inv = 0.5 / h;
        StateDerivative {
            dcov: Mat2::new(
                (plus.cov.s11 - minus.cov.s11) * inv,
                (plus.cov.s12 - minus.cov.s12) * inv,
                (plus.cov.s12 - minus.cov.s12) * inv,
                (plus.cov.s22 - minus.cov.s22) * inv,
            ),
            dmean: QuadratureVector::new(
                (plus.mean.q - minus.mean.q) * inv,
                (plus.mean.p - minus.mean.p) * inv,
            ),
        }
    }
}

/// The three additive contributions to the generic QFI.
#[derive(Debug, Clone, Copy)]
pub struct QfiBreakdown {
    pub term_cov: f64,
    pub term_purity: f64,
    pub term_mean: f64,
    pub total: f64,
}

/// Default relative finite-difference step for moment derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Generic single-mode QFI from the moment formula.
///
/// The purity term has a removable singularity at P = 1: when both |P − 1|
/// and |P'| are below 1e−9 it is evaluated as 0; a pure state whose purity
/// actually changes is reported as an error instead of emitting NaN.
pub fn qfi_generic(f: &StateFamily, theta: f64, step: f64) -> Result<QfiBreakdown> {
    let state = f.state_at(theta);
    let report = validate_cov(&state.cov)?;
    if !report.physical {
        return Err(Error::UnphysicalState(format!(
            "family '{}' is unphysical at theta = {theta} (det margin {})",
            f.parameter, report.det_margin
        )));
    }
    let d = f.derivative_at(theta, step);
    if !d.dcov.is_finite() || !d.dmean.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite moment derivative at theta = {theta}"
        )));
    }

    let inv = state.cov.inverse()?;
    let m = inv.mul(&d.dcov);
    let tr_m2 = m.mul(&m).trace();

    let det = state.cov.det();
    let p = 1.0 / det.sqrt();
    let ddet = d.dcov.m11 * state.cov.s22 + state.cov.s11 * d.dcov.m22
        - 2.0 * state.cov.s12 * 0.5 * (d.dcov.m12 + d.dcov.m21);
    let dp = -0.5 * ddet / (det * det.sqrt());

    let term_cov = 0.5 * tr_m2 / (1.0 + p * p);
    let term_purity = if (p - 1.0).abs() < 1e-9 {
        if dp.abs() < 1e-9 {
            0.0
        } else {
            return Err(Error::PureStateSingularity { purity_derivative: dp });
        }
    } else {
        2.0 * dp * dp / (1.0 - p.powi(4))
    };

    let dd = [d.dmean.q, d.dmean.p];
    let w = inv.mul_vec(dd);
    let term_mean = dd[0] * w[0] + dd[1] * w[1];

    let total = term_cov + term_purity + term_mean;
    if !total.is_finite() {
        return Err(Error::Numerical(format!(
            "QFI evaluated to a non-finite value at theta = {theta}"
        )));
    }
    Ok(QfiBreakdown {
        term_cov,
        term_purity,
        term_mean,
        total,
    })
}

fn bures_estimate(f: &StateFamily, theta: f64, tau: f64) -> Result<f64> {
    let here = f.state_at(theta);
    let there = f.state_at(theta + tau);
    let fid = fidelity(&here, &there)?;
    Ok(8.0 * (1.0 - fid.sqrt()) / (tau * tau))
}

/// Bures finite-difference QFI: 8(1 − √F(ρ_θ, ρ_{θ+τ}))/τ² with one
/// Richardson extrapolation step over (τ, τ/2).
pub fn qfi_bures(f: &StateFamily, theta: f64, tau: f64) -> Result<f64> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    Ok(2.0 * bures_estimate(f, theta, 0.5 * tau)? - bures_estimate(f, theta, tau)?)
}

/// [`qfi_bures`] with self-scaled step selection.
///
/// A pilot estimate at τ = 1e−3 sets a step at which the fidelity drop is
/// ≈ 3e−11: large enough to stand clear of round-off, small enough to stay
/// in the quadratic regime even near QFI divergences. The returned value is
/// the median of three estimates around that step.
pub fn qfi_bures_auto(f: &StateFamily, theta: f64) -> Result<f64> {
    let pilot = qfi_bures(f, theta, 1e-3)?;
    if pilot.abs() < 1e-8 {
        return Ok(pilot);
    }
    let tau = (8.0 * 3e-11 / pilot.abs()).sqrt().clamp(1e-8, 0.05);
    let mut candidates = [
        qfi_bures(f, theta, 0.8 * tau)?,
        qfi_bures(f, theta, tau)?,
        qfi_bures(f, theta, 1.25 * tau)?,
    ];
    candidates.sort_by(|a, b| a.total_cmp(b));
    Ok(candidates[1])
}

/// Symplectic eigenvalues of the state after the attenuator.
#[derive(Debug, Clone, Copy)]
pub struct AttenuatorEigenvalues {
    pub nu1: f64,
    pub nu2: f64,
}

impl AttenuatorEigenvalues {
    pub fn product(&self) -> f64 {
        self.nu1 * self.nu2
    }
}

/// Symplectic eigenvalues of the state after the amplifier.
#[derive(Debug, Clone, Copy)]
pub struct AmplifierEigenvalues {
    pub mu1: f64,
    pub mu2: f64,
}

impl AmplifierEigenvalues {
    pub fn product(&self) -> f64 {
        self.mu1 * self.mu2
    }
}

/// ν₁ = (2n̄+1)cos²φ/σ_p² + (2m̄+1)sin²φ and ν₂ with σ_q.
pub fn att_eigenvalues(
    phi: f64,
    mbar: f64,
    nbar: f64,
    sigma_q: f64,
    sigma_p: f64,
) -> AttenuatorEigenvalues {
    let c = 2.0 * nbar + 1.0;
    let cos2 = phi.cos().powi(2);
    let sin2 = phi.sin().powi(2);
    let env = (2.0 * mbar + 1.0) * sin2;
    AttenuatorEigenvalues {
        nu1: c * cos2 / (sigma_p * sigma_p) + env,
        nu2: c * cos2 / (sigma_q * sigma_q) + env,
    }
}

/// μ₁ = (2n̄+1)cosh²r_g/σ_p² + (2m̄+1)sinh²r_g and μ₂ with σ_q.
pub fn amp_eigenvalues(
    rg: f64,
    mbar: f64,
    nbar: f64,
    sigma_q: f64,
    sigma_p: f64,
) -> AmplifierEigenvalues {
    let c = 2.0 * nbar + 1.0;
    let cosh2 = rg.cosh().powi(2);
    let sinh2 = rg.sinh().powi(2);
    let env = (2.0 * mbar + 1.0) * sinh2;
    AmplifierEigenvalues {
        mu1: c * cosh2 / (sigma_p * sigma_p) + env,
        mu2: c * cosh2 / (sigma_q * sigma_q) + env,
    }
}

/// Closed-form QFI for estimating the attenuator angle φ.
///
/// Returns 0 where the sin(2φ) prefactor vanishes; on the ν₁ν₂ = 1 boundary
/// with a nonvanishing numerator the IEEE division yields +∞, which is the
/// flagged-divergence convention used throughout.
pub fn qfi_att_phi(phi: f64, mbar: f64, nbar: f64, sigma_q: f64, sigma_p: f64) -> f64 {
    let s2 = (2.0 * phi).sin().powi(2);
    if s2 == 0.0 {
        return 0.0;
    }
    let c = 2.0 * nbar + 1.0;
    let hp = (2.0 * mbar + 1.0) - c / (sigma_p * sigma_p);
    let hq = (2.0 * mbar + 1.0) - c / (sigma_q * sigma_q);
    let ev = att_eigenvalues(phi, mbar, nbar, sigma_q, sigma_p);
    let (n1, n2) = (ev.nu1, ev.nu2);
    let prod = n1 * n2;
    let t1 = (n2 * n2 * hp * hp + n1 * n1 * hq * hq) / (prod * (prod + 1.0));
    let t2 = (hq * n1 + hp * n2).powi(2) / (prod * (prod * prod - 1.0));
    0.5 * s2 * (t1 + t2)
}

/// Which form of the attenuator-m̄ closed expression to evaluate.
///
/// `AsPrinted` reproduces the expression with the second denominator
/// ν₁²ν₂² − 1; `Corrected` carries the extra ν₁ν₂ factor, matching both the
/// generic moment formula and the amplifier analogue. Only `Corrected` is
/// consistent with the other two QFI routes; `AsPrinted` is kept for
/// regression visibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttMbarVariant {
    Corrected,
    AsPrinted,
}

/// Closed-form QFI for estimating the attenuator environment occupation m̄.
pub fn qfi_att_mbar(
    phi: f64,
    mbar: f64,
    nbar: f64,
    sigma_q: f64,
    sigma_p: f64,
    variant: AttMbarVariant,
) -> f64 {
    let s4 = phi.sin().powi(4);
    if s4 == 0.0 {
        return 0.0;
    }
    let ev = att_eigenvalues(phi, mbar, nbar, sigma_q, sigma_p);
    let (n1, n2) = (ev.nu1, ev.nu2);
    let prod = n1 * n2;
    let t1 = (n1 * n1 + n2 * n2) / (prod * (prod + 1.0));
    let denom2 = match variant {
        AttMbarVariant::Corrected => prod * (prod * prod - 1.0),
        AttMbarVariant::AsPrinted => prod * prod - 1.0,
    };
    let t2 = (n1 + n2).powi(2) / denom2;
    2.0 * s4 * (t1 + t2)
}

/// Closed-form QFI for estimating the amplifier squeezing r_g.
///
/// Tends to the constant 4 as r_g → ∞ for any valid probe.
pub fn qfi_amp_rg(rg: f64, mbar: f64, nbar: f64, sigma_q: f64, sigma_p: f64) -> f64 {
    let s2 = (2.0 * rg).sinh().powi(2);
    if s2 == 0.0 {
        return 0.0;
    }
    let c = 2.0 * nbar + 1.0;
    let fp = (2.0 * mbar + 1.0) + c / (sigma_p * sigma_p);
    let fq = (2.0 * mbar + 1.0) + c / (sigma_q * sigma_q);
    let ev = amp_eigenvalues(rg, mbar, nbar, sigma_q, sigma_p);
    let (m1, m2) = (ev.mu1, ev.mu2);
    let prod = m1 * m2;
    let t1 = (m2 * m2 * fp * fp + m1 * m1 * fq * fq) / (prod * (prod + 1.0));
    let t2 = (fq * m1 + fp * m2).powi(2) / (prod * (prod * prod - 1.0));
    0.5 * s2 * (t1 + t2)
}

/// Closed-form QFI for estimating the amplifier environment occupation m̄.
pub fn qfi_amp_mbar(rg: f64, mbar: f64, nbar: f64, sigma_q: f64, sigma_p: f64) -> f64 {
    let s4 = rg.sinh().powi(4);
    if s4 == 0.0 {
        return 0.0;
    }
    let ev = amp_eigenvalues(rg, mbar, nbar, sigma_q, sigma_p);
    let (m1, m2) = (ev.mu1, ev.mu2);
    let prod = m1 * m2;
    let t1 = (m1 * m1 + m2 * m2) / (prod * (prod + 1.0));
    let t2 = (m1 + m2).powi(2) / (prod * (prod * prod - 1.0));
    2.0 * s4 * (t1 + t2)
}

fn zero_mean(cov: CovarianceMatrix) -> GaussianState {
    GaussianState::new(QuadratureVector::zero(), cov)
}

/// Family d(θ) = (θ, 0) with fixed covariance; QFI comes from the mean term.
pub fn displacement_family(cov: CovarianceMatrix) -> StateFamily {
    StateFamily::new("displacement", move |theta| {
        GaussianState::new(QuadratureVector::new(theta, 0.0), cov)
    })
    .with_analytic(|_| StateDerivative {
        dcov: Mat2::zero(),
        dmean: QuadratureVector::new(1.0, 0.0),
    })
}

/// φ ↦ attenuator(φ, m̄) applied to a fixed probe.
///
/// The trigonometric formulas are evaluated directly, so the family is
/// defined on all of ℝ and finite-difference stencils may cross φ = 0.
pub fn attenuator_phi_family(probe: GaussianState, mbar: f64) -> StateFamily {
    let env = 2.0 * mbar + 1.0;
    let cov = probe.cov;
    StateFamily::new("phi", move |phi| {
        let c2 = phi.cos().powi(2);
        let s2 = phi.sin().powi(2);
        zero_mean(CovarianceMatrix::new(
            c2 * cov.s11 + s2 * env,
            c2 * cov.s12,
            c2 * cov.s22 + s2 * env,
        ))
    })
    .with_analytic(move |phi| {
        let s2p = (2.0 * phi).sin();
        StateDerivative {
            dcov: Mat2::new(
                s2p * (env - cov.s11),
                -s2p * cov.s12,
                -s2p * cov.s12,
                s2p * (env - cov.s22),
            ),
            dmean: QuadratureVector::zero(),
        }
    })
}

/// m̄ ↦ attenuator(φ, m̄) applied to a fixed probe.
pub fn attenuator_mbar_family(probe: GaussianState, phi: f64) -> StateFamily {
    let c2 = phi.cos().powi(2);
    let s2 = phi.sin().powi(2);
    let cov = probe.cov;
    StateFamily::new("mbar", move |mbar| {
        let env = (2.0 * mbar + 1.0) * s2;
        zero_mean(CovarianceMatrix::new(
            c2 * cov.s11 + env,
            c2 * cov.s12,
            c2 * cov.s22 + env,
        ))
    })
    .with_analytic(move |_| StateDerivative {
        dcov: Mat2::diagonal(2.0 * s2, 2.0 * s2),
        dmean: QuadratureVector::zero(),
    })
}

/// r_g ↦ amplifier(r_g, m̄) applied to a fixed probe.
pub fn amplifier_rg_family(probe: GaussianState, mbar: f64) -> StateFamily {
    let env = 2.0 * mbar + 1.0;
    let cov = probe.cov;
    StateFamily::new("rg", move |rg| {
        let c2 = rg.cosh().powi(2);
        let s2 = rg.sinh().powi(2);
        zero_mean(CovarianceMatrix::new(
            c2 * cov.s11 + s2 * env,
            c2 * cov.s12,
            c2 * cov.s22 + s2 * env,
        ))
    })
    .with_analytic(move |rg| {
        let s2r = (2.0 * rg).sinh();
        StateDerivative {
            dcov: Mat2::new(
                s2r * (cov.s11 + env),
                s2r * cov.s12,
                s2r * cov.s12,
                s2r * (cov.s22 + env),
            ),
            dmean: QuadratureVector::zero(),
        }
    })
}

/// m̄ ↦ amplifier(r_g, m̄) applied to a fixed probe.
pub fn amplifier_mbar_family(probe: GaussianState, rg: f64) -> StateFamily {
    let c2 = rg.cosh().powi(2);
    let s2 = rg.sinh().powi(2);
    let cov = probe.cov;
    StateFamily::new("mbar", move |mbar| {
        let env = (2.0 * mbar + 1.0) * s2;
        zero_mean(CovarianceMatrix::new(
            c2 * cov.s11 + env,
            c2 * cov.s12,
            c2 * cov.s22 + env,
        ))
    })
    .with_analytic(move |_| StateDerivative {
        dcov: Mat2::diagonal(2.0 * s2, 2.0 * s2),
        dmean: QuadratureVector::zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::make_thermal;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    const NBAR: f64 = 0.5819767068693265;

    fn thermal_probe() -> GaussianState {
        make_thermal(NBAR).unwrap()
    }

    #[test]
    fn displacement_family_unit_qfi() {
        let fam = displacement_family(CovarianceMatrix::identity());
        let b = qfi_generic(&fam, 0.3, DEFAULT_FD_STEP).unwrap();
        assert_relative_eq!(b.total, 1.0, epsilon = 1e-12);
        assert_eq!(b.term_cov, 0.0);
        assert_eq!(b.term_purity, 0.0);
        assert_relative_eq!(b.term_mean, 1.0, epsilon = 1e-12);
        assert_relative_eq!(b.total, b.term_cov + b.term_purity + b.term_mean, epsilon = 0.0);

        // Bures estimator is exact in tau for a Gaussian displacement
        assert_relative_eq!(qfi_bures(&fam, 0.3, 1e-3).unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn attenuator_phi_reference_point() {
        let fam = attenuator_phi_family(thermal_probe(), 0.5);
        let b = qfi_generic(&fam, FRAC_PI_4, DEFAULT_FD_STEP).unwrap();
        assert_relative_eq!(b.total, 0.008061088035483697, max_relative = 1e-7);
        assert_relative_eq!(
            qfi_att_phi(FRAC_PI_4, 0.5, NBAR, 1.0, 1.0),
            0.008061088035483697,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            qfi_bures(&fam, FRAC_PI_4, 1e-3).unwrap(),
            0.008061088035483697,
            max_relative = 1e-5
        );
        // zero-sensitivity points; pi/2 is not representable, so the value
        // there is the sin(2 phi)^2 round-off residue rather than exact zero
        assert_eq!(qfi_att_phi(0.0, 0.5, NBAR, 1.0, 1.0), 0.0);
        assert!(qfi_att_phi(FRAC_PI_2, 0.5, NBAR, 1.0, 1.0).abs() < 1e-30);
        // symmetric under the probe swap
        assert_eq!(
            qfi_att_phi(0.7, 0.5, NBAR, 1.2, 0.8),
            qfi_att_phi(0.7, 0.5, NBAR, 0.8, 1.2)
        );
    }

    #[test]
    fn attenuator_mbar_variants() {
        let corrected = qfi_att_mbar(FRAC_PI_4, 0.5, NBAR, 1.0, 1.0, AttMbarVariant::Corrected);
        let printed = qfi_att_mbar(FRAC_PI_4, 0.5, NBAR, 1.0, 1.0, AttMbarVariant::AsPrinted);
        assert_relative_eq!(corrected, 0.29988361445432743, max_relative = 1e-12);
        assert_relative_eq!(printed, 0.6747926750167257, max_relative = 1e-12);

        // only the corrected variant matches the generic formula
        let fam = attenuator_mbar_family(thermal_probe(), FRAC_PI_4);
        let generic = qfi_generic(&fam, 0.5, DEFAULT_FD_STEP).unwrap().total;
        assert_relative_eq!(generic, corrected, max_relative = 1e-7);
        assert!((generic - printed).abs() / generic > 0.5);

        assert_eq!(qfi_att_mbar(0.0, 0.5, NBAR, 1.0, 1.0, AttMbarVariant::Corrected), 0.0);
        assert_eq!(qfi_att_mbar(0.0, 0.5, NBAR, 1.0, 1.0, AttMbarVariant::AsPrinted), 0.0);
    }

    #[test]
    fn attenuator_mbar_divergence_is_flagged_infinity() {
        // full swap with a zero-temperature environment: nu1 nu2 = 1 exactly
        let v = qfi_att_mbar(FRAC_PI_2, 0.0, NBAR, 1.0, 1.0, AttMbarVariant::Corrected);
        assert!(v.is_infinite() && v > 0.0);
    }

    #[test]
    fn attenuator_eigenvalues_match_channel_action() {
        let ev = att_eigenvalues(FRAC_PI_4, 0.5, NBAR, 1.0, 1.0);
        assert_relative_eq!(ev.nu1, 2.0819767068693267, max_relative = 1e-14);
        assert_relative_eq!(ev.product(), 4.334627007946446, max_relative = 1e-13);

        // phi = 0 leaves the probe unchanged; phi = pi/2 swaps in the environment
        let ev0 = att_eigenvalues(0.0, 0.5, NBAR, 1.2, 0.8);
        let c = 2.0 * NBAR + 1.0;
        assert_relative_eq!(ev0.nu1, c / 0.64, max_relative = 1e-14);
        assert_relative_eq!(ev0.nu2, c / 1.44, max_relative = 1e-14);
        let ev_swap = att_eigenvalues(FRAC_PI_2, 0.5, NBAR, 1.2, 0.8);
        assert_relative_eq!(ev_swap.nu1, 2.0, epsilon = 1e-13);
        assert_relative_eq!(ev_swap.nu2, 2.0, epsilon = 1e-13);

        // the family evaluation agrees entrywise
        let probe = crate::probe::prepare_probe(
            &crate::probe::ProbeSpec::new(
                NBAR,
                crate::probe::Settings::Direct(
                    crate::probe::MeasurementSettings::new(1.2, 0.8).unwrap(),
                ),
            )
            .unwrap(),
        )
        .unwrap()
        .state;
        let fam = attenuator_phi_family(probe, 0.5);
        for phi in [0.2, 0.9, 1.4] {
            let ev = att_eigenvalues(phi, 0.5, NBAR, 1.2, 0.8);
            let st = fam.state_at(phi);
            assert_relative_eq!(st.cov.s11, ev.nu1, max_relative = 1e-13);
            assert_relative_eq!(st.cov.s22, ev.nu2, max_relative = 1e-13);
        }
    }

    #[test]
    fn amplifier_reference_points() {
        let ev = amp_eigenvalues(1.0, 0.5, NBAR, 1.0, 1.0);
        assert_relative_eq!(ev.mu1, 7.914780502389595, max_relative = 1e-13);

        assert_relative_eq!(
            qfi_amp_rg(1.0, 0.5, NBAR, 1.0, 1.0),
            3.6998519992864902,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            qfi_amp_mbar(1.0, 0.5, NBAR, 1.0, 1.0),
            0.12377126612524218,
            max_relative = 1e-12
        );
        assert_eq!(qfi_amp_rg(0.0, 0.5, NBAR, 1.0, 1.0), 0.0);
        assert_eq!(qfi_amp_mbar(0.0, 0.5, NBAR, 1.0, 1.0), 0.0);

        // r_g = 0 leaves the probe eigenvalues unchanged
        let ev0 = amp_eigenvalues(0.0, 0.5, NBAR, 1.2, 0.8);
        let c = 2.0 * NBAR + 1.0;
        assert_relative_eq!(ev0.mu1, c / 0.64, max_relative = 1e-14);
        assert_relative_eq!(ev0.mu2, c / 1.44, max_relative = 1e-14);

        // monotone growth at large r_g
        let m6 = amp_eigenvalues(6.0, 0.5, NBAR, 1.0, 1.0);
        let m8 = amp_eigenvalues(8.0, 0.5, NBAR, 1.0, 1.0);
        assert!(m8.mu1 > m6.mu1 && m8.mu2 > m6.mu2);

        // generic cross-checks
        let fam = amplifier_rg_family(thermal_probe(), 0.5);
        assert_relative_eq!(
            qfi_generic(&fam, 1.0, DEFAULT_FD_STEP).unwrap().total,
            3.6998519992864902,
            max_relative = 1e-7
        );
        assert_relative_eq!(
            qfi_bures(&fam, 1.0, 1e-3).unwrap(),
            3.6998519992864902,
            max_relative = 1e-5
        );
        let fam = amplifier_mbar_family(thermal_probe(), 1.0);
        assert_relative_eq!(
            qfi_generic(&fam, 0.5, DEFAULT_FD_STEP).unwrap().total,
            0.12377126612524218,
            max_relative = 1e-7
        );
    }

    #[test]
    fn amplifier_qfi_asymptote() {
        // the r_g -> infinity limit is 4 for any valid probe
        assert_relative_eq!(qfi_amp_rg(8.0, 0.5, NBAR, 1.0, 1.0), 4.0, epsilon = 1e-3);
        assert_relative_eq!(qfi_amp_rg(8.0, 0.5, NBAR, 1.2, 0.8), 4.0, epsilon = 1e-3);

        // amplifier mbar sensitivity decays monotonically in mbar
        let mut prev = f64::INFINITY;
        for i in 0..=50 {
            let mbar = i as f64;
            let v = qfi_amp_mbar(1.0, mbar, NBAR, 1.0, 1.0);
            assert!(v <= prev + 1e-15, "not decaying at mbar = {mbar}");
            prev = v;
        }
    }

    #[test]
    fn bures_auto_handles_stiff_and_tiny_points() {
        let probe = zero_mean(CovarianceMatrix::diagonal(
            (2.0 * NBAR + 1.0) / 1.44,
            (2.0 * NBAR + 1.0) / 1.44,
        ));
        // near-divergent point: QFI ~ 786
        let fam = attenuator_mbar_family(probe, 1.5);
        let closed = qfi_att_mbar(1.5, 0.0, NBAR, 1.2, 1.2, AttMbarVariant::Corrected);
        let est = qfi_bures_auto(&fam, 0.0).unwrap();
        assert_relative_eq!(est, closed, max_relative = 1e-4);

        // tiny-QFI smooth point
        let fam = amplifier_mbar_family(thermal_probe(), 0.1);
        let closed = qfi_amp_mbar(0.1, 0.5, NBAR, 1.0, 1.0);
        let est = qfi_bures_auto(&fam, 0.5).unwrap();
        assert_relative_eq!(est, closed, max_relative = 1e-4);

        // constant family: estimator returns (numerical) zero
        let constant = StateFamily::new("constant", |_| make_thermal(0.7).unwrap());
        assert!(qfi_bures_auto(&constant, 1.0).unwrap().abs() < 1e-8);
    }

    #[test]
    fn pure_state_purity_term_limit() {
        // fixed pure state, displaced mean: P = 1 with P' = 0 is fine
        let fam = displacement_family(CovarianceMatrix::identity());
        assert!(qfi_generic(&fam, 0.0, DEFAULT_FD_STEP).is_ok());

        // squeezed-vacuum family keeps det = 1 but with nonzero dSigma:
        // P' = 0 analytically, so the limit applies
        let fam = StateFamily::new("squeeze", |r| {
            zero_mean(CovarianceMatrix::diagonal((-2.0 * r).exp(), (2.0 * r).exp()))
        });
        let b = qfi_generic(&fam, 0.3, DEFAULT_FD_STEP).unwrap();
        assert_eq!(b.term_purity, 0.0);
        assert!(b.total.is_finite());

        // a family whose purity genuinely changes through 1 is an error
        let fam = StateFamily::new("impure", |t| {
            zero_mean(CovarianceMatrix::scaled_identity(1.0 + t))
        })
        .with_analytic(|_| StateDerivative {
            dcov: Mat2::scaled_identity(1.0),
            dmean: QuadratureVector::zero(),
        });
        assert!(matches!(
            qfi_generic(&fam, 0.0, DEFAULT_FD_STEP),
            Err(Error::PureStateSingularity { .. })
        ));
    }

    #[test]
    fn qfi_epsilon_symmetry() {
        // QFI(eps) = QFI(-eps) through the relabeling sigma_q <-> sigma_p
        for eps in [0.2, 0.5, 0.8] {
            let plus = crate::probe::settings_from_asymmetry(
                &crate::probe::AsymmetrySettings::new(1.0, eps).unwrap(),
            );
            let minus = crate::probe::settings_from_asymmetry(
                &crate::probe::AsymmetrySettings::new(1.0, -eps).unwrap(),
            );
            assert_eq!(
                qfi_att_phi(FRAC_PI_4, 0.5, NBAR, plus.sigma_q, plus.sigma_p),
                qfi_att_phi(FRAC_PI_4, 0.5, NBAR, minus.sigma_q, minus.sigma_p)
            );
            assert_eq!(
                qfi_amp_rg(1.0, 0.5, NBAR, plus.sigma_q, plus.sigma_p),
                qfi_amp_rg(1.0, 0.5, NBAR, minus.sigma_q, minus.sigma_p)
            );
        }
    }

    #[test]
    fn finite_difference_derivatives_match_closed_forms() {
        // families without analytic derivatives fall back to central
        // differences; agreement degrades from ~1e-15 to ~1e-8
        let probe = crate::probe::prepare_probe(
            &crate::probe::ProbeSpec::new(
                NBAR,
                crate::probe::Settings::Direct(
                    crate::probe::MeasurementSettings::new(1.2, 0.8).unwrap(),
                ),
            )
            .unwrap(),
        )
        .unwrap()
        .state;
        for (phi, mbar) in [(0.4, 0.0), (FRAC_PI_4, 0.5), (1.2, 2.0)] {
            let analytic = attenuator_phi_family(probe, mbar);
            let fd = StateFamily::new("phi", move |t| analytic.state_at(t));
            let total = qfi_generic(&fd, phi, DEFAULT_FD_STEP).unwrap().total;
            let closed = qfi_att_phi(phi, mbar, NBAR, 1.2, 0.8);
            assert_relative_eq!(total, closed, max_relative = 1e-4);

            let analytic = attenuator_mbar_family(probe, phi);
            let fd = StateFamily::new("mbar", move |t| analytic.state_at(t));
            let total = qfi_generic(&fd, mbar, DEFAULT_FD_STEP).unwrap().total;
            let closed = qfi_att_mbar(phi, mbar, NBAR, 1.2, 0.8, AttMbarVariant::Corrected);
            assert_relative_eq!(total, closed, max_relative = 1e-4);
        }
        for (rg, mbar) in [(0.3, 0.5), (1.0, 1.0), (2.5, 0.0)] {
            let analytic = amplifier_rg_family(probe, mbar);
            let fd = StateFamily::new("rg", move |t| analytic.state_at(t));
            let total = qfi_generic(&fd, rg, DEFAULT_FD_STEP).unwrap().total;
            let closed = qfi_amp_rg(rg, mbar, NBAR, 1.2, 0.8);
            assert_relative_eq!(total, closed, max_relative = 1e-4);
        }
    }

    #[test]
    fn generic_rejects_unphysical_family_point() {
        let fam = StateFamily::new("bad", |_| {
            zero_mean(CovarianceMatrix::diagonal(0.4, 0.4))
        });
        assert!(matches!(
            qfi_generic(&fam, 0.0, DEFAULT_FD_STEP),
            Err(Error::UnphysicalState(_))
        ));
    }
}
