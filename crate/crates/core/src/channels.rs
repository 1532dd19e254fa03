//! Gaussian channels as (M, N) matrix pairs and their action on states.
//!
//! A channel maps d⃗ → M d⃗ and Σ → M Σ Mᵀ + N, and is completely positive
//! iff N + iΩ − iMΩMᵀ ⪰ 0. Displacements are carried as an affine mean
//! offset since the (M, N) pair only covers the linear part.

use crate::gaussian::{CovarianceMatrix, GaussianState, QuadratureVector};
use crate::linalg::Mat2;
use crate::{Error, Result};

/// Tolerance on the minimum eigenvalue of the CP matrix; boundary channels
/// (identity, pure loss) sit exactly at zero.
pub const CP_TOL: f64 = 1e-12;

/// A Gaussian channel: linear part `m`, added noise `n`, affine mean offset.
#[derive(Debug, Clone, Copy)]
pub struct GaussianChannel {
    pub m: Mat2,
    pub n: Mat2,
    pub displacement: QuadratureVector,
}

impl GaussianChannel {
    pub fn new(m: Mat2, n: Mat2) -> Self {
        Self {
            m,
            n,
            displacement: QuadratureVector::zero(),
        }
    }

    pub fn identity() -> Self {
        Self::new(Mat2::identity(), Mat2::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.m.is_finite() && self.n.is_finite() && self.displacement.is_finite()
    }
}

/// Beam-splitter mixing angle and environment occupation of an attenuator.
#[derive(Debug, Clone, Copy)]
pub struct AttenuatorParams {
    pub phi: f64,
    pub mbar: f64,
}

impl AttenuatorParams {
    pub fn new(phi: f64, mbar: f64) -> Result<Self> {
        if !phi.is_finite() || !(0.0..=std::f64::consts::FRAC_PI_2).contains(&phi) {
            return Err(Error::Domain(format!(
                "attenuator angle must lie in [0, pi/2], got {phi}"
            )));
        }
        if !mbar.is_finite() || mbar < 0.0 {
            return Err(Error::Domain(format!(
                "environment occupation must be nonnegative, got {mbar}"
            )));
        }
        Ok(Self { phi, mbar })
    }

    /// Transmissivity η = cos²φ.
    pub fn eta(&self) -> f64 {
        self.phi.cos().powi(2)
    }
}

/// Two-mode squeezing parameter and environment occupation of an amplifier.
#[derive(Debug, Clone, Copy)]
pub struct AmplifierParams {
    pub rg: f64,
    pub mbar: f64,
}

impl AmplifierParams {
    pub fn new(rg: f64, mbar: f64) -> Result<Self> {
        if !rg.is_finite() || rg < 0.0 {
            return Err(Error::Domain(format!(
                "squeezing parameter must be nonnegative, got {rg}"
            )));
        }
        if !mbar.is_finite() || mbar < 0.0 {
            return Err(Error::Domain(format!(
                "environment occupation must be nonnegative, got {mbar}"
            )));
        }
        Ok(Self { rg, mbar })
    }

    /// Gain g = cosh²(r_g) ≥ 1.
    pub fn gain(&self) -> f64 {
        self.rg.cosh().powi(2)
    }
}

/// Attenuator channel: M = cos(φ)·I, N = sin²(φ)(2m̄+1)·I.
pub fn attenuator(p: &AttenuatorParams) -> GaussianChannel {
    let c = p.phi.cos();
    let s2 = p.phi.sin().powi(2);
    GaussianChannel::new(
        Mat2::scaled_identity(c),
        Mat2::scaled_identity(s2 * (2.0 * p.mbar + 1.0)),
    )
}

/// Amplifier channel: M = cosh(r_g)·I, N = sinh²(r_g)(2m̄+1)·I.
pub fn amplifier(p: &AmplifierParams) -> GaussianChannel {
    let c = p.rg.cosh();
    let s2 = p.rg.sinh().powi(2);
    GaussianChannel::new(
        Mat2::scaled_identity(c),
        Mat2::scaled_identity(s2 * (2.0 * p.mbar + 1.0)),
    )
}

/// Noiseless (N = 0) Gaussian unitaries.
#[derive(Debug, Clone, Copy)]
pub enum UnitaryKind {
    /// M = diag(e^{−r}, e^{r}); squeezes q for r > 0.
    Squeeze(f64),
    /// Standard rotation by the given angle.
    Rotate(f64),
    /// Identity linear part with a mean offset.
    Displace(QuadratureVector),
}

pub fn unitary_channel(kind: UnitaryKind) -> GaussianChannel {
    match kind {
        UnitaryKind::Squeeze(r) => {
            GaussianChannel::new(Mat2::diagonal((-r).exp(), r.exp()), Mat2::zero())
        }
        UnitaryKind::Rotate(angle) => {
            let (s, c) = angle.sin_cos();
            GaussianChannel::new(Mat2::new(c, -s, s, c), Mat2::zero())
        }
        UnitaryKind::Displace(d) => GaussianChannel {
            m: Mat2::identity(),
            n: Mat2::zero(),
            displacement: d,
        },
    }
}

/// Complete-positivity certificate.
#[derive(Debug, Clone, Copy)]
pub struct CpReport {
    /// Verdict of the matrix test (authoritative).
    pub physical: bool,
    /// Minimum eigenvalue of the Hermitian matrix N + iΩ − iMΩMᵀ.
    pub margin: f64,
    /// Verdict of the scalar single-mode reduction: N ⪰ 0 and det N ≥ (det M − 1)².
    pub scalar_physical: bool,
    /// det N − (det M − 1)².
    pub scalar_margin: f64,
}

/// Tests N + iΩ − iMΩMᵀ ⪰ 0 via the closed-form 2×2 Hermitian eigenvalues,
/// and cross-checks with the scalar single-mode condition.
pub fn cp_check(ch: &GaussianChannel) -> Result<CpReport> {
    if !ch.is_finite() {
        return Err(Error::Malformed("channel matrices must be finite".into()));
    }
    let skew = (ch.n.m12 - ch.n.m21).abs();
    if skew > 1e-9 * ch.n.max_abs().max(1.0) {
        return Err(Error::Malformed(format!(
            "noise matrix must be symmetric, asymmetry = {skew}"
        )));
    }
    // For 2x2 matrices M Omega M^T = det(M) Omega, so the CP matrix is
    // [[n11, n12 + i(1 - det M)], [n12 - i(1 - det M), n22]].
    let det_m = ch.m.det();
    let n11 = ch.n.m11;
    let n22 = ch.n.m22;
    let n12 = 0.5 * (ch.n.m12 + ch.n.m21);
    let off_sq = n12 * n12 + (1.0 - det_m) * (1.0 - det_m);
    let tr = n11 + n22;
    let det_c = n11 * n22 - off_sq;
    let disc = (tr * tr - 4.0 * det_c).max(0.0).sqrt();
    let min_eig = 0.5 * (tr - disc);

    let det_n = ch.n.det();
    let scalar_margin = det_n - (det_m - 1.0) * (det_m - 1.0);
    let noise_psd = n11 >= -CP_TOL && n22 >= -CP_TOL && det_n >= -CP_TOL;

    Ok(CpReport {
        physical: min_eig >= -CP_TOL,
        margin: min_eig,
        scalar_physical: noise_psd && scalar_margin >= -CP_TOL,
        scalar_margin,
    })
}

/// Applies a channel: mean → M·mean + displacement, Σ → MΣMᵀ + N.
///
/// The channel is certified before application; states are passed through
/// as-is so that sweeps can carry flagged unphysical grid points.
pub fn apply_channel(ch: &GaussianChannel, state: &GaussianState) -> Result<GaussianState> {
    let report = cp_check(ch)?;
    if !report.physical {
        return Err(Error::UnphysicalChannel(format!(
            "complete-positivity violation, margin = {}",
            report.margin
        )));
    }
    let mv = ch.m.mul_vec([state.mean.q, state.mean.p]);
    let mean = QuadratureVector::new(mv[0] + ch.displacement.q, mv[1] + ch.displacement.p);
    let out = ch.m.mul(&state.cov.to_mat2()).mul(&ch.m.transpose()).add(&ch.n);
    Ok(GaussianState::new(mean, CovarianceMatrix::from_mat2_symmetric(&out)))
}
