//! Truncated-Fock-basis coherence oracle.
//!
//! A zero-mean state with diagonal covariance is a squeezed thermal state,
//! Σ = S(r)·νI·S(r)ᵀ with r = ¼ ln(Σ₂₂/Σ₁₁) and ν = √det Σ. The oracle
//! builds ρ = S(r) ρ_th((ν−1)/2) S(r)† explicitly in the number basis using
//! the normal-ordered factorization
//!
//! ```text
//! S(r) = exp[-(t/2) a†²] · exp[-ln(cosh r)(a†a + ½)] · exp[(t/2) a²],  t = tanh r,
//! ```
//!
//! then diagonalizes the truncated matrix for its entropy. Both the
//! thermal-reference coherence and the fully dephased (Fock-diagonal)
//! variant are returned; they differ in general and the production module
//! uses the former.

use nalgebra::DMatrix;

use crate::gaussian::GaussianState;
use crate::{Error, Result};

/// Coherences and diagnostics from the truncated-Fock construction.
#[derive(Debug, Clone, Copy)]
pub struct FockCoherence {
    /// S(thermal(N̄_ref)) − S(ρ), the production definition.
    pub coherence_thermal_ref: f64,
    /// S(diag ρ) − S(ρ) against the dephased state.
    pub coherence_dephased: f64,
    pub state_entropy: f64,
    pub ref_occupation: f64,
    /// 1 − Tr ρ after truncation.
    pub trace_deficit: f64,
}

/// Column of S(r)|n⟩ in the number basis, truncated at `cutoff`.
fn squeeze_column(n: usize, r: f64, cutoff: usize) -> Vec<f64> {
    let t = r.tanh();
    let ch = r.cosh();

    // exp[(t/2) a^2] |n>: descends in steps of two and terminates
    let mut lowered: Vec<(usize, f64)> = Vec::with_capacity(n / 2 + 1);
    let mut term = 1.0;
    let mut k = n as i64;
    let mut m = 0usize;
    loop {
        lowered.push((k as usize, term));
        if k < 2 {
            break;
        }
        term *= 0.5 * t * ((k * (k - 1)) as f64).sqrt() / (m + 1) as f64;
        k -= 2;
        m += 1;
    }

    let mut out = vec![0.0; cutoff + 1];
    for &(k, w) in &lowered {
        // diagonal factor (cosh r)^{-(k + 1/2)}
        let mut term = w * ch.powf(-(k as f64 + 0.5));
        // exp[-(t/2) a†^2] raises in steps of two up to the cutoff
        let mut j = k;
        let mut m = 0usize;
        while j <= cutoff {
            out[j] += term;
            term *= -0.5 * t * (((j + 1) * (j + 2)) as f64).sqrt() / (m + 1) as f64;
            j += 2;
            m += 1;
        }
    }
    out
}

fn entropy_of_distribution(probs: impl Iterator<Item = f64>) -> f64 {
    probs
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.ln())
        .sum()
}

/// Builds the truncated density matrix of a zero-mean diagonal-covariance
/// state and computes its coherence two ways, entirely in the Fock basis.
pub fn fock_coherence(state: &GaussianState, cutoff: usize) -> Result<FockCoherence> {
    if cutoff < 100 {
        return Err(Error::Domain(format!("cutoff must be at least 100, got {cutoff}")));
    }
    if state.mean.norm_sq() > 1e-24 {
        return Err(Error::Domain("Fock oracle requires zero mean".into()));
    }
    if state.cov.s12.abs() > 1e-12 {
        return Err(Error::Domain("Fock oracle requires a diagonal covariance".into()));
    }
    let det = state.cov.det();
    if det > 25.0 * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "det Sigma = {det} exceeds the oracle bound 25"
        )));
    }
    let nu = crate::gaussian::symplectic_eigenvalue(&state.cov)?;
    let r = 0.25 * (state.cov.s22 / state.cov.s11).ln();
    if r.abs() > 1.2 * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "squeezing |r| = {} exceeds the oracle bound 1.2",
            r.abs()
        )));
    }

    let dim = cutoff + 1;
    let neff = 0.5 * (nu - 1.0);
    let mut rho = DMatrix::<f64>::zeros(dim, dim);
    let mut weight = 1.0 / (neff + 1.0);
    let ratio = neff / (neff + 1.0);
    for n in 0..dim {
        if weight < 1e-18 && n > 2 {
            break;
        }
        let col = squeeze_column(n, r, cutoff);
        for i in 0..dim {
            let ci = col[i];
            if ci == 0.0 {
                continue;
            }
            let w = weight * ci;
            for j in 0..dim {
                rho[(i, j)] += w * col[j];
            }
        }
        if ratio == 0.0 {
            break;
        }
        weight *= ratio;
    }

    let trace: f64 = (0..dim).map(|i| rho[(i, i)]).sum();
    let trace_deficit = 1.0 - trace;
    if trace_deficit > 1e-10 {
        return Err(Error::Cutoff(format!(
            "tail population {trace_deficit:.3e} above 1e-10; raise the cutoff"
        )));
    }

    let ref_occupation: f64 = (0..dim).map(|i| i as f64 * rho[(i, i)]).sum();
    let diag_entropy = entropy_of_distribution((0..dim).map(|i| rho[(i, i)]));

    // truncated thermal reference distribution at the same mean occupation
    let ref_entropy = {
        let n = ref_occupation;
        let mut p = 1.0 / (n + 1.0);
        let ratio = n / (n + 1.0);
        let mut s = 0.0;
        for _ in 0..dim {
            if p > 1e-300 {
                s -= p * p.ln();
            }
            p *= ratio;
        }
        s
    };

    let eigen = nalgebra::SymmetricEigen::new(rho);
    let state_entropy = entropy_of_distribution(eigen.eigenvalues.iter().copied());

    Ok(FockCoherence {
        coherence_thermal_ref: ref_entropy - state_entropy,
        coherence_dephased: diag_entropy - state_entropy,
        state_entropy,
        ref_occupation,
        trace_deficit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{make_thermal, CovarianceMatrix, QuadratureVector};
    use approx::assert_relative_eq;

    fn state(s11: f64, s22: f64) -> GaussianState {
        GaussianState::new(QuadratureVector::zero(), CovarianceMatrix::diagonal(s11, s22))
    }

    #[test]
    fn thermal_state_has_no_coherence() {
        let r = fock_coherence(&make_thermal(1.0).unwrap(), 200).unwrap();
        assert!(r.coherence_thermal_ref.abs() < 1e-10);
        assert!(r.coherence_dephased.abs() < 1e-10);
        assert!(r.trace_deficit.abs() < 1e-10);
        // eigen-entropy of the truncated matrix reproduces 2 ln 2
        assert_relative_eq!(r.state_entropy, 2.0 * std::f64::consts::LN_2, epsilon = 1e-10);
        assert_relative_eq!(r.ref_occupation, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn squeezed_vacuum_reference_value() {
        let r = fock_coherence(&state(2.0f64.exp(), (-2.0f64).exp()), 200).unwrap();
        assert!(r.state_entropy.abs() < 1e-10);
        assert_relative_eq!(r.coherence_thermal_ref, 1.6198220928977027, epsilon = 1e-8);
        assert_relative_eq!(r.coherence_dephased, 1.1261467230521762, epsilon = 1e-6);
        assert_relative_eq!(r.ref_occupation, 1.3810978455418157, epsilon = 1e-9);
    }

    #[test]
    fn probe_state_matches_closed_form() {
        let probe = state(3.3811772089666445, 1.5027454262073978);
        let r = fock_coherence(&probe, 200).unwrap();
        let closed = crate::coherence::coherence(&probe).unwrap();
        assert!((r.coherence_thermal_ref - closed.coherence).abs() < 1e-6);
        assert_relative_eq!(r.state_entropy, closed.state_entropy, epsilon = 1e-8);
        // the dephased variant is a genuinely different quantity
        assert_relative_eq!(r.coherence_dephased, 0.08216129487902646, epsilon = 1e-6);
        assert!(r.coherence_dephased < r.coherence_thermal_ref);
    }

    #[test]
    fn oracle_bounds_are_enforced() {
        assert!(matches!(
            fock_coherence(&make_thermal(1.0).unwrap(), 50),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            fock_coherence(&state(6.0, 6.0), 200),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            fock_coherence(&state(20.0f64.exp(), (-20.0f64).exp()), 200),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            fock_coherence(
                &GaussianState::new(QuadratureVector::new(0.5, 0.0), CovarianceMatrix::identity()),
                200
            ),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn squeeze_column_is_normalized() {
        for n in [0, 1, 4, 11] {
            for r in [-0.9, -0.2, 0.0, 0.5, 1.0] {
                let col = squeeze_column(n, r, 240);
                let norm: f64 = col.iter().map(|c| c * c).sum();
                assert_relative_eq!(norm, 1.0, epsilon = 1e-10);
            }
        }
    }
}
