//! Randomized invariants for the state functionals and channels.

use gqmet::channels::{
    amplifier, apply_channel, attenuator, cp_check, AmplifierParams, AttenuatorParams,
    GaussianChannel,
};
use gqmet::gaussian::{
    fidelity, purity, validate_cov, CovarianceMatrix, GaussianState, QuadratureVector,
};
use gqmet::linalg::Mat2;
use gqmet::metrology::{qfi_amp_mbar, qfi_amp_rg, qfi_att_mbar, qfi_att_phi, AttMbarVariant};
use gqmet::probe::{settings_from_asymmetry, AsymmetrySettings};
use proptest::prelude::*;

fn physical_cov(nu: f64, r: f64, angle: f64) -> CovarianceMatrix {
    let d = Mat2::diagonal(nu * (-2.0 * r).exp(), nu * (2.0 * r).exp());
    let (s, c) = angle.sin_cos();
    let rot = Mat2::new(c, -s, s, c);
    CovarianceMatrix::from_mat2_symmetric(&rot.mul(&d).mul(&rot.transpose()))
}

prop_compose! {
    fn arb_state()(
        nu in 1.0f64..8.0,
        r in -1.2f64..1.2,
        angle in 0.0f64..std::f64::consts::PI,
        q in -3.0f64..3.0,
        p in -3.0f64..3.0,
    ) -> GaussianState {
        GaussianState::new(QuadratureVector::new(q, p), physical_cov(nu, r, angle))
    }
}

proptest! {
    #[test]
    fn physical_covariances_have_unit_bounded_purity(
        nu in 1.0f64..8.0, r in -1.2f64..1.2, angle in 0.0f64..std::f64::consts::PI
    ) {
        let cov = physical_cov(nu, r, angle);
        let report = validate_cov(&cov).unwrap();
        prop_assert!(report.physical);
        prop_assert!(report.det_margin >= -1e-9);
        let p = purity(&GaussianState::new(QuadratureVector::zero(), cov)).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0 + 1e-12);
        prop_assert!((p - 1.0 / cov.det().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_and_reflexive(a in arb_state(), b in arb_state()) {
        let fab = fidelity(&a, &b).unwrap();
        let fba = fidelity(&b, &a).unwrap();
        prop_assert!((fab - fba).abs() < 1e-12, "F(a,b)={fab} F(b,a)={fba}");
        prop_assert!((0.0..=1.0 + 1e-9).contains(&fab));
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn cp_matrix_and_scalar_tests_agree(
        m11 in -2.0f64..2.0, m12 in -2.0f64..2.0,
        m21 in -2.0f64..2.0, m22 in -2.0f64..2.0,
        n11 in -1.0f64..4.0, n12 in -2.0f64..2.0, n22 in -1.0f64..4.0,
    ) {
        let ch = GaussianChannel::new(
            Mat2::new(m11, m12, m21, m22),
            Mat2::new(n11, n12, n12, n22),
        );
        let report = cp_check(&ch).unwrap();
        // away from the decision boundary the two certificates must agree
        if report.margin.abs() > 1e-9 && report.scalar_margin.abs() > 1e-9 {
            prop_assert_eq!(
                report.physical, report.scalar_physical,
                "matrix margin {} vs scalar margin {}", report.margin, report.scalar_margin
            );
        }
    }
}

proptest! {
    #[test]
    fn physical_channels_preserve_physicality(
        state in arb_state(),
        phi in 0.0f64..std::f64::consts::FRAC_PI_2,
        rg in 0.0f64..3.0,
        mbar in 0.0f64..3.0,
    ) {
        let att = attenuator(&AttenuatorParams::new(phi, mbar).unwrap());
        let out = apply_channel(&att, &state).unwrap();
        prop_assert!(validate_cov(&out.cov).unwrap().physical);

        let amp = amplifier(&AmplifierParams::new(rg, mbar).unwrap());
        let out = apply_channel(&amp, &state).unwrap();
        prop_assert!(validate_cov(&out.cov).unwrap().physical);
    }

    #[test]
    fn qfi_is_probe_swap_symmetric_and_nonnegative(
        phi in 0.05f64..1.5,
        rg in 0.05f64..3.0,
        mbar in 0.0f64..2.0,
        sq in 0.8f64..1.2,
        sp in 0.8f64..1.2,
    ) {
        let nbar = 0.5819767068693265;
        let values = [
            qfi_att_phi(phi, mbar, nbar, sq, sp),
            qfi_att_mbar(phi, mbar, nbar, sq, sp, AttMbarVariant::Corrected),
            qfi_amp_rg(rg, mbar, nbar, sq, sp),
            qfi_amp_mbar(rg, mbar, nbar, sq, sp),
        ];
        let swapped = [
            qfi_att_phi(phi, mbar, nbar, sp, sq),
            qfi_att_mbar(phi, mbar, nbar, sp, sq, AttMbarVariant::Corrected),
            qfi_amp_rg(rg, mbar, nbar, sp, sq),
            qfi_amp_mbar(rg, mbar, nbar, sp, sq),
        ];
        for (v, w) in values.iter().zip(&swapped) {
            prop_assert!(v >= &-1e-12);
            prop_assert_eq!(v, w, "swap changed the value");
        }
    }

    #[test]
    fn epsilon_relabeling_swaps_the_probe(
        sigma in 0.7f64..1.3,
        eps in 0.0f64..0.95,
    ) {
        let plus = settings_from_asymmetry(&AsymmetrySettings::new(sigma, eps).unwrap());
        let minus = settings_from_asymmetry(&AsymmetrySettings::new(sigma, -eps).unwrap());
        prop_assert_eq!(plus.sigma_q, minus.sigma_p);
        prop_assert_eq!(plus.sigma_p, minus.sigma_q);
    }

    #[test]
    fn coherence_zero_iff_proportional_to_identity(
        nu in 1.0f64..5.0,
        r in 0.0f64..0.8,
    ) {
        let sym = GaussianState::new(
            QuadratureVector::zero(),
            CovarianceMatrix::scaled_identity(nu),
        );
        let report = gqmet::coherence::coherence(&sym).unwrap();
        prop_assert!(report.coherence.abs() < 1e-12);

        let squeezed = GaussianState::new(
            QuadratureVector::zero(),
            CovarianceMatrix::diagonal(nu * (-2.0 * r).exp(), nu * (2.0 * r).exp()),
        );
        let report = gqmet::coherence::coherence(&squeezed).unwrap();
        prop_assert!(report.coherence >= -1e-12);
        if r > 0.05 {
            prop_assert!(report.coherence > 1e-6);
        }
    }
}
