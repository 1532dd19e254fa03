//! Single-mode Gaussian quantum metrology toolkit.
//!
//! Everything here works on states described by their first and second
//! statistical moments: a mean quadrature vector and a 2×2 covariance
//! matrix, normalized so the vacuum has unit covariance (ℏ = m = ω = 1).
//!
//! The crate covers the full estimation pipeline:
//!
//! - [`gaussian`] — state values and elementary functionals (validity,
//!   purity, symplectic eigenvalue, entropy, fidelity, Bures distance).
//! - [`channels`] — Gaussian channels as (M, N) matrix pairs: attenuator,
//!   amplifier, unitaries, and complete-positivity certification.
//! - [`probe`] — probe preparation by sequential non-commutative Gaussian
//!   measurements of q and p on a thermal state, including the (σ, ε)
//!   asymmetry parametrization.
//! - [`metrology`] — quantum Fisher information three ways: closed forms
//!   per channel, the generic single-mode moment formula, and a
//!   fidelity/Bures finite-difference estimator.
//! - [`coherence`] — energy-basis coherence via relative entropy against
//!   the thermal reference state, and its parameter derivatives.
//! - [`oracle`] — independent brute-force validators: a position-kernel
//!   quadrature pipeline for the measurement back-action and a
//!   truncated-Fock-basis coherence oracle.
//! - [`experiments`] — parameter sweeps, figure-data CSV emission,
//!   power-law fitting, and the scaling-coefficient comparison table.
//!
//! All value types are immutable and all operations are pure functions,
//! so everything is safe to drive from parallel sweeps.

use thiserror::Error;

pub mod channels;
pub mod coherence;
pub mod experiments;
pub mod gaussian;
pub mod linalg;
pub mod metrology;
pub mod oracle;
pub mod probe;

pub use channels::{apply_channel, attenuator, amplifier, cp_check, unitary_channel};
pub use channels::{AmplifierParams, AttenuatorParams, GaussianChannel, UnitaryKind};
pub use gaussian::{
    bures_distance, fidelity, make_thermal, purity, symplectic_eigenvalue, thermal_occupation,
    validate_cov, von_neumann_entropy, CovarianceMatrix, GaussianState, QuadratureVector,
};
pub use metrology::{qfi_bures, qfi_bures_auto, qfi_generic, QfiBreakdown, StateFamily};
pub use probe::{prepare_probe, validate_probe, ProbeSpec};

/// Errors for Gaussian-metrology computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("unphysical state: {0}")]
    UnphysicalState(String),

    #[error("unphysical channel: {0}")]
    UnphysicalChannel(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("pure-state singularity: purity is 1 but its derivative is {purity_derivative}")]
    PureStateSingularity { purity_derivative: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("cutoff error: {0}")]
    Cutoff(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("empty result: {0}")]
    EmptyResult(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
