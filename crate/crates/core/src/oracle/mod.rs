//! Independent brute-force validators.
//!
//! Nothing in here reuses the closed-form production paths: the kernel
//! pipeline represents states as sampled position/momentum density kernels
//! and integrates moments by quadrature, and the Fock oracle diagonalizes
//! truncated density matrices. Agreements (and documented disagreements)
//! between these and the analytic modules are the evidence base for the
//! whole crate.

mod fock;
mod kernel;

pub use fock::{fock_coherence, FockCoherence};
pub use kernel::{
    apply_p_measurement, apply_q_measurement, kernel_from_state, kernel_moments,
    oracle_probe_cov, to_momentum_rep, to_position_rep, GridParams, KernelGrid, KernelMoments,
    ProbeCovComparison, Representation,
};
