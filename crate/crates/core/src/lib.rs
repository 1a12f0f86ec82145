//! Classical simulation of a quantum minimum-eigenvalue algorithm.
//!
//! The crate estimates the smallest eigenvalue of a Hermitian matrix by a
//! binary search whose steps query amplitude estimation on a state prepared
//! by median-boosted phase estimation, and then prepares a low-energy state
//! by amplifying a window around the estimate. Every quantum subroutine is
//! simulated exactly at the level of outcome distributions, with small-size
//! statevector backends available as cross-checks.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplitude;
pub mod circuit;
pub mod eigensearch;
pub mod elasticity;
pub mod error;
pub mod experiments;
pub mod groundstate;
pub mod io;
pub mod numerics;
pub mod qpe;
pub mod rng;
pub mod spectra;

pub use error::{Error, Result};
pub use numerics::{
    fidelity, hermitian_eigendecomposition, trace_out, unitary_from_hamiltonian, ComplexMatrix, DensityMatrix,
    EigenDecomposition, StateVector, C64,
};
pub use spectra::{gershgorin_bound, oracle_query, rescale_operator, HermitianOperator, QueryLedger, RescaleMap};
pub use eigensearch::{
    derive_params, eigenvalue_estimation, eigenvalue_estimation_on, estimate_general, find_nearest_to_half, Backend,
    EstimationResult, SearchParams,
};
pub use elasticity::{assemble_d, elasticity_pipeline, semianalytic_fundamental, ElasticityReport, StringGeometry};
pub use groundstate::{prepare_ground_state, prepare_rho, PrepMode, PrepOptions};
pub use io::{parse_matrix, MatrixFile, RunConfig};
pub use qpe::{build_profile, QpeConfig, SpectralProfile};
