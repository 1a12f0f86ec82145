//! Low-energy state preparation.
//!
//! With `θ₀` within `ε/4` of `λ₀`, subroutine A is rerun at precision `ε/4`
//! and the window `|x − θ₀| < ε/2` on its median register is amplified.
//! Conditioned on the window, the system register holds
//! `ρ = Σ_j a_j² |ψ_j⟩⟨ψ_j| / Σ_j a_j²`, where `a_j²` is `1/N` times the
//! window mass of eigenvalue `λ_j`. Eigenvalues near `λ₀` keep almost all of
//! their mass while eigenvalues farther than `ε` keep at most `δ`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::amplitude::Predicate;
use crate::circuit::{grover_step, FaithfulCircuit};
use crate::eigensearch::{eigenvalue_estimation, precision_bits, EstimationResult, SearchParams, MIN_K};
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, DensityMatrix, StateVector, C64};
use crate::qpe::{build_profile, choose_c, choose_t, QpeConfig, DEFAULT_ZETA};
use crate::spectra::HermitianOperator;

/// Target overlap with the low-energy subspace.
pub const DEFAULT_GAMMA: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrepMode {
    /// Condition the prepared mixture on the window analytically.
    Postselect,
    /// Run amplitude amplification on the faithful statevector backend.
    Grover,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrepOptions {
    pub mode: PrepMode,
    /// Overrides the number of median copies (default: chosen from `δ`).
    pub copies: Option<usize>,
    pub gamma: f64,
}

impl Default for PrepOptions {
    fn default() -> Self {
        Self {
            mode: PrepMode::Postselect,
            copies: None,
            gamma: DEFAULT_GAMMA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStatePlan {
    pub theta0: f64,
    /// `ε = 2^-m`.
    pub epsilon: f64,
    pub m: u32,
    /// Phase estimation at precision `ε/4`.
    pub qpe: QpeConfig,
    pub window: Predicate,
    pub mode: PrepMode,
    pub gamma: f64,
    pub delta: f64,
}

impl GroundStatePlan {
    pub fn new(dim: usize, epsilon: f64, theta0: f64, options: &PrepOptions) -> Result<Self> {
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::DimNotPowerOfTwo(dim));
        }
        let m = precision_bits(epsilon)?;
        let delta = 1.0 / (2.0 * dim as f64 + 2.0);
        let t = choose_t(m + 2, DEFAULT_ZETA);
        let c = match options.copies {
            Some(c) => c,
            None => choose_c(delta)?,
        };
        let qpe = QpeConfig::new(t, c)?;
        let epsilon = 0.5f64.powi(m as i32);
        Ok(Self {
            theta0,
            epsilon,
            m,
            qpe,
            window: Predicate::window(theta0, epsilon, t),
            mode: options.mode,
            gamma: options.gamma,
            delta,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroverRun {
    pub iterations: u64,
    pub attempts: u32,
    /// Probability that the flag reads success after the iterations.
    pub success_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedState {
    pub rho: DensityMatrix,
    pub p_good: f64,
    /// `a_j²` per eigenvector, in ascending eigenvalue order.
    pub window_masses: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub plan: GroundStatePlan,
    pub grover: Option<GroverRun>,
}

/// Prepares `ρ` given `θ₀` with `|θ₀ − λ₀| < ε/4`.
pub fn prepare_rho<R: Rng + ?Sized>(
    h: &HermitianOperator,
    epsilon: f64,
    theta0: f64,
    options: &PrepOptions,
    rng: &mut R,
) -> Result<PreparedState> {
    let plan = GroundStatePlan::new(h.dim(), epsilon, theta0, options)?;
    let profile = build_profile(h, plan.qpe)?;
    let window_masses = profile.entry_masses(|x| plan.window.is_good(x));
    let p_good: f64 = window_masses.iter().sum();
    let eigenvalues = profile.decomposition().eigenvalues().to_vec();
    if p_good <= 0.0 {
        return Err(Error::PreconditionViolated(format!(
            "window around {theta0} holds no mass"
        )));
    }
    match plan.mode {
        PrepMode::Postselect => {
            let eig = profile.decomposition();
            let vectors: Vec<Vec<C64>> = (0..eig.dim()).map(|j| eig.eigenvector(j)).collect();
            Ok(PreparedState {
                rho: DensityMatrix::mixture(&window_masses, &vectors)?,
                p_good,
                window_masses,
                eigenvalues,
                plan,
                grover: None,
            })
        }
        PrepMode::Grover => {
            let (rho, run, p_faithful) = amplify(h, &plan, rng)?;
            Ok(PreparedState {
                rho,
                p_good: p_faithful,
                window_masses,
                eigenvalues,
                plan,
                grover: Some(run),
            })
        }
    }
}

/// Amplitude amplification of the window on the statevector backend, with
/// `⌊π/(4θ)⌋` iterations and one retry on a failed flag.
fn amplify<R: Rng + ?Sized>(
    h: &HermitianOperator,
    plan: &GroundStatePlan,
    rng: &mut R,
) -> Result<(DensityMatrix, GroverRun, f64)> {
    const MAX_ATTEMPTS: u32 = 2;
    let circuit = FaithfulCircuit::new(h, plan.qpe)?;
    let phi = circuit.prepare();
    let good = circuit.good_mask(&plan.window)?;
    let p_good: f64 = phi
        .amplitudes()
        .iter()
        .zip(&good)
        .filter(|(_, &g)| g)
        .map(|(a, _)| a.norm_sqr())
        .sum();
    let theta = p_good.sqrt().asin();
    let iterations = (PI / (4.0 * theta)).floor() as u64;
    for attempt in 1..=MAX_ATTEMPTS {
        let mut v = phi.amplitudes().to_vec();
        for _ in 0..iterations {
            grover_step(&phi, &good, &mut v);
        }
        let success: f64 = v.iter().zip(&good).filter(|(_, &g)| g).map(|(a, _)| a.norm_sqr()).sum();
        if rng.random::<f64>() < success {
            let scale = success.sqrt().recip();
            for (z, &g) in v.iter_mut().zip(&good) {
                *z = if g { *z * scale } else { C64::new(0.0, 0.0) };
            }
            let state = StateVector::new(circuit.total_qubits(), v)?;
            let run = GroverRun {
                iterations,
                attempts: attempt,
                success_probability: success,
            };
            return Ok((circuit.system_state(&state)?, run, p_good));
        }
    }
    Err(Error::AmplificationFailed(MAX_ATTEMPTS as usize))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateRun {
    pub search: EstimationResult,
    pub prepared: PreparedState,
}

/// Estimates `θ₀` at precision `ε/4` and prepares `ρ` around it.
pub fn prepare_ground_state<R: Rng + ?Sized>(
    h: &HermitianOperator,
    epsilon: f64,
    nu: f64,
    options: &PrepOptions,
    rng: &mut R,
) -> Result<GroundStateRun> {
    let m = precision_bits(epsilon)?;
    let params = SearchParams::from_bits(h.dim(), m + 2, nu, MIN_K)?;
    let search = eigenvalue_estimation(h, &params, rng)?;
    let prepared = prepare_rho(h, epsilon, search.estimate, options, rng)?;
    Ok(GroundStateRun { search, prepared })
}

/// `Π = Σ_{λ_j − λ₀ < ε} |ψ_j⟩⟨ψ_j|`.
pub fn projector_low_energy(h: &HermitianOperator, epsilon: f64) -> Result<ComplexMatrix> {
    let eig = h.eigendecomposition()?;
    let lambda0 = eig.min_eigenvalue();
    Ok(eig.map_spectrum(|l| if l - lambda0 < epsilon { 1.0 } else { 0.0 }))
}

/// `Tr(Πρ)`.
pub fn overlap(rho: &DensityMatrix, projector: &ComplexMatrix) -> Result<f64> {
    rho.expectation(projector)
}
