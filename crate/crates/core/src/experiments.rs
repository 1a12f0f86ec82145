//! Seeded experiment drivers. Sweeps run trials in parallel with one
//! derived seed per trial index, so results do not depend on scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensearch::{eigenvalue_estimation, validate_trace, SearchParams, TraceCheck};
use crate::error::Result;
use crate::qpe::{median_distribution, phase_estimation_law};
use crate::rng::{derive_seed, seeded_rng};
use crate::spectra::HermitianOperator;

/// Outcome distribution of `t`-bit phase estimation with a median over `c`
/// copies, for each `c` in `copies`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpeTable {
    pub phase: f64,
    pub t: u32,
    pub copies: Vec<usize>,
    /// `pmf[j][x]` for `copies[j]`.
    pub pmf: Vec<Vec<f64>>,
}

impl QpeTable {
    pub fn x_value(&self, x: usize) -> f64 {
        x as f64 / (1usize << self.t) as f64
    }

    pub fn probability_at(&self, copies: usize, value: f64) -> Option<f64> {
        let j = self.copies.iter().position(|&c| c == copies)?;
        let x = (value * (1usize << self.t) as f64).round() as usize;
        self.pmf[j].get(x).copied()
    }
}

pub fn qpe_table(phase: f64, t: u32, copies: &[usize]) -> Result<QpeTable> {
    let single = phase_estimation_law(phase, 1usize << t);
    let pmf = copies
        .iter()
        .map(|&c| median_distribution(&single, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(QpeTable {
        phase,
        t,
        copies: copies.to_vec(),
        pmf,
    })
}

/// Diagonal test matrix with eigenvalues uniform in `(ε, 1 − ε)`.
pub fn random_diagonal<R: Rng + ?Sized>(n: usize, epsilon: f64, rng: &mut R) -> Result<(HermitianOperator, f64)> {
    let values: Vec<f64> = (0..n).map(|_| rng.random_range(epsilon..1.0 - epsilon)).collect();
    let lambda0 = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((HermitianOperator::from_real_diagonal(&values)?, lambda0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTrace {
    pub trial: usize,
    pub lambda0: f64,
    /// `|y_i − λ₀|` after steps `i = 1, …, m`.
    pub errors: Vec<f64>,
    pub check: TraceCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub params: SearchParams,
    pub trials: Vec<TrialTrace>,
    pub average: Vec<f64>,
    pub maximum: Vec<f64>,
    /// `2^{-(i+1)} + ε/2`.
    pub envelope: Vec<f64>,
}

impl ConvergenceReport {
    pub fn envelope_violations(&self) -> usize {
        self.trials.iter().map(|t| t.check.envelope_violations.len()).sum()
    }

    pub fn unexplained_violations(&self) -> usize {
        self.trials.iter().map(|t| t.check.unexplained.len()).sum()
    }

    pub fn worst_final_error(&self) -> f64 {
        self.trials.iter().map(|t| t.check.final_error).fold(0.0, f64::max)
    }
}

/// Runs the search on `trials` random diagonal matrices.
pub fn convergence_sweep(params: &SearchParams, trials: usize, seed: u64) -> Result<ConvergenceReport> {
    let runs = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seeded_rng(derive_seed(seed, trial as u64));
            let (h, lambda0) = random_diagonal(params.dim, params.epsilon, &mut rng)?;
            let result = eigenvalue_estimation(&h, params, &mut rng)?;
            Ok(TrialTrace {
                trial,
                lambda0,
                errors: result.trace.iter().map(|s| (s.y - lambda0).abs()).collect(),
                check: validate_trace(&result, lambda0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let steps = params.m as usize;
    let count = runs.len().max(1) as f64;
    let average = (0..steps).map(|i| runs.iter().map(|r| r.errors[i]).sum::<f64>() / count).collect();
    let maximum = (0..steps).map(|i| runs.iter().map(|r| r.errors[i]).fold(0.0, f64::max)).collect();
    let envelope = (1..=steps)
        .map(|i| 0.5f64.powi(i as i32 + 1) + params.epsilon / 2.0)
        .collect();
    Ok(ConvergenceReport {
        params: *params,
        trials: runs,
        average,
        maximum,
        envelope,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub grid: usize,
    pub a_applications: u64,
    pub evolution_segments: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub m: u32,
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `log a_applications` against `log N`.
    pub exponent: f64,
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// One search per dimension at fixed `m` bits, reading the ledger.
pub fn scaling_sweep(dims: &[usize], m: u32, nu: f64, k: u32, seed: u64) -> Result<ScalingReport> {
    let points = dims
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let params = SearchParams::from_bits(n, m, nu, k)?;
            let mut rng = seeded_rng(derive_seed(seed, i as u64));
            let (h, _) = random_diagonal(n, params.epsilon, &mut rng)?;
            let result = eigenvalue_estimation(&h, &params, &mut rng)?;
            Ok(ScalingPoint {
                n,
                grid: params.grid,
                a_applications: result.ledger.a_applications,
                evolution_segments: result.ledger.evolution_segments,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lx: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| (p.a_applications as f64).ln()).collect();
    Ok(ScalingReport {
        m,
        exponent: fit_slope(&lx, &ly),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensearch::{DEFAULT_NU, MIN_K};

    #[test]
    fn table_point_mass() {
        let t = qpe_table(0.375, 6, &[1]).unwrap();
        assert_eq!(t.probability_at(1, 0.375), Some(1.0));
        assert_eq!(t.pmf[0].iter().filter(|&&p| p > 0.0).count(), 1);
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let params = SearchParams::from_bits(4, 4, DEFAULT_NU, MIN_K).unwrap();
        let a = convergence_sweep(&params, 12, 3).unwrap();
        let b = convergence_sweep(&params, 12, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.trials.iter().enumerate().all(|(i, t)| t.trial == i));
        assert_eq!(a.envelope.len(), 4);
        assert!(a.maximum.iter().zip(&a.average).all(|(m, v)| m >= v));
    }

    #[test]
    fn slope_of_power_law() {
        let x: Vec<f64> = [1.0f64, 2.0, 3.0].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = [1.0f64, 2.0, 3.0].iter().map(|v| (5.0 * v.powf(0.5)).ln()).collect();
        assert!((fit_slope(&x, &y) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn scaling_ledger_formula() {
        let report = scaling_sweep(&[4, 8], 4, DEFAULT_NU, MIN_K, 1).unwrap();
        for p in &report.points {
            let params = SearchParams::from_bits(p.n, 4, DEFAULT_NU, MIN_K).unwrap();
            let per_step = params.repeats as u64 * (2 * params.grid as u64 - 1);
            assert_eq!(p.a_applications, 4 * per_step);
        }
    }
}
