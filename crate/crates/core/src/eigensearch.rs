//! Minimum-eigenvalue binary search driven by amplitude estimation.
//!
//! The candidate `y` starts at `1/2`. Each step estimates the probability
//! that the median register of `A|0⟩` reads below `y` and moves `y` down by
//! `2^{-(i+1)}` when the estimate exceeds the threshold `q`, up otherwise.
//! `q` sits between the mass `(1−δ)/N` that a single eigenvalue below `y`
//! is guaranteed to contribute and the `(1−δ)/(2N)` that leakage from
//! eigenvalues above `y` can at most produce, with room for the amplitude
//! estimation error at grid size `M`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::amplitude::{
    choose_repeats, good_probability, qae_distribution, qae_error_bound, Predicate, QaeConfig, QaeLaw, QAE_SUCCESS,
};
use crate::circuit::FaithfulCircuit;
use crate::error::{Error, Result};
use crate::qpe::{build_profile, QpeConfig, SpectralProfile};
use crate::spectra::{HermitianOperator, QueryLedger, RescaleMap};

/// Smallest admissible search constant.
pub const MIN_K: u32 = 537;
pub const DEFAULT_NU: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub dim: usize,
    /// Precision bits; `ε = 2^-m`.
    pub m: u32,
    pub epsilon: f64,
    pub k: u32,
    pub delta: f64,
    /// Amplitude-estimation grid size.
    pub grid: usize,
    pub q: f64,
    pub qpe: QpeConfig,
    pub repeats: usize,
    pub nu: f64,
}

/// Smallest `m` with `2^-m ≤ ε`.
pub fn precision_bits(epsilon: f64) -> Result<u32> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("precision must lie in (0, 1), got {epsilon}")));
    }
    let mut m = 0;
    while 0.5f64.powi(m as i32) > epsilon {
        m += 1;
    }
    Ok(m)
}

impl SearchParams {
    /// Parameters for `m` bits of precision on an `dim × dim` input.
    pub fn from_bits(dim: usize, m: u32, nu: f64, k: u32) -> Result<Self> {
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::DimNotPowerOfTwo(dim));
        }
        if m == 0 || m > 24 {
            return Err(Error::InvalidInput(format!("precision bits must be in 1..=24, got {m}")));
        }
        if k < MIN_K {
            return Err(Error::InvalidInput(format!("search constant must be at least {MIN_K}, got {k}")));
        }
        let n = dim as f64;
        let kf = k as f64;
        let delta = 1.0 / (2.0 * n + 2.0);
        let raw = (kf * n / (1.0 - delta)).sqrt();
        let mut grid = raw.ceil() as usize;
        if grid % 2 == 1 {
            grid += 1;
        }
        let q = (1.0 - delta) / n * (0.5 + 2f64.sqrt() * PI / kf.sqrt() + PI * PI / kf);
        Ok(Self {
            dim,
            m,
            epsilon: 0.5f64.powi(m as i32),
            k,
            delta,
            grid,
            q,
            qpe: QpeConfig::for_precision(m, delta)?,
            repeats: choose_repeats(m, nu)?,
            nu,
        })
    }

    pub fn qae(&self) -> QaeConfig {
        QaeConfig {
            m: self.grid,
            repeats: self.repeats,
        }
    }

    /// Upper edge of the band where leakage alone can produce the good mass.
    pub fn low_mass(&self) -> f64 {
        (1.0 - self.delta) / (2.0 * self.dim as f64)
    }

    /// Mass guaranteed once one eigenvalue lies well below the candidate.
    pub fn high_mass(&self) -> f64 {
        (1.0 - self.delta) / self.dim as f64
    }
}

/// Parameters of the search for precision `ε`, confidence `ν` and the default constant.
pub fn derive_params(dim: usize, epsilon: f64, nu: f64) -> Result<SearchParams> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidInput(format!("precision must lie in (0, 1/2), got {epsilon}")));
    }
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::InvalidInput(format!("confidence must lie in (0, 1), got {nu}")));
    }
    SearchParams::from_bits(dim, precision_bits(epsilon)?, nu, MIN_K)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub i: u32,
    /// Candidate the predicate was evaluated at.
    pub y_prev: f64,
    /// Exact good-state probability (diagnostic only; the search never reads it).
    pub p_good: f64,
    pub p_tilde: f64,
    pub decision: Decision,
    pub y: f64,
    /// Whether `p_tilde` lies inside the amplitude-estimation error band.
    pub in_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub estimate: f64,
    pub epsilon: f64,
    pub params: SearchParams,
    pub trace: Vec<SearchStep>,
    pub ledger: QueryLedger,
}

/// Which simulator evaluates the good-state probability at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Closed-form outcome distributions.
    #[default]
    Structured,
    /// Explicit statevector of `A|0⟩`; small instances only.
    Faithful,
}

/// Runs the search on a prebuilt profile with a caller-chosen predicate family.
pub fn search_profile<R: Rng + ?Sized>(
    profile: &SpectralProfile,
    params: &SearchParams,
    predicate: impl Fn(f64) -> Predicate,
    rng: &mut R,
) -> Result<EstimationResult> {
    search_with(params, |y| Ok(good_probability(profile, &predicate(y))?.p_good), rng)
}

/// The search loop itself; `p_good_at(y)` supplies the exact probability
/// that the predicate at `y` accepts.
fn search_with<R: Rng + ?Sized>(
    params: &SearchParams,
    mut p_good_at: impl FnMut(f64) -> Result<f64>,
    rng: &mut R,
) -> Result<EstimationResult> {
    let qae = params.qae();
    let mut ledger = QueryLedger::new();
    let mut y = 0.5;
    let mut trace = Vec::with_capacity(params.m as usize);
    for i in 1..=params.m {
        let p_good = p_good_at(y)?;
        let p_tilde = boosted_estimate(p_good, &qae, rng)?;
        ledger.charge_a(qae.a_applications(), params.qpe.segments_per_a());
        let step = 0.5f64.powi(i as i32 + 1);
        let (decision, next) = if p_tilde > params.q {
            (Decision::Lower, y - step)
        } else {
            (Decision::Upper, y + step)
        };
        trace.push(SearchStep {
            i,
            y_prev: y,
            p_good,
            p_tilde,
            decision,
            y: next,
            in_band: (p_tilde - p_good).abs() <= qae_error_bound(p_good, qae.m),
        });
        y = next;
    }
    Ok(EstimationResult {
        estimate: y,
        epsilon: params.epsilon,
        params: *params,
        trace,
        ledger,
    })
}

fn boosted_estimate<R: Rng + ?Sized>(p_good: f64, qae: &QaeConfig, rng: &mut R) -> Result<f64> {
    crate::amplitude::boosted_qae(p_good, qae.m, qae.repeats, rng)
}

/// Estimates the smallest eigenvalue of `h` (spectrum in `(ε, 1−ε)`) to within `ε`.
pub fn eigenvalue_estimation<R: Rng + ?Sized>(
    h: &HermitianOperator,
    params: &SearchParams,
    rng: &mut R,
) -> Result<EstimationResult> {
    eigenvalue_estimation_on(h, params, Backend::Structured, rng)
}

/// [`eigenvalue_estimation`] with an explicit backend. Both backends yield
/// the same probabilities, so a fixed seed gives the same trace up to
/// floating-point rounding.
pub fn eigenvalue_estimation_on<R: Rng + ?Sized>(
    h: &HermitianOperator,
    params: &SearchParams,
    backend: Backend,
    rng: &mut R,
) -> Result<EstimationResult> {
    if h.dim() != params.dim {
        return Err(Error::DimensionMismatch(h.dim(), params.dim));
    }
    let t = params.qpe.t;
    match backend {
        Backend::Structured => {
            let profile = build_profile(h, params.qpe)?;
            search_profile(&profile, params, |y| Predicate::less_than(y, t), rng)
        }
        Backend::Faithful => {
            let circuit = FaithfulCircuit::new(h, params.qpe)?;
            let marginal = circuit.median_marginal(&circuit.prepare());
            search_with(
                params,
                |y| {
                    let chi = Predicate::less_than(y, t);
                    let p: f64 = marginal.iter().enumerate().filter(|(x, _)| chi.is_good(*x)).map(|(_, p)| p).sum();
                    Ok(p.clamp(0.0, 1.0))
                },
                rng,
            )
        }
    }
}

/// Outcome of checking a search trace against the exact smallest eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceCheck {
    /// Steps with `|y_i − λ₀| > 2^{-(i+1)} + ε/2`.
    pub envelope_violations: Vec<u32>,
    /// Steps whose estimate fell outside the error band.
    pub tail_events: Vec<u32>,
    /// Envelope violations not preceded (or accompanied) by a tail event.
    pub unexplained: Vec<u32>,
    pub final_error: f64,
}

impl TraceCheck {
    pub fn is_clean(&self) -> bool {
        self.envelope_violations.is_empty()
    }
}

/// Compares each step with the envelope `2^{-(i+1)} + ε/2`.
pub fn validate_trace(result: &EstimationResult, lambda0: f64) -> TraceCheck {
    let eps = result.epsilon;
    let mut check = TraceCheck {
        envelope_violations: Vec::new(),
        tail_events: Vec::new(),
        unexplained: Vec::new(),
        final_error: (result.estimate - lambda0).abs(),
    };
    for s in &result.trace {
        if !s.in_band {
            check.tail_events.push(s.i);
        }
        let envelope = 0.5f64.powi(s.i as i32 + 1) + eps / 2.0;
        if (s.y - lambda0).abs() > envelope + 1e-15 {
            check.envelope_violations.push(s.i);
            if check.tail_events.is_empty() {
                check.unexplained.push(s.i);
            }
        }
    }
    check
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralEstimate {
    pub estimate: f64,
    pub map: RescaleMap,
    pub scaled: EstimationResult,
}

/// Rescales `h` with `norm_estimate`, searches `m` bits on the rescaled
/// operator and maps the estimate back.
pub fn estimate_with_bits<R: Rng + ?Sized>(
    h: &HermitianOperator,
    m: u32,
    norm_estimate: f64,
    nu: f64,
    k: u32,
    rng: &mut R,
) -> Result<GeneralEstimate> {
    estimate_with_bits_on(h, m, norm_estimate, nu, k, Backend::Structured, rng)
}

pub fn estimate_with_bits_on<R: Rng + ?Sized>(
    h: &HermitianOperator,
    m: u32,
    norm_estimate: f64,
    nu: f64,
    k: u32,
    backend: Backend,
    rng: &mut R,
) -> Result<GeneralEstimate> {
    let (scaled_op, map) = crate::spectra::rescale_operator(h, norm_estimate)?;
    let params = SearchParams::from_bits(h.dim(), m, nu, k)?;
    let scaled = eigenvalue_estimation_on(&scaled_op, &params, backend, rng)?;
    Ok(GeneralEstimate {
        estimate: map.backward(scaled.estimate),
        map,
        scaled,
    })
}

/// Internal bits needed for precision `ε` after rescaling by `norm_estimate`.
pub fn rescaled_bits(epsilon: f64, norm_estimate: f64) -> Result<u32> {
    if !(norm_estimate > 0.0) || !norm_estimate.is_finite() {
        return Err(Error::InvalidNorm(norm_estimate));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("precision must be positive, got {epsilon}")));
    }
    precision_bits((epsilon / (2.0 * norm_estimate)).min(0.25))
}

/// Smallest eigenvalue of a general Hermitian `h` to within `ε`, given
/// `norm_estimate ≥ ‖h‖`. The internal precision is `ε / (2·norm_estimate)`.
pub fn estimate_general<R: Rng + ?Sized>(
    h: &HermitianOperator,
    epsilon: f64,
    norm_estimate: f64,
    nu: f64,
    rng: &mut R,
) -> Result<GeneralEstimate> {
    let m = rescaled_bits(epsilon, norm_estimate)?;
    estimate_with_bits(h, m, norm_estimate, nu, MIN_K, rng)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestResult {
    pub value: f64,
    /// Estimate of the smallest eigenvalue at or above 1/2, if any.
    pub above: Option<f64>,
    /// Estimate of the largest eigenvalue at or below 1/2, if any.
    pub below: Option<f64>,
    pub ledger: QueryLedger,
}

/// One-sided search over eigenvalues `≥ 1/2`. Emptiness is decided by one
/// boosted estimate at `y = 1`, using the same threshold as the search.
fn upper_half_search<R: Rng + ?Sized>(
    h: &HermitianOperator,
    params: &SearchParams,
    ledger: &mut QueryLedger,
    rng: &mut R,
) -> Result<Option<f64>> {
    let profile = build_profile(h, params.qpe)?;
    let t = params.qpe.t;
    let qae = params.qae();
    let p_all = good_probability(&profile, &Predicate::half_restricted_less_than(1.0, t))?.p_good;
    let probe = boosted_estimate(p_all, &qae, rng)?;
    ledger.charge_a(qae.a_applications(), profile.config().segments_per_a());
    if probe <= params.q {
        return Ok(None);
    }
    let result = search_profile(&profile, params, |y| Predicate::half_restricted_less_than(y, t), rng)?;
    ledger.absorb(&result.ledger);
    Ok(Some(result.estimate))
}

/// Eigenvalue of `h` closest to `1/2`.
pub fn find_nearest_to_half<R: Rng + ?Sized>(
    h: &HermitianOperator,
    params: &SearchParams,
    rng: &mut R,
) -> Result<NearestResult> {
    let mut ledger = QueryLedger::new();
    let above = upper_half_search(h, params, &mut ledger, rng)?;
    // eigenvalues λ ≤ 1/2 of h are eigenvalues 1 − λ ≥ 1/2 of I − h
    let mirrored = h.affine(-1.0, 1.0)?;
    let below = upper_half_search(&mirrored, params, &mut ledger, rng)?.map(|v| 1.0 - v);
    let value = match (above, below) {
        (Some(a), Some(b)) => {
            if (a - 0.5).abs() <= (0.5 - b).abs() {
                a
            } else {
                b
            }
        }
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(Error::NoEigenvalueInHalf),
    };
    Ok(NearestResult {
        value,
        above,
        below,
        ledger,
    })
}

/// Exact sidedness of a single amplitude estimation relative to `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidednessCheck {
    pub p_good: f64,
    /// The side of `q` on which the estimate should land.
    pub expect_above: bool,
    /// Number of in-band outcomes on the wrong side of `q`.
    pub in_band_wrong: usize,
    pub wrong_side_mass: f64,
}

pub fn sidedness(p_good: f64, params: &SearchParams) -> Result<SidednessCheck> {
    let law: QaeLaw = qae_distribution(p_good, params.grid)?;
    let expect_above = p_good > params.high_mass();
    let bound = qae_error_bound(p_good, params.grid);
    let wrong = |e: f64| if expect_above { e <= params.q } else { e > params.q };
    let in_band_wrong = law
        .outcomes()
        .filter(|&(e, mass)| mass > 0.0 && (e - p_good).abs() <= bound && wrong(e))
        .count();
    Ok(SidednessCheck {
        p_good,
        expect_above,
        in_band_wrong,
        wrong_side_mass: law.mass_where(wrong),
    })
}

/// Largest admissible wrong-side mass of a single estimate.
pub const MAX_WRONG_SIDE: f64 = 1.0 - QAE_SUCCESS;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_seed, seeded_rng};
    use proptest::prelude::*;
    use rand::Rng;

    fn diag(values: &[f64]) -> HermitianOperator {
        HermitianOperator::from_real_diagonal(values).unwrap()
    }

    #[test]
    fn faithful_backend_matches_structured() {
        let h = diag(&[0.3, 0.7]);
        let params = SearchParams::from_bits(2, 2, DEFAULT_NU, MIN_K).unwrap();
        let a = eigenvalue_estimation_on(&h, &params, Backend::Structured, &mut seeded_rng(5)).unwrap();
        let b = eigenvalue_estimation_on(&h, &params, Backend::Faithful, &mut seeded_rng(5)).unwrap();
        assert_eq!(a.estimate, b.estimate);
        for (x, y) in a.trace.iter().zip(&b.trace) {
            assert!((x.p_good - y.p_good).abs() < 1e-10);
        }
        assert!((a.estimate - 0.3).abs() <= 0.25);
    }

    #[test]
    fn params_for_eight() {
        let p = derive_params(8, 0.5f64.powi(6), 0.9).unwrap();
        assert!((p.delta - 1.0 / 18.0).abs() < 1e-16);
        assert_eq!(p.grid, 68);
        let oracle = 17.0 / 144.0 * (0.5 + 2f64.sqrt() * PI / 537f64.sqrt() + PI * PI / 537.0);
        assert!((p.q - oracle).abs() < 1e-15);
        assert!((p.q - 0.08383).abs() < 5e-6);
        assert_eq!(p.m, 6);
        assert_eq!(p.qpe.t, 8);
        assert_eq!(p.qpe.c, 9);
        assert!(derive_params(6, 0.1, 0.9).is_err());
        assert!(derive_params(8, 0.6, 0.9).is_err());
    }

    #[test]
    fn precision_bits_rounds_up() {
        assert_eq!(precision_bits(0.0625).unwrap(), 4);
        assert_eq!(precision_bits(0.06).unwrap(), 5);
        assert_eq!(precision_bits(0.01).unwrap(), 7);
    }

    #[test]
    fn degenerate_half() {
        let h = diag(&[0.5; 4]);
        let params = SearchParams::from_bits(4, 4, 0.9, MIN_K).unwrap();
        let r = eigenvalue_estimation(&h, &params, &mut seeded_rng(1)).unwrap();
        assert!((r.estimate - 0.5).abs() <= 0.0625);
    }

    #[test]
    fn reference_diagonal() {
        let h = diag(&[0.3789, 0.55, 0.7, 0.9]);
        let params = SearchParams::from_bits(4, 5, 0.9, MIN_K).unwrap();
        let r = eigenvalue_estimation(&h, &params, &mut seeded_rng(42)).unwrap();
        assert!((r.estimate - 0.3789).abs() <= 1.0 / 32.0, "{}", r.estimate);
        assert!(validate_trace(&r, 0.3789).is_clean());
    }

    #[test]
    fn trace_steps_halve_exactly() {
        let h = diag(&[0.2, 0.4, 0.6, 0.8]);
        let params = SearchParams::from_bits(4, 8, 0.9, MIN_K).unwrap();
        let r = eigenvalue_estimation(&h, &params, &mut seeded_rng(3)).unwrap();
        for s in &r.trace {
            assert_eq!((s.y - s.y_prev).abs(), 0.5f64.powi(s.i as i32 + 1));
            assert!(s.y > 0.0 && s.y < 1.0);
        }
        // m + 1 fractional bits at most
        let scaled = r.estimate * 2f64.powi(params.m as i32 + 1);
        assert_eq!(scaled, scaled.round());
        assert_eq!(r.ledger.a_applications, 8 * params.qae().a_applications());
    }

    #[test]
    fn deterministic_given_seed() {
        let h = diag(&[0.31, 0.47, 0.52, 0.9]);
        let params = SearchParams::from_bits(4, 6, 0.9, MIN_K).unwrap();
        let a = eigenvalue_estimation(&h, &params, &mut seeded_rng(7)).unwrap();
        let b = eigenvalue_estimation(&h, &params, &mut seeded_rng(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn envelope_on_random_diagonals() {
        let params = SearchParams::from_bits(8, 6, 0.9, MIN_K).unwrap();
        let eps = params.epsilon;
        for trial in 0..50 {
            let mut rng = seeded_rng(derive_seed(99, trial));
            let values: Vec<f64> = (0..8).map(|_| rng.random_range(eps..1.0 - eps)).collect();
            let lambda0 = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let r = eigenvalue_estimation(&diag(&values), &params, &mut rng).unwrap();
            let check = validate_trace(&r, lambda0);
            assert!(check.unexplained.is_empty(), "trial {trial}: {check:?}");
        }
    }

    #[test]
    fn general_input_two_by_two() {
        let h = diag(&[-1.0, 1.0]);
        let r = estimate_general(&h, 0.1, 2.0, 0.9, &mut seeded_rng(5)).unwrap();
        assert!((r.estimate + 1.0).abs() <= 0.1, "{}", r.estimate);
        assert!(matches!(
            estimate_general(&h, 0.1, 0.0, 0.9, &mut seeded_rng(5)),
            Err(Error::InvalidNorm(_))
        ));
    }

    #[test]
    fn general_matches_direct_when_shift_is_benign() {
        let h = diag(&[0.3, 0.6]);
        let general = estimate_with_bits(&h, 5, 1.0, 0.9, MIN_K, &mut seeded_rng(4)).unwrap();
        assert!((general.estimate - 0.3).abs() <= 2.0 / 32.0);
    }

    #[test]
    fn nearest_examples() {
        let params = SearchParams::from_bits(2, 5, 0.9, MIN_K).unwrap();
        let r = find_nearest_to_half(&diag(&[0.3, 0.8]), &params, &mut seeded_rng(1)).unwrap();
        assert!((r.value - 0.3).abs() <= 1.0 / 32.0, "{r:?}");
        assert!((r.above.unwrap() - 0.8).abs() <= 1.0 / 32.0);

        let r = find_nearest_to_half(&diag(&[0.5, 0.5]), &params, &mut seeded_rng(2)).unwrap();
        assert!((r.value - 0.5).abs() <= 1.0 / 32.0);

        let r = find_nearest_to_half(&diag(&[0.6, 0.9]), &params, &mut seeded_rng(3)).unwrap();
        assert!((r.value - 0.6).abs() <= 1.0 / 32.0);
        assert_eq!(r.below, None);
    }

    #[test]
    fn sidedness_at_reference_grid() {
        let params = SearchParams::from_bits(8, 6, 0.9, MIN_K).unwrap();
        for p in [0.0, 0.01, 0.05, params.low_mass() * 0.999, params.high_mass() * 1.001, 0.2, 0.5, 1.0] {
            let s = sidedness(p, &params).unwrap();
            assert_eq!(s.in_band_wrong, 0, "{p}");
            assert!(s.wrong_side_mass <= MAX_WRONG_SIDE, "{p}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn search_is_deterministic(seed in any::<u64>()) {
            let h = diag(&[0.2, 0.35, 0.8, 0.9]);
            let params = SearchParams::from_bits(4, 5, 0.9, MIN_K).unwrap();
            let a = eigenvalue_estimation(&h, &params, &mut seeded_rng(seed)).unwrap();
            let b = eigenvalue_estimation(&h, &params, &mut seeded_rng(seed)).unwrap();
            prop_assert_eq!(a.trace, b.trace);
        }

        #[test]
        fn envelope_holds_when_in_band(seed in any::<u64>()) {
            let params = SearchParams::from_bits(4, 5, 0.9, MIN_K).unwrap();
            let eps = params.epsilon;
            let mut rng = seeded_rng(seed);
            let values: Vec<f64> = (0..4).map(|_| rng.random_range(eps..1.0 - eps)).collect();
            let lambda0 = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let r = eigenvalue_estimation(&diag(&values), &params, &mut rng).unwrap();
            let check = validate_trace(&r, lambda0);
            if check.tail_events.is_empty() {
                prop_assert!(check.envelope_violations.is_empty());
                prop_assert!(check.final_error <= eps);
            }
        }

        #[test]
        fn in_band_estimates_fall_on_correct_side(frac in 0.0f64..1.0, high in any::<bool>()) {
            let params = SearchParams::from_bits(8, 6, 0.9, MIN_K).unwrap();
            let p = if high {
                params.high_mass() + (1.0 - params.high_mass()) * frac.max(1e-9)
            } else {
                params.low_mass() * frac
            };
            let s = sidedness(p, &params).unwrap();
            prop_assert_eq!(s.in_band_wrong, 0);
        }
    }
}
