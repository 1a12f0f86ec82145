//! Amplitude estimation simulated through its exact outcome law.
//!
//! For a good-state probability `p_g = sin²θ` the Grover operator has
//! eigenphases `±θ/π` on the two-dimensional subspace spanned by `A|0⟩`, so
//! an `M`-point phase estimation returns `y` with probability
//! `½ F_M(Mθ/π − y) + ½ F_M(−Mθ/π − y)`, where `F_M` is the phase-estimation
//! kernel. The estimate is `sin²(πy/M)`; outcomes `y` and `M − y` coincide
//! and are folded onto `y ∈ {0, …, M/2}`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qpe::{binomial_upper_tail, median_distribution, phase_estimation_law, SpectralProfile};

/// Probability that a single amplitude estimation lands inside its error band.
pub const QAE_SUCCESS: f64 = 8.0 / (PI * PI);

/// Distance below which `Mθ/π` counts as lying on the outcome grid.
const ON_GRID: f64 = 1e-12;

/// Good/bad classification of `t`-bit median-register strings, read as the
/// dyadic value `x / 2^t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PredicateKind {
    /// `x/2^t < y`.
    LessThan { y: f64 },
    /// `|x/2^t − θ₀| < ε/2`, with `θ₀` snapped to the `t`-bit grid.
    Window { theta0: f64, epsilon: f64 },
    /// `x/2^t < y` and the leading bit of `x` is set.
    HalfRestrictedLessThan { y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub kind: PredicateKind,
    pub t: u32,
}

impl Predicate {
    pub fn less_than(y: f64, t: u32) -> Self {
        Self {
            kind: PredicateKind::LessThan { y },
            t,
        }
    }

    pub fn window(theta0: f64, epsilon: f64, t: u32) -> Self {
        Self {
            kind: PredicateKind::Window { theta0, epsilon },
            t,
        }
    }

    pub fn half_restricted_less_than(y: f64, t: u32) -> Self {
        Self {
            kind: PredicateKind::HalfRestrictedLessThan { y },
            t,
        }
    }

    pub fn is_good(&self, x: usize) -> bool {
        let grid = (1u64 << self.t) as f64;
        let value = x as f64 / grid;
        match self.kind {
            PredicateKind::LessThan { y } => value < y,
            PredicateKind::Window { theta0, epsilon } => {
                let snapped = (theta0 * grid).round() / grid;
                (value - snapped).abs() < epsilon / 2.0
            }
            PredicateKind::HalfRestrictedLessThan { y } => x >> (self.t - 1) == 1 && value < y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSplit {
    pub p_good: f64,
    pub p_bad: f64,
}

impl AmplitudeSplit {
    pub fn new(p_good: f64) -> Self {
        let p_good = p_good.clamp(0.0, 1.0);
        Self {
            p_good,
            p_bad: 1.0 - p_good,
        }
    }
}

/// Good-state probability of `A|0⟩` when `χ` is applied to the median register.
pub fn good_probability(profile: &SpectralProfile, chi: &Predicate) -> Result<AmplitudeSplit> {
    if chi.t != profile.t() {
        return Err(Error::BitWidthMismatch {
            predicate: chi.t,
            register: profile.t(),
        });
    }
    Ok(AmplitudeSplit::new(profile.mass_where(|x| chi.is_good(x))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaeConfig {
    /// Grid size of the phase estimation on the Grover operator; even.
    pub m: usize,
    /// Independent repetitions entering the median; odd.
    pub repeats: usize,
}

impl QaeConfig {
    pub fn new(m: usize, repeats: usize) -> Result<Self> {
        if m < 2 || m % 2 == 1 {
            return Err(Error::InvalidInput(format!("grid size must be even and at least 2, got {m}")));
        }
        if repeats == 0 || repeats.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("repeat count must be odd, got {repeats}")));
        }
        Ok(Self { m, repeats })
    }

    /// Applications of A or A† per boosted estimate: each estimate runs
    /// `M − 1` Grover iterations of two applications each, plus the initial
    /// preparation.
    pub fn a_applications(&self) -> u64 {
        self.repeats as u64 * (2 * self.m as u64 - 1)
    }
}

/// Exact outcome law of one amplitude estimation, on the folded grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QaeLaw {
    m: usize,
    masses: Vec<f64>,
}

impl QaeLaw {
    pub fn m(&self) -> usize {
        self.m
    }

    /// `masses[y]` for `y = 0, …, M/2`.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn estimate(&self, y: usize) -> f64 {
        estimate_at(y, self.m)
    }

    /// `(estimate, mass)` pairs in increasing estimate order.
    pub fn outcomes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.masses.iter().enumerate().map(|(y, &p)| (self.estimate(y), p))
    }

    /// Total mass of outcomes satisfying `pred`.
    pub fn mass_where(&self, pred: impl Fn(f64) -> bool) -> f64 {
        self.outcomes().filter(|&(e, _)| pred(e)).map(|(_, p)| p).sum()
    }

    /// Law of the median of `r` independent estimates.
    pub fn boosted(&self, r: usize) -> Result<QaeLaw> {
        Ok(QaeLaw {
            m: self.m,
            masses: median_distribution(&self.masses, r)?,
        })
    }

    /// Inverse-CDF draw of a grid index.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (y, &p) in self.masses.iter().enumerate() {
            acc += p;
            if u < acc {
                return y;
            }
        }
        // u fell in the rounding gap above the total mass
        self.masses.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

fn estimate_at(y: usize, m: usize) -> f64 {
    (PI * y as f64 / m as f64).sin().powi(2)
}

fn check_grid(m: usize) -> Result<()> {
    if m < 2 || m % 2 == 1 {
        return Err(Error::InvalidInput(format!("grid size must be even and at least 2, got {m}")));
    }
    Ok(())
}

/// Exact law of the amplitude-estimation output for `p_g` on an `M`-point grid.
pub fn qae_distribution(p_g: f64, m: usize) -> Result<QaeLaw> {
    check_grid(m)?;
    if !(0.0..=1.0).contains(&p_g) {
        return Err(Error::InvalidInput(format!("probability must lie in [0, 1], got {p_g}")));
    }
    let omega = p_g.sqrt().asin() / PI;
    let scaled = m as f64 * omega;
    let mut folded = vec![0.0; m / 2 + 1];
    let fold = |y: usize| y.min(m - y);
    if (scaled - scaled.round()).abs() < ON_GRID {
        folded[fold((scaled.round() as usize) % m)] = 1.0;
        return Ok(QaeLaw { m, masses: folded });
    }
    let plus = phase_estimation_law(omega, m);
    let minus = phase_estimation_law(1.0 - omega, m);
    for y in 0..m {
        folded[fold(y)] += 0.5 * (plus[y] + minus[y]);
    }
    Ok(QaeLaw { m, masses: folded })
}

/// One draw from the amplitude-estimation output law.
pub fn qae_sample<R: Rng + ?Sized>(p_g: f64, m: usize, rng: &mut R) -> Result<f64> {
    let law = qae_distribution(p_g, m)?;
    Ok(law.estimate(law.sample_index(rng)))
}

/// `2π√(p(1−p))/M + π²/M²`.
pub fn qae_error_bound(p_g: f64, m: usize) -> f64 {
    let mf = m as f64;
    2.0 * PI * (p_g * (1.0 - p_g)).max(0.0).sqrt() / mf + PI * PI / (mf * mf)
}

/// Median of `r` independent amplitude estimations.
pub fn boosted_qae<R: Rng + ?Sized>(p_g: f64, m: usize, r: usize, rng: &mut R) -> Result<f64> {
    QaeConfig::new(m, r)?;
    let law = qae_distribution(p_g, m)?;
    let mut draws: Vec<usize> = (0..r).map(|_| law.sample_index(rng)).collect();
    draws.sort_unstable();
    Ok(law.estimate(draws[r / 2]))
}

/// Smallest odd `r` for which the median of `r` estimates leaves its band
/// with probability at most `1 − ν^{1/steps}`, so that all `steps`
/// boosted estimates succeed jointly with probability at least `ν`.
pub fn choose_repeats(steps: u32, nu: f64) -> Result<usize> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::InvalidInput(format!("confidence must lie in (0, 1), got {nu}")));
    }
    let budget = 1.0 - nu.powf(1.0 / steps.max(1) as f64);
    let mut r = 1;
    while binomial_upper_tail(r, 1.0 - QAE_SUCCESS, r.div_ceil(2)) > budget {
        r += 2;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpe::{build_profile, probability_below, QpeConfig};
    use crate::rng::seeded_rng;
    use crate::spectra::HermitianOperator;
    use proptest::prelude::*;

    fn band_mass(law: &QaeLaw, p: f64) -> f64 {
        let bound = qae_error_bound(p, law.m());
        law.mass_where(|e| (e - p).abs() <= bound)
    }

    #[test]
    fn predicate_semantics() {
        let lt = Predicate::less_than(0.375, 6);
        assert!(lt.is_good(23) && !lt.is_good(24));
        let half = Predicate::half_restricted_less_than(0.75, 3);
        assert!(!half.is_good(3) && half.is_good(4) && half.is_good(5) && !half.is_good(6));
        // θ₀ = 0.38 snaps to 24/64, window half-width 1/32 = 2 bins
        let w = Predicate::window(0.38, 1.0 / 16.0, 6);
        let good: Vec<usize> = (0..64).filter(|&x| w.is_good(x)).collect();
        assert_eq!(good, vec![23, 24, 25]);
    }

    #[test]
    fn good_probability_examples() {
        let h = HermitianOperator::from_real_diagonal(&[0.375, 0.375]).unwrap();
        let profile = build_profile(&h, QpeConfig::new(6, 1).unwrap()).unwrap();
        assert_eq!(good_probability(&profile, &Predicate::less_than(1.0, 6)).unwrap().p_good, 1.0);
        let w = Predicate::window(0.375, 1.0 / 16.0, 6);
        assert_eq!(good_probability(&profile, &w).unwrap().p_good, 1.0);
        assert_eq!(
            good_probability(&profile, &Predicate::less_than(0.5, 5)).unwrap_err(),
            Error::BitWidthMismatch { predicate: 5, register: 6 }
        );
    }

    #[test]
    fn reference_instance_below_half() {
        let h = HermitianOperator::from_real_diagonal(&[97.0 / 256.0; 2]).unwrap();
        let profile = build_profile(&h, QpeConfig::new(6, 5).unwrap()).unwrap();
        let p = good_probability(&profile, &Predicate::less_than(0.5, 6)).unwrap().p_good;
        // the median of five lies below 1/2 iff at least three draws do
        let single: f64 = crate::qpe::qpe_distribution(97.0 / 256.0, 6)[..32].iter().sum();
        let oracle = binomial_upper_tail(5, single, 3);
        assert!((p - oracle).abs() < 1e-12, "{p} vs {oracle}");
    }

    #[test]
    fn degenerate_laws() {
        let zero = qae_distribution(0.0, 68).unwrap();
        assert_eq!(zero.masses()[0], 1.0);
        let j = 11;
        let p = (PI * j as f64 / 68.0).sin().powi(2);
        let law = qae_distribution(p, 68).unwrap();
        assert!((law.masses()[j] - 1.0).abs() < 1e-15);
        let mut rng = seeded_rng(5);
        assert_eq!(qae_sample(0.0, 68, &mut rng).unwrap(), 0.0);
        assert_eq!(qae_sample(p, 68, &mut rng).unwrap(), law.estimate(j));
        assert_eq!(boosted_qae(p, 68, 7, &mut rng).unwrap(), law.estimate(j));
        assert!(qae_distribution(0.5, 67).is_err());
    }

    #[test]
    fn error_bound_examples() {
        assert!((qae_error_bound(0.0, 68) - PI * PI / 68.0f64.powi(2)).abs() < 1e-16);
        assert!((qae_error_bound(0.5, 100) - 0.03240).abs() < 1e-5);
    }

    #[test]
    fn failure_mass_below_complement_at_reference_point() {
        let law = qae_distribution(0.1, 68).unwrap();
        assert!((law.masses().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(1.0 - band_mass(&law, 0.1) <= 1.0 - QAE_SUCCESS);
    }

    #[test]
    fn empirical_law_matches_exact() {
        let law = qae_distribution(0.1, 68).unwrap();
        let trials = 100_000;
        let mut counts = vec![0usize; law.masses().len()];
        let mut rng = seeded_rng(2024);
        for _ in 0..trials {
            counts[law.sample_index(&mut rng)] += 1;
        }
        for (y, &p) in law.masses().iter().enumerate() {
            let expected = p * trials as f64;
            let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
            assert!((counts[y] as f64 - expected).abs() <= 3.0 * sigma + 1.0, "bin {y}");
        }
        let a = qae_sample(0.1, 68, &mut seeded_rng(9)).unwrap();
        let b = qae_sample(0.1, 68, &mut seeded_rng(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn boosted_single_repeat_is_plain() {
        let a = boosted_qae(0.1, 68, 1, &mut seeded_rng(3)).unwrap();
        let b = qae_sample(0.1, 68, &mut seeded_rng(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn boosted_wrong_side_mass_bounded_by_binomial_tail() {
        let p = 0.1;
        let law = qae_distribution(p, 68).unwrap();
        let bound = qae_error_bound(p, 68);
        let boosted = law.boosted(7).unwrap();
        let tail = binomial_upper_tail(7, 1.0 - QAE_SUCCESS, 4);
        for threshold in [p + bound, p + 1.5 * bound, p - bound, p - 1.2 * bound] {
            let wrong = if threshold > p {
                boosted.mass_where(|e| e >= threshold)
            } else {
                boosted.mass_where(|e| e <= threshold)
            };
            assert!(wrong <= tail, "{threshold}: {wrong} > {tail}");
        }
    }

    #[test]
    fn boosted_sampler_matches_boosted_law() {
        let law = qae_distribution(0.3, 20).unwrap();
        let boosted = law.boosted(5).unwrap();
        let mut rng = seeded_rng(77);
        let trials = 40_000;
        let hits = (0..trials)
            .filter(|_| boosted_qae(0.3, 20, 5, &mut rng).unwrap() == law.estimate(4))
            .count();
        let p = boosted.masses()[4];
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((hits as f64 - p * trials as f64).abs() <= 4.0 * sigma);
    }

    #[test]
    fn repeats_rule() {
        assert_eq!(choose_repeats(6, 0.9).unwrap(), choose_repeats(6, 0.9).unwrap());
        let r = choose_repeats(6, 0.9).unwrap();
        assert!(r % 2 == 1);
        let budget = 1.0 - 0.9f64.powf(1.0 / 6.0);
        assert!(binomial_upper_tail(r, 1.0 - QAE_SUCCESS, r.div_ceil(2)) <= budget);
        assert!(binomial_upper_tail(r - 2, 1.0 - QAE_SUCCESS, (r - 1) / 2) > budget);
    }

    proptest! {
        #[test]
        fn concentration(p in 0.0f64..=1.0, half_m in 1usize..=80) {
            let m = 2 * half_m;
            let law = qae_distribution(p, m).unwrap();
            prop_assert!((law.masses().iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(band_mass(&law, p) >= QAE_SUCCESS - 1e-12);
        }

        #[test]
        fn mirror_symmetry(p in 0.0f64..=1.0, half_m in 1usize..=60) {
            let m = 2 * half_m;
            let a = qae_distribution(p, m).unwrap();
            let b = qae_distribution(1.0 - p, m).unwrap();
            let len = a.masses().len();
            for y in 0..len {
                prop_assert!((a.masses()[y] - b.masses()[len - 1 - y]).abs() < 1e-9);
            }
        }

        #[test]
        fn predicate_consistency(y in 0.0f64..=1.0, seed in any::<u64>()) {
            use rand::Rng;
            let mut rng = seeded_rng(seed);
            let diag: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
            let h = HermitianOperator::from_real_diagonal(&diag).unwrap();
            let profile = build_profile(&h, QpeConfig::new(5, 3).unwrap()).unwrap();
            let split = good_probability(&profile, &Predicate::less_than(y, 5)).unwrap();
            prop_assert_eq!(split.p_good, probability_below(&profile, y).clamp(0.0, 1.0));
        }

        #[test]
        fn boosting_monotone(p in 0.0f64..=1.0) {
            let m = 68;
            let law = qae_distribution(p, m).unwrap();
            let bound = qae_error_bound(p, m);
            let mut last = f64::INFINITY;
            for r in [1, 3, 5, 7, 9] {
                let b = law.boosted(r).unwrap();
                let wrong = b.mass_where(|e| e > p + bound);
                prop_assert!(wrong <= last + 1e-12);
                last = wrong;
            }
        }
    }
}
