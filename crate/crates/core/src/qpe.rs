//! Phase-estimation statistics and the structured form of subroutine A.
//!
//! Subroutine A prepares a maximally entangled state between a system and a
//! conjugate register, runs `c` independent `t`-bit phase estimations on the
//! system and copies the median of the `c` outcomes into a fresh register.
//! Because the system register holds an equal-weight mixture of
//! eigenvectors, the median register is distributed as a mixture over `j`
//! with weight `1/N` of the median law of `c` draws from the QPE outcome law
//! of `λ_j`. [`SpectralProfile`] stores exactly that mixture.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::EigenDecomposition;
use crate::spectra::HermitianOperator;

/// Per-copy failure budget used throughout: a single QPE copy misses the
/// target window with probability below one quarter.
pub const DEFAULT_ZETA: f64 = 0.25;

/// Histogram values below this are treated as an exact point mass.
const GRID_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpeConfig {
    /// Clock bits per copy.
    pub t: u32,
    /// Number of copies entering the median; odd.
    pub c: usize,
    pub zeta: f64,
}

impl QpeConfig {
    pub fn new(t: u32, c: usize) -> Result<Self> {
        if t == 0 || t > 30 {
            return Err(Error::InvalidInput(format!("clock bits must be in 1..=30, got {t}")));
        }
        if c == 0 || c.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("copy count must be odd and positive, got {c}")));
        }
        Ok(Self { t, c, zeta: DEFAULT_ZETA })
    }

    /// `t = choose_t(m)` and `c = choose_c(δ)`.
    pub fn for_precision(m: u32, delta: f64) -> Result<Self> {
        Self::new(choose_t(m, DEFAULT_ZETA), choose_c(delta)?)
    }

    pub fn grid(&self) -> usize {
        1usize << self.t
    }

    /// Nominal controlled-evolution segments charged per application of A:
    /// `c · (2^t − 1)`.
    pub fn segments_per_a(&self) -> u64 {
        self.c as u64 * ((1u64 << self.t) - 1)
    }
}

/// Outcome law of phase estimation of `phi` on an `grid`-point register,
/// `Pr[x] = sin²(π u) / (grid² sin²(π u / grid))` with `u = grid·φ − x`.
pub fn phase_estimation_law(phi: f64, grid: usize) -> Vec<f64> {
    let g = grid as f64;
    let scaled = phi.rem_euclid(1.0) * g;
    let nearest = scaled.round();
    let mut pmf = vec![0.0; grid];
    if (scaled - nearest).abs() < GRID_SNAP {
        pmf[(nearest as usize) % grid] = 1.0;
        return pmf;
    }
    // sin² has period π, so the signed offset from the nearest integer keeps
    // full relative precision where the fractional part is close to one
    let num = (std::f64::consts::PI * (scaled - nearest)).sin().powi(2);
    for (x, p) in pmf.iter_mut().enumerate() {
        let mut u = scaled - x as f64;
        u -= g * (u / g).round();
        let den = g * (std::f64::consts::PI * u / g).sin();
        *p = num / (den * den);
    }
    pmf
}

/// Exact `t`-bit QPE outcome law for eigenphase `phi ∈ [0, 1)`.
pub fn qpe_distribution(phi: f64, t: u32) -> Vec<f64> {
    phase_estimation_law(phi, 1usize << t)
}

/// `Pr[Binomial(n, p) ≥ k]`.
pub fn binomial_upper_tail(n: usize, p: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    let q = 1.0 - p;
    let mut coeff = 1.0;
    let mut total = 0.0;
    for i in 0..=n {
        if i > 0 {
            coeff *= (n - i + 1) as f64 / i as f64;
        }
        if i >= k {
            total += coeff * p.powi(i as i32) * q.powi((n - i) as i32);
        }
    }
    total.min(1.0)
}

/// `Σ_{i=h}^{c} C(c,i) a^i b^{c−i}` with both `a` and `b = 1 − a` supplied
/// so that each side keeps full relative precision.
fn order_statistic_cdf(c: usize, h: usize, a: f64, b: f64) -> f64 {
    let mut coeff = 1.0;
    let mut total = 0.0;
    for i in 0..=c {
        if i > 0 {
            coeff *= (c - i + 1) as f64 / i as f64;
        }
        if i >= h {
            total += coeff * a.powi(i as i32) * b.powi((c - i) as i32);
        }
    }
    total
}

/// Law of the median (the `⌈c/2⌉`-th order statistic) of `c` independent
/// draws from `pmf`.
pub fn median_distribution(pmf: &[f64], c: usize) -> Result<Vec<f64>> {
    if c == 0 || c.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("copy count must be odd and positive, got {c}")));
    }
    if c == 1 {
        return Ok(pmf.to_vec());
    }
    let h = c.div_ceil(2);
    let len = pmf.len();
    let mut lower = vec![0.0; len];
    let mut upper = vec![0.0; len];
    let mut acc = 0.0;
    for (v, &p) in pmf.iter().enumerate() {
        acc += p;
        lower[v] = acc.min(1.0);
    }
    acc = 0.0;
    for v in (0..len).rev() {
        // upper[v] = Pr[X > v]
        upper[v] = acc.min(1.0);
        acc += pmf[v];
    }
    // G(v) = Pr[median ≤ v] and its complement computed separately
    let below: Vec<f64> = (0..len).map(|v| order_statistic_cdf(c, h, lower[v], upper[v])).collect();
    let above: Vec<f64> = (0..len)
        .map(|v| order_statistic_cdf(c, c + 1 - h, upper[v], lower[v]))
        .collect();
    let mut out = vec![0.0; len];
    for v in 0..len {
        let prev_below = if v == 0 { 0.0 } else { below[v - 1] };
        let prev_above = if v == 0 { 1.0 } else { above[v - 1] };
        let mass = if below[v] <= 0.5 {
            below[v] - prev_below
        } else {
            prev_above - above[v]
        };
        out[v] = mass.max(0.0);
    }
    Ok(out)
}

/// `m + ⌈log₂(2 + 1/(2ζ))⌉` clock bits for `m` bits of precision with
/// per-copy failure probability below `zeta`.
pub fn choose_t(m: u32, zeta: f64) -> u32 {
    let target = 2.0 + 1.0 / (2.0 * zeta);
    let mut extra = 0;
    while ((1u64 << extra) as f64) < target {
        extra += 1;
    }
    m + extra
}

/// Smallest odd `c` with `Pr[Binomial(c, 1/4) ≥ ⌈c/2⌉] < δ`.
pub fn choose_c(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!("failure budget must lie in (0, 1), got {delta}")));
    }
    let mut c = 1;
    while binomial_upper_tail(c, DEFAULT_ZETA, c.div_ceil(2)) >= delta {
        c += 2;
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub eigenvalue: f64,
    pub weight: f64,
    pub pmf: Vec<f64>,
}

/// Median-register law of `A|0⟩`: one entry per eigenvector.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    config: QpeConfig,
    entries: Vec<ProfileEntry>,
    decomposition: EigenDecomposition,
}

/// The median register's law; identical in shape to the per-copy profile.
pub type MedianProfile = SpectralProfile;

impl SpectralProfile {
    pub fn config(&self) -> QpeConfig {
        self.config
    }

    pub fn t(&self) -> u32 {
        self.config.t
    }

    pub fn entries(&self) -> &[ProfileEntry] {
        &self.entries
    }

    pub fn decomposition(&self) -> &EigenDecomposition {
        &self.decomposition
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// `Σ_j weight_j · pmf_j`.
    pub fn mixture(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.config.grid()];
        for e in &self.entries {
            for (o, &p) in out.iter_mut().zip(&e.pmf) {
                *o += e.weight * p;
            }
        }
        out
    }

    /// `Σ_j weight_j Σ_{x : mask(x)} pmf_j(x)`.
    pub fn mass_where(&self, mask: impl Fn(usize) -> bool) -> f64 {
        let selected: Vec<usize> = (0..self.config.grid()).filter(|&x| mask(x)).collect();
        self.entries
            .iter()
            .map(|e| e.weight * selected.iter().map(|&x| e.pmf[x]).sum::<f64>())
            .sum()
    }

    /// Per-entry masses `weight_j · Σ_{x : mask(x)} pmf_j(x)`.
    pub fn entry_masses(&self, mask: impl Fn(usize) -> bool) -> Vec<f64> {
        let selected: Vec<usize> = (0..self.config.grid()).filter(|&x| mask(x)).collect();
        self.entries
            .iter()
            .map(|e| e.weight * selected.iter().map(|&x| e.pmf[x]).sum::<f64>())
            .collect()
    }
}

/// Builds the structured profile from an existing eigendecomposition.
pub fn profile_from_decomposition(eig: EigenDecomposition, cfg: QpeConfig) -> Result<SpectralProfile> {
    let n = eig.dim();
    if let Some(&bad) = eig.eigenvalues().iter().find(|&&l| !(-GRID_SNAP..1.0).contains(&l)) {
        return Err(Error::SpectrumOutOfRange(bad));
    }
    let weight = 1.0 / n as f64;
    let build = |&lambda: &f64| -> Result<ProfileEntry> {
        let pmf = median_distribution(&qpe_distribution(lambda.max(0.0), cfg.t), cfg.c)?;
        Ok(ProfileEntry {
            eigenvalue: lambda,
            weight,
            pmf,
        })
    };
    let entries = if n * cfg.grid() >= 1 << 14 {
        eig.eigenvalues().par_iter().map(build).collect::<Result<Vec<_>>>()?
    } else {
        eig.eigenvalues().iter().map(build).collect::<Result<Vec<_>>>()?
    };
    Ok(SpectralProfile {
        config: cfg,
        entries,
        decomposition: eig,
    })
}

/// Diagonalizes `h` (spectrum in `[0, 1)`) and tabulates subroutine A.
pub fn build_profile(h: &HermitianOperator, cfg: QpeConfig) -> Result<SpectralProfile> {
    profile_from_decomposition(h.eigendecomposition()?, cfg)
}

/// `Σ_j weight_j Σ_{x/2^t < y} pmf_j(x)`.
pub fn probability_below(profile: &SpectralProfile, y: f64) -> f64 {
    let grid = profile.config.grid() as f64;
    profile.mass_where(|x| (x as f64) / grid < y)
}
