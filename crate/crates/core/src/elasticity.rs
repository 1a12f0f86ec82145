//! Fundamental mode of a composite string.
//!
//! The string occupies `[−1, 1]` with Dirichlet ends and a stiffer insert
//! `[z₀ − d/2, z₀ + d/2]` where the coefficient is `ε̃_r` instead of one.
//! Two solvers are provided: a tent-function finite-element operator `D`
//! with entries `±h⁻¹/ε_r` evaluated at element midpoints, and a
//! semi-analytic solution that matches sinusoids in the three uniform
//! segments through value continuity and continuity of `(1/ε_r)Φ'`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::eigensearch::{estimate_with_bits, DEFAULT_NU, MIN_K};
use crate::error::{Error, Result};
use crate::groundstate::{overlap, prepare_ground_state, projector_low_energy, PrepOptions};
use crate::numerics::{fidelity, DensityMatrix, C64};
use crate::spectra::{eigenvalue_window_check, gershgorin_bound, rescale_operator, HermitianOperator, QueryLedger, Triplet};

const ALIGN_TOL: f64 = 1e-12;
const SCAN_SUBDIVISIONS: usize = 10_000;
const SCAN_NEAR: f64 = -1e-6;
const BISECTION_TOL: f64 = 1e-12;
/// Points used to find `max |Φ|` for normalization.
const NORMALIZATION_SAMPLES: usize = 4001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StringGeometry {
    pub z0: f64,
    pub d: f64,
    pub eps_r: f64,
}

impl StringGeometry {
    pub fn new(z0: f64, d: f64, eps_r: f64) -> Result<Self> {
        let g = Self { z0, d, eps_r };
        if !(d >= 0.0) || !(eps_r >= 1.0) || !eps_r.is_finite() {
            return Err(Error::InvalidInput(format!(
                "insert width must be nonnegative and ε_r ≥ 1, got d = {d}, ε_r = {eps_r}"
            )));
        }
        if !(g.left() > -1.0 && g.right() < 1.0) {
            return Err(Error::InvalidInput(format!(
                "insert [{}, {}] must lie inside (−1, 1)",
                g.left(),
                g.right()
            )));
        }
        Ok(g)
    }

    /// Geometry of the reference composite string.
    pub fn reference() -> Self {
        Self {
            z0: -6.0 / 17.0,
            d: 10.0 / 17.0,
            eps_r: 5.0,
        }
    }

    pub fn homogeneous() -> Self {
        Self {
            z0: 0.0,
            d: 0.0,
            eps_r: 1.0,
        }
    }

    pub fn left(&self) -> f64 {
        self.z0 - self.d / 2.0
    }

    pub fn right(&self) -> f64 {
        self.z0 + self.d / 2.0
    }
}

/// Coefficient `ε_r(z)`: `ε̃_r` on the closed insert, one elsewhere.
pub fn coefficient(z: f64, g: &StringGeometry) -> f64 {
    if (g.left()..=g.right()).contains(&z) {
        g.eps_r
    } else {
        1.0
    }
}

/// `N` interior points `p_k = −1 + k h`, `h = 2/(N+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            h: 2.0 / (n as f64 + 1.0),
        }
    }

    /// `p_k` for `k = 0, …, N + 1`; `p_0` and `p_{N+1}` are the ends.
    pub fn point(&self, k: usize) -> f64 {
        -1.0 + k as f64 * self.h
    }

    pub fn interior(&self) -> Vec<f64> {
        (1..=self.n).map(|k| self.point(k)).collect()
    }

    /// Checks that both insert ends coincide with interior grid points.
    pub fn check_alignment(&self, g: &StringGeometry) -> Result<()> {
        if g.eps_r == 1.0 || g.d == 0.0 {
            return Ok(());
        }
        for end in [g.left(), g.right()] {
            let k = (end + 1.0) / self.h;
            let nearest = k.round();
            if (k - nearest).abs() * self.h > ALIGN_TOL || nearest < 1.0 || nearest > self.n as f64 {
                return Err(Error::InterfaceMisaligned(end));
            }
        }
        Ok(())
    }
}

/// Finite-element operator `D` (tridiagonal, exactly symmetric).
pub fn assemble_d(n: usize, g: &StringGeometry) -> Result<HermitianOperator> {
    let grid = Grid::new(n);
    grid.check_alignment(g)?;
    let h = grid.h;
    let stiffness = |k: usize| 1.0 / (h * coefficient(grid.point(k) + h / 2.0, g));
    let mut triplets = Vec::with_capacity(2 * n);
    for r in 0..n {
        // row r couples elements [p_r, p_{r+1}] and [p_{r+1}, p_{r+2}]
        triplets.push(Triplet {
            row: r,
            col: r,
            value: C64::new(-stiffness(r) - stiffness(r + 1), 0.0),
        });
        if r + 1 < n {
            triplets.push(Triplet {
                row: r,
                col: r + 1,
                value: C64::new(stiffness(r + 1), 0.0),
            });
        }
    }
    HermitianOperator::from_triplets(n, triplets)
}

/// Piecewise-sinusoidal mode:
/// `sin(k₁(z+1))` left, `B₁ cos(k₂(z−a)) + B₂ sin(k₂(z−a))` inside,
/// `C sin(k₁(1−z))` right, all times `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    pub lambda: f64,
    pub k1: f64,
    pub k2: f64,
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
    pub scale: f64,
    pub geometry: StringGeometry,
}

struct Branches {
    k1: f64,
    k2: f64,
    b1: f64,
    b2: f64,
    inner_b: f64,
    inner_db: f64,
}

fn branches(lambda: f64, g: &StringGeometry) -> Branches {
    let kappa = (-lambda).sqrt();
    let k1 = kappa;
    let k2 = kappa * g.eps_r.sqrt();
    let (a, b) = (g.left(), g.right());
    let b1 = (k1 * (a + 1.0)).sin();
    // (1/ε̃) Φ'_inside(a) = Φ'_left(a)
    let b2 = k1 * (k1 * (a + 1.0)).cos() * g.eps_r / k2;
    let w = k2 * (b - a);
    Branches {
        k1,
        k2,
        b1,
        b2,
        inner_b: b1 * w.cos() + b2 * w.sin(),
        inner_db: k2 * (-b1 * w.sin() + b2 * w.cos()),
    }
}

/// Matching determinant at the right interface; zero exactly at eigenvalues.
pub fn matching_determinant(lambda: f64, g: &StringGeometry) -> f64 {
    let br = branches(lambda, g);
    let tail = br.k1 * (1.0 - g.right());
    br.inner_b * (-br.k1 * tail.cos()) - br.inner_db / g.eps_r * tail.sin()
}

impl ModeSolution {
    fn unscaled(&self, z: f64) -> f64 {
        let g = &self.geometry;
        if z <= g.left() {
            (self.k1 * (z + 1.0)).sin()
        } else if z <= g.right() {
            let u = self.k2 * (z - g.left());
            self.b1 * u.cos() + self.b2 * u.sin()
        } else {
            self.c * (self.k1 * (1.0 - z)).sin()
        }
    }

    pub fn value(&self, z: f64) -> f64 {
        self.scale * self.unscaled(z)
    }

    /// `(z, Φ(z))` on `count` equally spaced points of `[−1, 1]`.
    pub fn samples(&self, count: usize) -> Vec<(f64, f64)> {
        let last = (count.max(2) - 1) as f64;
        (0..count.max(2))
            .map(|i| {
                let z = -1.0 + 2.0 * i as f64 / last;
                (z, self.value(z))
            })
            .collect()
    }

    pub fn residual(&self) -> f64 {
        matching_determinant(self.lambda, &self.geometry).abs()
    }
}

/// Fundamental (smallest `|λ|`) mode, normalized to `max |Φ| = 1`.
pub fn semianalytic_fundamental(g: &StringGeometry) -> Result<ModeSolution> {
    let far = -10.0 * PI * PI / 4.0;
    let step = (far - SCAN_NEAR) / SCAN_SUBDIVISIONS as f64;
    let mut prev_l = SCAN_NEAR;
    let mut prev_f = matching_determinant(prev_l, g);
    let mut bracket = None;
    for i in 1..=SCAN_SUBDIVISIONS {
        let l = SCAN_NEAR + step * i as f64;
        let f = matching_determinant(l, g);
        if f == 0.0 || f.signum() != prev_f.signum() {
            bracket = Some((prev_l, prev_f, l));
            break;
        }
        prev_l = l;
        prev_f = f;
    }
    let (mut near, mut f_near, mut away) = bracket.ok_or(Error::NoBracket { lo: far, hi: SCAN_NEAR })?;
    while (near - away).abs() > BISECTION_TOL {
        let mid = 0.5 * (near + away);
        let f_mid = matching_determinant(mid, g);
        if f_mid == 0.0 {
            near = mid;
            away = mid;
            break;
        }
        if f_mid.signum() == f_near.signum() {
            near = mid;
            f_near = f_mid;
        } else {
            away = mid;
        }
    }
    let lambda = 0.5 * (near + away);
    let br = branches(lambda, g);
    let tail = (br.k1 * (1.0 - g.right())).sin();
    let mut mode = ModeSolution {
        lambda,
        k1: br.k1,
        k2: br.k2,
        b1: br.b1,
        b2: br.b2,
        c: br.inner_b / tail,
        scale: 1.0,
        geometry: *g,
    };
    let peak = mode
        .samples(NORMALIZATION_SAMPLES)
        .iter()
        .map(|&(_, v)| v.abs())
        .fold(0.0, f64::max);
    mode.scale = 1.0 / peak;
    Ok(mode)
}

/// `(Φ(p₁), …, Φ(p_N))`, scaled to unit Euclidean norm.
pub fn discretize_mode(mode: &ModeSolution, grid: &Grid) -> Vec<f64> {
    let v: Vec<f64> = grid.interior().iter().map(|&z| mode.value(z)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticityReport {
    pub n: usize,
    pub geometry: StringGeometry,
    pub clock_bits: u32,
    pub gershgorin: f64,
    /// Smallest eigenvalue of `D` by exact diagonalization.
    pub lambda_exact: f64,
    pub lambda_estimate: f64,
    pub abs_error: f64,
    /// `2 · gershgorin · 2^-m`.
    pub resolution: f64,
    pub theta0: f64,
    pub fidelity: f64,
    pub low_energy_overlap: f64,
    pub p_good: f64,
    /// Whether the rescaled spectrum lies in `(ε, 1 − ε)`.
    pub window_precondition: bool,
    /// Eigenvalue of `D` closest to zero.
    pub lambda_min_magnitude: f64,
    pub semianalytic_lambda: f64,
    /// `|⟨Φ⃗, v⟩|` with `v` the minimum-magnitude eigenvector of `D`.
    pub mode_overlap: f64,
    pub ledger: QueryLedger,
}

#[derive(Debug, Clone)]
pub struct ElasticityRun {
    pub report: ElasticityReport,
    pub rho: DensityMatrix,
    /// `(z, Φ_semi, Φ_fem)` at `p_0, …, p_{N+1}`.
    pub mode_rows: Vec<(f64, f64, f64)>,
}

/// Assembles `D`, estimates `λ_min(D)` with `clock_bits` internal bits,
/// prepares `ρ` near the fundamental and compares against the exact ground
/// state.
pub fn elasticity_pipeline<R: Rng + ?Sized>(
    n: usize,
    g: &StringGeometry,
    clock_bits: u32,
    rng: &mut R,
) -> Result<ElasticityRun> {
    let d = assemble_d(n, g)?;
    let gersh = gershgorin_bound(&d);
    let eig = d.eigendecomposition()?;
    let lambda_exact = eig.min_eigenvalue();

    let estimate = estimate_with_bits(&d, clock_bits, gersh, DEFAULT_NU, MIN_K, rng)?;
    let map = estimate.map;
    let (scaled_op, _) = rescale_operator(&d, gersh)?;
    let epsilon = 0.5f64.powi(clock_bits as i32);

    let run = prepare_ground_state(&scaled_op, epsilon, DEFAULT_NU, &PrepOptions::default(), rng)?;
    let ground = DensityMatrix::from_pure(&eig.eigenvector(0));
    let fid = fidelity(&run.prepared.rho, &ground)?;
    let pi = projector_low_energy(&scaled_op, epsilon)?;
    let low_energy_overlap = overlap(&run.prepared.rho, &pi)?;

    let mut ledger = estimate.scaled.ledger;
    ledger.absorb(&run.search.ledger);

    let mode = semianalytic_fundamental(g)?;
    let grid = Grid::new(n);
    let semi = discretize_mode(&mode, &grid);
    let top = eig.dim() - 1;
    let fem: Vec<f64> = eig.eigenvector(top).iter().map(|z| z.re).collect();
    let dot: f64 = semi.iter().zip(&fem).map(|(a, b)| a * b).sum();
    let sign = if dot < 0.0 { -1.0 } else { 1.0 };
    let mut mode_rows = vec![(grid.point(0), 0.0, 0.0)];
    for (k, (&s, &f)) in semi.iter().zip(&fem).enumerate() {
        mode_rows.push((grid.point(k + 1), s, sign * f));
    }
    mode_rows.push((grid.point(n + 1), 0.0, 0.0));

    let lambda_estimate = estimate.estimate;
    let report = ElasticityReport {
        n,
        geometry: *g,
        clock_bits,
        gershgorin: gersh,
        lambda_exact,
        lambda_estimate,
        abs_error: (lambda_estimate - lambda_exact).abs(),
        resolution: 2.0 * gersh * epsilon,
        theta0: map.backward(run.search.estimate),
        fidelity: fid,
        low_energy_overlap,
        p_good: run.prepared.p_good,
        window_precondition: eigenvalue_window_check(&scaled_op, epsilon)?,
        lambda_min_magnitude: eig.eigenvalues()[top],
        semianalytic_lambda: mode.lambda,
        mode_overlap: dot.abs(),
        ledger,
    };
    Ok(ElasticityRun {
        report,
        rho: run.prepared.rho,
        mode_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn homogeneous_min(n: usize) -> f64 {
        let h = 2.0 / (n as f64 + 1.0);
        -(2.0 / h) * (1.0 + (PI / (n as f64 + 1.0)).cos())
    }

    #[test]
    fn coefficient_convention() {
        let g = StringGeometry::reference();
        assert_eq!(coefficient(g.z0, &g), 5.0);
        assert_eq!(coefficient(-1.0, &g), 1.0);
        assert_eq!(coefficient(g.right(), &g), 5.0);
        assert_eq!(coefficient(g.left(), &g), 5.0);
    }

    #[test]
    fn homogeneous_operator() {
        let d = assemble_d(16, &StringGeometry::homogeneous()).unwrap();
        assert_eq!(d.entry(0, 0), C64::new(-17.0, 0.0));
        assert_eq!(d.entry(0, 1), C64::new(8.5, 0.0));
        assert_eq!(gershgorin_bound(&d), 34.0);
        let lambda = d.eigendecomposition().unwrap().min_eigenvalue();
        assert!((lambda - homogeneous_min(16)).abs() < 1e-9);
        assert!((lambda + 33.7105).abs() < 1e-4);
    }

    #[test]
    fn composite_operator() {
        let d = assemble_d(16, &StringGeometry::reference()).unwrap();
        let lambda = d.eigendecomposition().unwrap().min_eigenvalue();
        assert!((lambda + 33.09).abs() < 0.02, "{lambda}");
        let dense = d.to_dense();
        for i in 0..16 {
            for j in 0..16 {
                assert_eq!(dense[(i, j)], dense[(j, i)]);
            }
        }
        // the symmetric rescaling keeps −33.09 reachable by round trip
        let (_, map) = rescale_operator(&d, gershgorin_bound(&d)).unwrap();
        assert!((map.backward(map.forward(lambda)) - lambda).abs() < 1e-9);
    }

    #[test]
    fn misaligned_insert_rejected() {
        let g = StringGeometry::new(-0.3, 10.0 / 17.0, 5.0).unwrap();
        assert!(matches!(assemble_d(16, &g), Err(Error::InterfaceMisaligned(_))));
        assert!(StringGeometry::new(0.9, 0.5, 2.0).is_err());
    }

    #[test]
    fn homogeneous_semianalytic_mode() {
        let mode = semianalytic_fundamental(&StringGeometry::homogeneous()).unwrap();
        assert!((mode.lambda + PI * PI / 4.0).abs() < 1e-9);
        for (z, v) in mode.samples(201) {
            assert!((v - (PI * z / 2.0).cos()).abs() < 1e-9, "z = {z}");
        }
        assert!(mode.residual() <= 1e-10);
    }

    #[test]
    fn composite_mode_properties() {
        let g = StringGeometry::reference();
        let mode = semianalytic_fundamental(&g).unwrap();
        assert!(mode.residual() <= 1e-10, "{}", mode.residual());
        assert!(mode.value(-1.0).abs() < 1e-9 && mode.value(1.0).abs() < 1e-9);
        // value and flux continuity at both interfaces
        let dz = 1e-7;
        for (end, inside_left) in [(g.left(), false), (g.right(), true)] {
            let lo = mode.value(end - dz);
            let hi = mode.value(end + dz);
            assert!((lo - hi).abs() < 1e-6);
            let d_lo = (mode.value(end) - mode.value(end - dz)) / dz;
            let d_hi = (mode.value(end + dz) - mode.value(end)) / dz;
            let (w_lo, w_hi) = if inside_left { (1.0 / g.eps_r, 1.0) } else { (1.0, 1.0 / g.eps_r) };
            assert!((w_lo * d_lo - w_hi * d_hi).abs() < 1e-5);
        }
        // not symmetric for an off-centre insert
        assert!((mode.value(0.5) - mode.value(-0.5)).abs() > 1e-3);
    }

    #[test]
    fn discretized_mode_overlaps_fem() {
        let g = StringGeometry::reference();
        let mode = semianalytic_fundamental(&g).unwrap();
        let v = discretize_mode(&mode, &Grid::new(16));
        assert_eq!(v.len(), 16);
        let eig = assemble_d(16, &g).unwrap().eigendecomposition().unwrap();
        let fem = eig.eigenvector(15);
        let dot: f64 = v.iter().zip(&fem).map(|(a, b)| a * b.re).sum();
        assert!(dot.abs() >= 0.99);

        let homogeneous = discretize_mode(&semianalytic_fundamental(&StringGeometry::homogeneous()).unwrap(), &Grid::new(16));
        let grid = Grid::new(16);
        let raw: Vec<f64> = grid.interior().iter().map(|z| (PI * z / 2.0).cos()).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (a, b) in homogeneous.iter().zip(&raw) {
            assert!((a - b / norm).abs() < 1e-9);
        }
    }

    #[test]
    fn continuum_limit_of_smallest_magnitude_eigenvalue() {
        let target = PI * PI / 4.0;
        let mut last = f64::INFINITY;
        for n in [16, 32, 64] {
            let d = assemble_d(n, &StringGeometry::homogeneous()).unwrap();
            let eig = d.eigendecomposition().unwrap();
            let h = Grid::new(n).h;
            let gap = (-eig.eigenvalues()[n - 1] / h - target).abs();
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn reference_pipeline() {
        let run = elasticity_pipeline(16, &StringGeometry::reference(), 5, &mut seeded_rng(2024)).unwrap();
        let r = &run.report;
        assert!((r.lambda_exact + 33.09).abs() < 0.02);
        assert!(r.abs_error <= r.resolution);
        assert!(r.fidelity >= 0.999, "{r:?}");
        assert!(r.mode_overlap >= 0.99);
        assert_eq!(run.mode_rows.len(), 18);
    }

    #[test]
    fn homogeneous_pipeline() {
        let run = elasticity_pipeline(16, &StringGeometry::homogeneous(), 5, &mut seeded_rng(1)).unwrap();
        let r = &run.report;
        assert!((r.lambda_exact - homogeneous_min(16)).abs() < 1e-9);
        assert!(r.abs_error <= r.resolution);
    }
}
