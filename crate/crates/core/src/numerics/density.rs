use super::{hermitian_eigendecomposition, ComplexMatrix, StateVector, C64};
use crate::error::{Error, Result};

const DENSITY_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `matrix` as a density matrix.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let defect = matrix.hermitian_defect();
        if defect > DENSITY_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidInput(format!("trace is {tr}, expected 1")));
        }
        let eig = hermitian_eigendecomposition(&matrix)?;
        if eig.min_eigenvalue() < -DENSITY_TOL {
            return Err(Error::InvalidInput(format!(
                "negative eigenvalue {}",
                eig.min_eigenvalue()
            )));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(vector: &[C64]) -> Self {
        let norm: f64 = vector.iter().map(|a| a.norm_sqr()).sum();
        let scaled: Vec<C64> = vector.iter().map(|&a| a / norm.sqrt()).collect();
        Self {
            matrix: ComplexMatrix::outer(&scaled),
        }
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
        }
    }

    /// `Σ_k w_k |v_k><v_k| / Σ_k w_k` for nonnegative weights.
    pub fn mixture(weights: &[f64], vectors: &[Vec<C64>]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidInput("mixture weights must be nonnegative with positive sum".into()));
        }
        let dim = vectors.first().map_or(0, Vec::len);
        let mut m = ComplexMatrix::zeros(dim);
        for (&w, v) in weights.iter().zip(vectors) {
            if w == 0.0 {
                continue;
            }
            let f = w / total;
            for i in 0..dim {
                let vi = v[i] * f;
                for j in 0..dim {
                    m[(i, j)] += vi * v[j].conj();
                }
            }
        }
        Ok(Self { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Tr(Aρ)` (real part).
    pub fn expectation(&self, a: &ComplexMatrix) -> Result<f64> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch(a.dim(), self.dim()));
        }
        Ok(a.matmul(&self.matrix).trace().re)
    }
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let sqrt_rho = hermitian_eigendecomposition(rho.matrix())?.map_spectrum(|l| l.max(0.0).sqrt());
    let inner = sqrt_rho.matmul(sigma.matrix()).matmul(&sqrt_rho).hermitian_part();
    let eig = hermitian_eigendecomposition(&inner)?;
    let root_trace: f64 = eig.eigenvalues().iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Reduced density matrix on the qubits in `keep` (kept in ascending order).
pub fn trace_out(state: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    let n = state.qubit_count();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&q| q >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let kept_dim = 1usize << keep.len();
    let rest_dim = 1usize << traced.len();

    // psi[k][r]: amplitude with kept bits k and traced bits r
    let mut psi = vec![C64::new(0.0, 0.0); kept_dim * rest_dim];
    let bit = |index: usize, q: usize| (index >> (n - 1 - q)) & 1;
    for (index, &amp) in state.amplitudes().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let k = keep.iter().fold(0, |acc, &q| (acc << 1) | bit(index, q));
        let r = traced.iter().fold(0, |acc, &q| (acc << 1) | bit(index, q));
        psi[k * rest_dim + r] = amp;
    }

    let mut rho = ComplexMatrix::zeros(kept_dim);
    for a in 0..kept_dim {
        let row_a = &psi[a * rest_dim..(a + 1) * rest_dim];
        for b in a..kept_dim {
            let row_b = &psi[b * rest_dim..(b + 1) * rest_dim];
            let v: C64 = row_a.iter().zip(row_b).map(|(x, y)| x * y.conj()).sum();
            rho[(a, b)] = v;
            rho[(b, a)] = v.conj();
        }
    }
    Ok(DensityMatrix { matrix: rho })
}
