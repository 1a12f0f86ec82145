//! Operator-level model of the input matrix: dense or sparse Hermitian
//! storage, row-wise sparse oracle access with query accounting, the
//! Gershgorin norm bound and the affine map that moves a general spectrum
//! into `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{hermitian_eigendecomposition, ComplexMatrix, EigenDecomposition, C64, HERMITIAN_TOL};

/// Upper-triangle entry of a sparse Hermitian matrix; `(col, row, conj)` is implied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub value: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    Dense(ComplexMatrix),
    Sparse(Vec<Triplet>),
}

/// Hermitian `N × N` matrix with `N = 2^n`, `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    storage: Storage,
    // structural nonzeros of each row, ascending column
    rows: Vec<Vec<(usize, C64)>>,
    max_abs: f64,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::DimNotPowerOfTwo(dim));
    }
    Ok(())
}

impl HermitianOperator {
    /// Accepts a dense matrix whose asymmetry is below the eigensolver
    /// tolerance and stores its exact Hermitian part.
    pub fn from_dense(matrix: ComplexMatrix) -> Result<Self> {
        check_dim(matrix.dim())?;
        let defect = matrix.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let matrix = matrix.hermitian_part();
        let dim = matrix.dim();
        let rows = (0..dim)
            .map(|i| {
                matrix
                    .row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != C64::new(0.0, 0.0))
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect();
        let max_abs = matrix.max_abs();
        Ok(Self {
            dim,
            storage: Storage::Dense(matrix),
            rows,
            max_abs,
        })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_dense(ComplexMatrix::from_diagonal(diag))
    }

    /// Builds from upper-triangle triplets (`row <= col`).
    pub fn from_triplets(dim: usize, triplets: Vec<Triplet>) -> Result<Self> {
        check_dim(dim)?;
        let mut triplets = triplets;
        for t in &triplets {
            if t.row >= dim || t.col >= dim {
                return Err(Error::IndexOutOfRange {
                    index: t.row.max(t.col),
                    len: dim,
                });
            }
            if t.row > t.col {
                return Err(Error::InvalidInput(format!(
                    "sparse entry ({}, {}) lies below the diagonal",
                    t.row, t.col
                )));
            }
            if t.row == t.col && t.value.im.abs() > HERMITIAN_TOL {
                return Err(Error::NotHermitian(t.value.im.abs()));
            }
        }
        triplets.sort_by_key(|t| (t.row, t.col));
        if let Some(w) = triplets.windows(2).find(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col)) {
            return Err(Error::DuplicateEntry(w[0].row, w[0].col));
        }
        for t in triplets.iter_mut().filter(|t| t.row == t.col) {
            t.value.im = 0.0;
        }
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for t in &triplets {
            rows[t.row].push((t.col, t.value));
            if t.row != t.col {
                rows[t.col].push((t.row, t.value.conj()));
            }
        }
        for r in &mut rows {
            r.sort_by_key(|&(c, _)| c);
        }
        let max_abs = triplets.iter().map(|t| t.value.norm()).fold(0.0, f64::max);
        Ok(Self {
            dim,
            storage: Storage::Sparse(triplets),
            rows,
            max_abs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `n = log2 N`.
    pub fn qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// `||H||_max`.
    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    pub fn nonzeros_in_row(&self, row: usize) -> usize {
        self.rows.get(row).map_or(0, Vec::len)
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| self.rows[i][k].1)
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(_) => {
                let mut m = ComplexMatrix::zeros(self.dim);
                for (i, row) in self.rows.iter().enumerate() {
                    for &(j, v) in row {
                        m[(i, j)] = v;
                    }
                }
                m
            }
        }
    }

    pub fn eigendecomposition(&self) -> Result<EigenDecomposition> {
        hermitian_eigendecomposition(&self.to_dense())
    }

    /// `a·H + b·I`, keeping the storage kind.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        match &self.storage {
            Storage::Dense(m) => {
                let shifted = m
                    .scale(C64::new(a, 0.0))
                    .add(&ComplexMatrix::identity(self.dim).scale(C64::new(b, 0.0)));
                Self::from_dense(shifted)
            }
            Storage::Sparse(triplets) => {
                let mut out: Vec<Triplet> = triplets
                    .iter()
                    .map(|t| Triplet {
                        value: t.value * a + if t.row == t.col { C64::new(b, 0.0) } else { C64::new(0.0, 0.0) },
                        ..*t
                    })
                    .collect();
                for i in 0..self.dim {
                    if !triplets.iter().any(|t| t.row == i && t.col == i) {
                        out.push(Triplet {
                            row: i,
                            col: i,
                            value: C64::new(b, 0.0),
                        });
                    }
                }
                Self::from_triplets(self.dim, out)
            }
        }
    }
}

/// Counters for the query accounting model. Hamiltonian evolution is
/// computed exactly, so the cost of subroutine A is charged nominally:
/// one application of A or A† costs `copies · (2^t − 1)` controlled
/// evolution segments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub oracle_queries: u64,
    pub a_applications: u64,
    pub evolution_segments: u64,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `count` applications of A or A†, each costing `segments_per_a`.
    pub fn charge_a(&mut self, count: u64, segments_per_a: u64) {
        self.a_applications += count;
        self.evolution_segments += count * segments_per_a;
    }

    pub fn absorb(&mut self, other: &QueryLedger) {
        self.oracle_queries += other.oracle_queries;
        self.a_applications += other.a_applications;
        self.evolution_segments += other.evolution_segments;
    }
}

/// `max_i Σ_j |H_ij|`, an upper bound on the spectral norm.
pub fn gershgorin_bound(h: &HermitianOperator) -> f64 {
    h.rows
        .iter()
        .map(|row| row.iter().map(|(_, v)| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// The spectral map `λ ↦ (λ + shift) / (2 shift)` and its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleMap {
    pub shift: f64,
    pub factor: f64,
}

impl RescaleMap {
    pub fn new(shift: f64) -> Result<Self> {
        if !(shift > 0.0) || !shift.is_finite() {
            return Err(Error::InvalidNorm(shift));
        }
        Ok(Self {
            shift,
            factor: 1.0 / (2.0 * shift),
        })
    }

    pub fn forward(&self, lambda: f64) -> f64 {
        (lambda + self.shift) * self.factor
    }

    pub fn backward(&self, scaled: f64) -> f64 {
        scaled / self.factor - self.shift
    }

    /// Error magnification when mapping back: `2 · shift`.
    pub fn magnification(&self) -> f64 {
        1.0 / self.factor
    }
}

/// `H' = (H + s·I) / (2s)`; with `s >= ||H||` the spectrum of `H'` lies in `[0, 1]`.
pub fn rescale_operator(h: &HermitianOperator, norm_estimate: f64) -> Result<(HermitianOperator, RescaleMap)> {
    let map = RescaleMap::new(norm_estimate)?;
    let scaled = h.affine(map.factor, norm_estimate * map.factor)?;
    Ok((scaled, map))
}

/// Returns the `k`-th structural nonzero of `row` as `(column, value)`.
pub fn oracle_query(h: &HermitianOperator, row: usize, k: usize, ledger: &mut QueryLedger) -> Result<(usize, C64)> {
    if row >= h.dim {
        return Err(Error::IndexOutOfRange { index: row, len: h.dim });
    }
    let entries = &h.rows[row];
    let &(col, value) = entries.get(k).ok_or(Error::OutOfRange {
        row,
        k,
        nonzeros: entries.len(),
    })?;
    ledger.oracle_queries += 1;
    Ok((col, value))
}

/// Exact-diagonalization check that every eigenvalue lies in `(ε, 1 − ε)`.
pub fn eigenvalue_window_check(h: &HermitianOperator, epsilon: f64) -> Result<bool> {
    let eig = h.eigendecomposition()?;
    Ok(eig.eigenvalues().iter().all(|&l| l > epsilon && l < 1.0 - epsilon))
}
