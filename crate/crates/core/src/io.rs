//! File formats: Hermitian matrix JSON, density-matrix JSON, bond-length
//! fixtures and headed CSV.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eigensearch::{Backend, DEFAULT_NU, MIN_K};
use crate::error::{Error, Result};
use crate::groundstate::PrepMode;
use crate::numerics::{ComplexMatrix, DensityMatrix, C64};
use crate::spectra::{HermitianOperator, Storage, Triplet};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Dense,
    Coo,
}

/// On-disk Hermitian matrix. `dense` holds `dim²` row-major `[re, im]`
/// pairs; `coo` holds `[row, col, re, im]` for the upper triangle only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub format: MatrixFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coo: Option<Vec<(usize, usize, f64, f64)>>,
}

impl MatrixFile {
    pub fn from_operator(h: &HermitianOperator) -> Self {
        match h.storage() {
            Storage::Dense(m) => Self {
                dim: h.dim(),
                format: MatrixFormat::Dense,
                dense: Some(m.as_slice().iter().map(|z| [z.re, z.im]).collect()),
                coo: None,
            },
            Storage::Sparse(triplets) => Self {
                dim: h.dim(),
                format: MatrixFormat::Coo,
                dense: None,
                coo: Some(triplets.iter().map(|t| (t.row, t.col, t.value.re, t.value.im)).collect()),
            },
        }
    }

    pub fn to_operator(&self) -> Result<HermitianOperator> {
        if self.dim < 2 || !self.dim.is_power_of_two() {
            return Err(Error::DimNotPowerOfTwo(self.dim));
        }
        match self.format {
            MatrixFormat::Dense => {
                let data = self
                    .dense
                    .as_ref()
                    .ok_or_else(|| Error::Parse("dense format without a \"dense\" array".into()))?;
                if data.len() != self.dim * self.dim {
                    return Err(Error::Parse(format!(
                        "dense array has {} entries, expected {}",
                        data.len(),
                        self.dim * self.dim
                    )));
                }
                let values = data.iter().map(|&[re, im]| C64::new(re, im)).collect();
                HermitianOperator::from_dense(ComplexMatrix::from_row_major(self.dim, values)?)
            }
            MatrixFormat::Coo => {
                let entries = self
                    .coo
                    .as_ref()
                    .ok_or_else(|| Error::Parse("coo format without a \"coo\" array".into()))?;
                let triplets = entries
                    .iter()
                    .map(|&(row, col, re, im)| Triplet {
                        row,
                        col,
                        value: C64::new(re, im),
                    })
                    .collect();
                HermitianOperator::from_triplets(self.dim, triplets)
            }
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_matrix_str(text: &str) -> Result<HermitianOperator> {
    serde_json::from_str::<MatrixFile>(text)?.to_operator()
}

pub fn parse_matrix(path: impl AsRef<Path>) -> Result<HermitianOperator> {
    parse_matrix_str(&read_text(path.as_ref())?)
}

/// Dense complex matrix as JSON, row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixFile {
    pub dim: usize,
    pub data: Vec<[f64; 2]>,
}

impl DensityMatrixFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            dim: rho.dim(),
            data: rho.matrix().as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let values = self.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
        DensityMatrix::new(ComplexMatrix::from_row_major(self.dim, values)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureEntry {
    /// Bond length in ångström.
    pub bond_length: f64,
    pub matrix: MatrixFile,
}

/// A family of Hamiltonians keyed by bond length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Energy unit of the matrix entries.
    pub units: String,
    pub entries: Vec<FixtureEntry>,
}

impl FixtureFile {
    /// Validated operators in file order.
    pub fn operators(&self) -> Result<Vec<(f64, HermitianOperator)>> {
        let mut seen: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut out = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            if seen.contains(&e.bond_length) {
                return Err(Error::Parse(format!("bond length {} listed twice", e.bond_length)));
            }
            seen.push(e.bond_length);
            out.push((e.bond_length, e.matrix.to_operator()?));
        }
        Ok(out)
    }
}

pub fn load_fixture(path: impl AsRef<Path>) -> Result<FixtureFile> {
    let fixture: FixtureFile = serde_json::from_str(&read_text(path.as_ref())?)?;
    fixture.operators()?;
    Ok(fixture)
}

/// Settings echoed into every output file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub epsilon_bits: u32,
    pub k: u32,
    pub nu: f64,
    pub backend: Backend,
    pub mode: PrepMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            epsilon_bits: 5,
            k: MIN_K,
            nu: DEFAULT_NU,
            backend: Backend::Structured,
            mode: PrepMode::Postselect,
        }
    }
}

/// One-line header `qeigen <version> <config json>`.
pub fn header_line(config: &RunConfig) -> String {
    let json = serde_json::to_string(config).expect("run config serializes");
    format!("qeigen {VERSION} {json}")
}

/// Lossless float formatting (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// In-memory CSV with `#`-prefixed header lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(config: &RunConfig, columns: &[&str]) -> Self {
        Self {
            comments: vec![header_line(config)],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.render())?)
    }
}

/// JSON document with the run header; `payload` is flattened beside it.
#[derive(Debug, Clone, Serialize)]
pub struct JsonReport<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    #[serde(flatten)]
    pub payload: &'a T,
}

pub fn render_json<T: Serialize>(config: &RunConfig, payload: &T) -> Result<String> {
    let doc = JsonReport {
        tool: "qeigen",
        version: VERSION,
        config,
        payload,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}
