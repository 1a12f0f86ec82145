//! Faithful statevector backend for subroutine A and the Grover operator.
//!
//! Register layout, most significant qubit first:
//! `clocks (c·t) | median (t) | system (n) | conjugate (n)`.
//! Controlled powers of `e^{2πiH'}` are computed exactly from the
//! eigendecomposition. This backend is exponential in every register and
//! only exists to cross-check the structured profile at tiny sizes.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::amplitude::Predicate;
use crate::error::{Error, Result};
use crate::numerics::{trace_out, unitary_from_decomposition, ComplexMatrix, DensityMatrix, StateVector, C64, ONE, ZERO};
use crate::qpe::QpeConfig;
use crate::spectra::HermitianOperator;

/// Largest total register simulated as a statevector.
pub const QUBIT_CAP: usize = 24;

/// Largest register for which the Grover operator is materialized as a matrix.
pub const GROVER_MATRIX_CAP: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterLayout {
    pub n: usize,
    pub t: usize,
    pub c: usize,
}

impl RegisterLayout {
    pub fn total(&self) -> usize {
        self.c * self.t + self.t + 2 * self.n
    }

    pub fn clock(&self, copy: usize) -> usize {
        copy * self.t
    }

    pub fn median(&self) -> usize {
        self.c * self.t
    }

    pub fn system(&self) -> usize {
        self.median() + self.t
    }

    pub fn conjugate(&self) -> usize {
        self.system() + self.n
    }
}

/// Reads `width` qubits starting at `start` from a basis index.
fn read_register(index: usize, total: usize, start: usize, width: usize) -> usize {
    (index >> (total - start - width)) & ((1 << width) - 1)
}

fn apply_hadamard(state: &mut [C64], total: usize, qubit: usize) {
    let stride = 1usize << (total - 1 - qubit);
    for base in 0..state.len() {
        if base & stride != 0 {
            continue;
        }
        let a = state[base];
        let b = state[base | stride];
        state[base] = (a + b) * FRAC_1_SQRT_2;
        state[base | stride] = (a - b) * FRAC_1_SQRT_2;
    }
}

fn apply_cnot(state: &mut [C64], total: usize, control: usize, target: usize) {
    let cbit = 1usize << (total - 1 - control);
    let tbit = 1usize << (total - 1 - target);
    for i in 0..state.len() {
        if i & cbit != 0 && i & tbit == 0 {
            state.swap(i, i | tbit);
        }
    }
}

/// Applies `matrix` to the contiguous block `[start, start + width)`, on the
/// branch where `control` (if any) is set.
fn apply_block(state: &mut [C64], total: usize, start: usize, width: usize, matrix: &ComplexMatrix, control: Option<usize>) {
    let dim = 1usize << width;
    debug_assert_eq!(matrix.dim(), dim);
    let stride = 1usize << (total - start - width);
    let block_mask = (dim - 1) * stride;
    let cbit = control.map(|q| 1usize << (total - 1 - q));
    let mut buf = vec![ZERO; dim];
    for base in 0..state.len() {
        if base & block_mask != 0 || cbit.is_some_and(|b| base & b == 0) {
            continue;
        }
        for (k, slot) in buf.iter_mut().enumerate() {
            *slot = state[base + k * stride];
        }
        for (k, row) in (0..dim).map(|k| (k, matrix.row(k))) {
            state[base + k * stride] = row.iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    }
}

/// `QFT |x⟩ = 2^{-t/2} Σ_y e^{2πi xy/2^t} |y⟩`; `inverse` conjugates it.
fn fourier_matrix(width: usize, inverse: bool) -> ComplexMatrix {
    let dim = 1usize << width;
    let sign = if inverse { -1.0 } else { 1.0 };
    let norm = (dim as f64).sqrt().recip();
    let mut m = ComplexMatrix::zeros(dim);
    for x in 0..dim {
        for y in 0..dim {
            let turns = ((x * y) % dim) as f64 / dim as f64;
            m[(y, x)] = C64::from_polar(norm, sign * 2.0 * PI * turns);
        }
    }
    m
}

/// Statevector model of subroutine A with its median trick.
#[derive(Debug, Clone)]
pub struct FaithfulCircuit {
    layout: RegisterLayout,
    /// `U^{2^k}` for `k = 0, …, t − 1`.
    powers: Vec<ComplexMatrix>,
    /// Adjoints of `powers`.
    inverse_powers: Vec<ComplexMatrix>,
    qft: ComplexMatrix,
    inverse_qft: ComplexMatrix,
}

impl FaithfulCircuit {
    pub fn new(h: &HermitianOperator, cfg: QpeConfig) -> Result<Self> {
        let layout = RegisterLayout {
            n: h.qubits(),
            t: cfg.t as usize,
            c: cfg.c,
        };
        if layout.total() > QUBIT_CAP {
            return Err(Error::TooManyQubits {
                needed: layout.total(),
                cap: QUBIT_CAP,
            });
        }
        let eig = h.eigendecomposition()?;
        let powers: Vec<ComplexMatrix> = (0..layout.t)
            .map(|k| unitary_from_decomposition(&eig, (1u64 << k) as f64))
            .collect();
        let inverse_powers = powers.iter().map(ComplexMatrix::adjoint).collect();
        Ok(Self {
            layout,
            powers,
            inverse_powers,
            qft: fourier_matrix(layout.t, false),
            inverse_qft: fourier_matrix(layout.t, true),
        })
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn total_qubits(&self) -> usize {
        self.layout.total()
    }

    fn prepare_pairs(&self, state: &mut [C64]) {
        let RegisterLayout { n, .. } = self.layout;
        let total = self.total_qubits();
        for q in 0..n {
            apply_hadamard(state, total, self.layout.system() + q);
        }
        for q in 0..n {
            apply_cnot(state, total, self.layout.system() + q, self.layout.conjugate() + q);
        }
    }

    fn unprepare_pairs(&self, state: &mut [C64]) {
        let RegisterLayout { n, .. } = self.layout;
        let total = self.total_qubits();
        for q in (0..n).rev() {
            apply_cnot(state, total, self.layout.system() + q, self.layout.conjugate() + q);
        }
        for q in (0..n).rev() {
            apply_hadamard(state, total, self.layout.system() + q);
        }
    }

    fn qpe(&self, state: &mut [C64], copy: usize) {
        let RegisterLayout { n, t, .. } = self.layout;
        let total = self.total_qubits();
        let clock = self.layout.clock(copy);
        for q in 0..t {
            apply_hadamard(state, total, clock + q);
        }
        // clock qubit `clock + l` carries weight 2^{t-1-l}
        for l in 0..t {
            apply_block(state, total, self.layout.system(), n, &self.powers[t - 1 - l], Some(clock + l));
        }
        apply_block(state, total, clock, t, &self.inverse_qft, None);
    }

    fn inverse_qpe(&self, state: &mut [C64], copy: usize) {
        let RegisterLayout { n, t, .. } = self.layout;
        let total = self.total_qubits();
        let clock = self.layout.clock(copy);
        apply_block(state, total, clock, t, &self.qft, None);
        for l in (0..t).rev() {
            apply_block(state, total, self.layout.system(), n, &self.inverse_powers[t - 1 - l], Some(clock + l));
        }
        for q in 0..t {
            apply_hadamard(state, total, clock + q);
        }
    }

    /// XORs the median of the clock registers into the median register;
    /// an involution.
    fn xor_median(&self, state: &mut [C64]) {
        let RegisterLayout { t, c, .. } = self.layout;
        let total = self.total_qubits();
        let shift = total - self.layout.median() - t;
        let mut values = vec![0usize; c];
        for i in 0..state.len() {
            for (k, v) in values.iter_mut().enumerate() {
                *v = read_register(i, total, self.layout.clock(k), t);
            }
            values.sort_unstable();
            let j = i ^ (values[c / 2] << shift);
            if j > i {
                state.swap(i, j);
            }
        }
    }

    /// In-place `A`.
    pub fn apply(&self, state: &mut [C64]) {
        self.prepare_pairs(state);
        for k in 0..self.layout.c {
            self.qpe(state, k);
        }
        self.xor_median(state);
        for k in (0..self.layout.c).rev() {
            self.inverse_qpe(state, k);
        }
    }

    /// In-place `A†`.
    pub fn apply_adjoint(&self, state: &mut [C64]) {
        for k in 0..self.layout.c {
            self.qpe(state, k);
        }
        self.xor_median(state);
        for k in (0..self.layout.c).rev() {
            self.inverse_qpe(state, k);
        }
        self.unprepare_pairs(state);
    }

    /// `A|0⟩`.
    pub fn prepare(&self) -> StateVector {
        let mut state = StateVector::zero(self.total_qubits());
        self.apply(state.amplitudes_mut());
        state
    }

    /// Distribution of a measurement of the median register.
    pub fn median_marginal(&self, state: &StateVector) -> Vec<f64> {
        let total = self.total_qubits();
        let mut out = vec![0.0; 1 << self.layout.t];
        for (i, a) in state.amplitudes().iter().enumerate() {
            out[read_register(i, total, self.layout.median(), self.layout.t)] += a.norm_sqr();
        }
        out
    }

    /// `good[i]` is true when `χ` accepts the median register of basis state `i`.
    pub fn good_mask(&self, chi: &Predicate) -> Result<Vec<bool>> {
        if chi.t as usize != self.layout.t {
            return Err(Error::BitWidthMismatch {
                predicate: chi.t,
                register: self.layout.t as u32,
            });
        }
        let total = self.total_qubits();
        let accepts: Vec<bool> = (0..1usize << self.layout.t).map(|x| chi.is_good(x)).collect();
        Ok((0..1usize << total)
            .map(|i| accepts[read_register(i, total, self.layout.median(), self.layout.t)])
            .collect())
    }

    /// Reduced state of the system register.
    pub fn system_state(&self, state: &StateVector) -> Result<DensityMatrix> {
        let keep: Vec<usize> = (self.layout.system()..self.layout.conjugate()).collect();
        trace_out(state, &keep)
    }
}

/// `A|0⟩` built by the faithful circuit.
pub fn faithful_a_statevector(h: &HermitianOperator, cfg: QpeConfig) -> Result<StateVector> {
    Ok(FaithfulCircuit::new(h, cfg)?.prepare())
}

/// `Q = −A S₀ A† S_χ` as an explicit matrix. Since `A S₀ A† = I − 2|Φ⟩⟨Φ|`
/// with `Φ = A|0⟩`, this is `(2|Φ⟩⟨Φ| − I) S_χ`.
pub fn faithful_grover_operator(phi: &StateVector, good: &[bool]) -> Result<ComplexMatrix> {
    let q = phi.qubit_count();
    if q > GROVER_MATRIX_CAP {
        return Err(Error::TooManyQubits {
            needed: q,
            cap: GROVER_MATRIX_CAP,
        });
    }
    if good.len() != phi.amplitudes().len() {
        return Err(Error::DimensionMismatch(good.len(), phi.amplitudes().len()));
    }
    let amps = phi.amplitudes();
    let dim = amps.len();
    let mut data = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let sign = if good[b] { -1.0 } else { 1.0 };
            let delta = if a == b { ONE } else { ZERO };
            data.push((amps[a] * amps[b].conj() * 2.0 - delta) * sign);
        }
    }
    ComplexMatrix::from_row_major(dim, data)
}

/// Eigenphases (in turns) of `Q` on the span of `Φ` and `QΦ`.
pub fn grover_eigenphases(q: &ComplexMatrix, phi: &StateVector) -> Vec<f64> {
    let e1 = phi.amplitudes();
    let q_e1 = q.matvec(e1);
    let overlap: C64 = e1.iter().zip(&q_e1).map(|(a, b)| a.conj() * b).sum();
    let mut e2: Vec<C64> = q_e1.iter().zip(e1).map(|(b, a)| b - overlap * a).collect();
    let norm = e2.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return vec![overlap.arg() / (2.0 * PI)];
    }
    e2.iter_mut().for_each(|z| *z /= norm);
    let q_e2 = q.matvec(&e2);
    let inner = |u: &[C64], v: &[C64]| -> C64 { u.iter().zip(v).map(|(a, b)| a.conj() * b).sum() };
    let (a, b, c, d) = (overlap, inner(e1, &q_e2), inner(&e2, &q_e1), inner(&e2, &q_e2));
    let tr = a + d;
    let disc = ((a - d) * (a - d) + b * c * 4.0).sqrt();
    let mut phases: Vec<f64> = [(tr + disc) * 0.5, (tr - disc) * 0.5]
        .iter()
        .map(|l| l.arg() / (2.0 * PI))
        .collect();
    phases.sort_by(f64::total_cmp);
    phases
}

/// Good-state probability read off the Grover operator:
/// `Re⟨Φ|QΦ⟩ = cos 2θ`, so `p = sin²θ = (1 − Re⟨Φ|QΦ⟩)/2`.
pub fn grover_probability(q: &ComplexMatrix, phi: &StateVector) -> f64 {
    let q_phi = q.matvec(phi.amplitudes());
    let overlap: C64 = phi.amplitudes().iter().zip(&q_phi).map(|(a, b)| a.conj() * b).sum();
    ((1.0 - overlap.re) / 2.0).clamp(0.0, 1.0)
}

/// One Grover iteration `v ← (2|Φ⟩⟨Φ| − I) S_χ v` without forming `Q`.
pub fn grover_step(phi: &StateVector, good: &[bool], v: &mut [C64]) {
    for (z, &g) in v.iter_mut().zip(good) {
        if g {
            *z = -*z;
        }
    }
    let overlap: C64 = phi.amplitudes().iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    for (z, &a) in v.iter_mut().zip(phi.amplitudes()) {
        *z = a * overlap * 2.0 - *z;
    }
}
