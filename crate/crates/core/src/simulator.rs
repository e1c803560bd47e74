//! Few-qubit statevector and density-matrix simulation.
//!
//! Qubit 0 is the most significant bit of the amplitude index, matching the
//! Pauli labels in [`crate::pauli`].

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix2, Matrix4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::{CMatrix, Complex64};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    Ry(f64),
    Rz(f64),
    Unitary1(Matrix2<Complex64>),
    SqrtIswap,
    /// Two-qubit unitary in the local basis |t0 t1⟩, t0 most significant.
    Unitary2(Matrix4<Complex64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl GateOp {
    pub fn ry(q: usize, theta: f64) -> Self {
        Self { kind: GateKind::Ry(theta), targets: vec![q] }
    }

    pub fn rz(q: usize, theta: f64) -> Self {
        Self { kind: GateKind::Rz(theta), targets: vec![q] }
    }

    pub fn sqrt_iswap(a: usize, b: usize) -> Self {
        Self { kind: GateKind::SqrtIswap, targets: vec![a, b] }
    }

    pub fn unitary1(q: usize, u: Matrix2<Complex64>) -> Self {
        Self { kind: GateKind::Unitary1(u), targets: vec![q] }
    }

    pub fn unitary2(a: usize, b: usize, u: Matrix4<Complex64>) -> Self {
        Self { kind: GateKind::Unitary2(u), targets: vec![a, b] }
    }

    pub fn arity(&self) -> usize {
        match self.kind {
            GateKind::Ry(_) | GateKind::Rz(_) | GateKind::Unitary1(_) => 1,
            GateKind::SqrtIswap | GateKind::Unitary2(_) => 2,
        }
    }

    /// The gate's matrix on its own targets, as a 2×2 or 4×4 dense block.
    pub fn local_matrix(&self) -> CMatrix {
        match &self.kind {
            GateKind::Ry(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                CMatrix::from_row_slice(2, 2, &[c.into(), (-s).into(), s.into(), c.into()])
            }
            GateKind::Rz(t) => {
                let half = Complex64::from_polar(1.0, t / 2.0);
                CMatrix::from_row_slice(2, 2, &[half.conj(), ZERO, ZERO, half])
            }
            GateKind::Unitary1(u) => CMatrix::from_iterator(2, 2, u.iter().copied()),
            GateKind::SqrtIswap => {
                let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
                let i = Complex64::new(0.0, FRAC_1_SQRT_2);
                CMatrix::from_row_slice(
                    4,
                    4,
                    &[ONE, ZERO, ZERO, ZERO, ZERO, r, i, ZERO, ZERO, i, r, ZERO, ZERO, ZERO, ZERO, ONE],
                )
            }
            GateKind::Unitary2(u) => CMatrix::from_iterator(4, 4, u.iter().copied()),
        }
    }

    /// The inverse gate.
    pub fn inverse(&self) -> Self {
        let kind = match &self.kind {
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::Unitary1(u) => GateKind::Unitary1(u.adjoint()),
            GateKind::SqrtIswap => {
                let m = self.local_matrix().adjoint();
                GateKind::Unitary2(Matrix4::from_iterator(m.iter().copied()))
            }
            GateKind::Unitary2(u) => GateKind::Unitary2(u.adjoint()),
        };
        Self { kind, targets: self.targets.clone() }
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        if self.targets.len() != self.arity() {
            return Err(Error::InvalidArgument(format!(
                "gate acts on {} qubits but has {} targets",
                self.arity(),
                self.targets.len()
            )));
        }
        if let Some(&q) = self.targets.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::InvalidArgument(format!(
                "target qubit {q} out of range for {n_qubits} qubits"
            )));
        }
        if self.targets.len() == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::InvalidArgument("two-qubit gate targets must be distinct".into()));
        }
        Ok(())
    }
}

fn bit(n_qubits: usize, q: usize) -> usize {
    1 << (n_qubits - 1 - q)
}

/// A gate's 2×2 or 4×4 matrix in a fixed-size buffer, bound to register bit masks.
struct LocalBlock {
    masks: [usize; 2],
    arity: usize,
    m: [[Complex64; 4]; 4],
}

impl LocalBlock {
    fn new(gate: &GateOp, n_qubits: usize) -> Self {
        let local = gate.local_matrix();
        let arity = gate.arity();
        let mut m = [[ZERO; 4]; 4];
        for (r, row) in m.iter_mut().enumerate().take(1 << arity) {
            for (c, v) in row.iter_mut().enumerate().take(1 << arity) {
                *v = local[(r, c)];
            }
        }
        let mut masks = [0; 2];
        for (slot, &q) in masks.iter_mut().zip(&gate.targets) {
            *slot = bit(n_qubits, q);
        }
        Self { masks, arity, m }
    }

    fn conj(&self) -> Self {
        let mut m = self.m;
        m.iter_mut().flatten().for_each(|z| *z = z.conj());
        Self { m, ..*self }
    }

    /// Applies the block to the length-`dim` vector `data[offset + k * stride]`.
    fn apply(&self, data: &mut [Complex64], offset: usize, stride: usize, dim: usize) {
        let k = self.arity;
        let sub = 1 << k;
        let all = self.masks[..k].iter().fold(0, |a, m| a | m);
        let mut idx = [0usize; 4];
        let mut x = [ZERO; 4];
        for base in 0..dim {
            if base & all != 0 {
                continue;
            }
            for (s, slot) in idx.iter_mut().enumerate().take(sub) {
                // Local index bit (k−1−t) belongs to targets[t].
                let mut full = base;
                for t in 0..k {
                    if s >> (k - 1 - t) & 1 == 1 {
                        full |= self.masks[t];
                    }
                }
                *slot = offset + full * stride;
            }
            for c in 0..sub {
                x[c] = data[idx[c]];
            }
            for r in 0..sub {
                let row = &self.m[r];
                data[idx[r]] = (0..sub).map(|c| row[c] * x[c]).sum();
            }
        }
    }
}

/// Normalized pure state of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    n_qubits: usize,
}

impl StateVector {
    /// Normalizes `amplitudes`, whose length must be a power of two.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidDimension(format!("statevector length {len} is not 2^n")));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument("statevector has zero or non-finite norm".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
            n_qubits: len.trailing_zeros() as usize,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if n_qubits == 0 || index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { amplitudes, n_qubits })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let dim = self.dim();
        let m = CMatrix::from_fn(dim, dim, |i, j| self.amplitudes[i] * self.amplitudes[j].conj());
        DensityMatrix { matrix: m, n_qubits: self.n_qubits }
    }

    fn apply_in_place(&mut self, gate: &GateOp) -> Result<()> {
        gate.check(self.n_qubits)?;
        let dim = self.dim();
        LocalBlock::new(gate, self.n_qubits).apply(&mut self.amplitudes, 0, 1, dim);
        Ok(())
    }
}

/// Density matrix of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    n_qubits: usize,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-10) and positivity (−1e-10).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidDimension(format!(
                "density matrix shape {}x{} is not 2^n square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = crate::hamiltonian::hermiticity_error(&matrix);
        if herm > 1e-12 {
            return Err(Error::InvalidArgument(format!("density matrix not Hermitian ({herm:e})")));
        }
        let trace = matrix.trace();
        if (trace - ONE).norm() > 1e-10 {
            return Err(Error::InvalidArgument(format!("density matrix trace {trace} != 1")));
        }
        let (eigs, _) = crate::hamiltonian::hermitian_eigen(&matrix);
        if eigs[0] < -1e-10 {
            return Err(Error::InvalidArgument(format!(
                "density matrix has negative eigenvalue {}",
                eigs[0]
            )));
        }
        Ok(Self { matrix, n_qubits: dim.trailing_zeros() as usize })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        Self {
            matrix: CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
            n_qubits,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Reduced density matrix of the listed qubits, in their listed order.
    pub fn reduced(&self, keep: &[usize]) -> CMatrix {
        let n = self.n_qubits;
        let k = keep.len();
        let keep_mask = keep.iter().fold(0, |m, &q| m | bit(n, q));
        let local = |full: usize| {
            keep.iter()
                .enumerate()
                .fold(0, |acc, (t, &q)| if full & bit(n, q) != 0 { acc | 1 << (k - 1 - t) } else { acc })
        };
        let mut out = CMatrix::zeros(1 << k, 1 << k);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if i & !keep_mask == j & !keep_mask {
                    out[(local(i), local(j))] += self.matrix[(i, j)];
                }
            }
        }
        out
    }

    fn conjugate_in_place(&mut self, gate: &GateOp) -> Result<()> {
        gate.check(self.n_qubits)?;
        let u = LocalBlock::new(gate, self.n_qubits);
        let u_conj = u.conj();
        let dim = self.dim();
        // Column-major storage: column c is contiguous, row r has stride `dim`.
        let data = self.matrix.as_mut_slice();
        for c in 0..dim {
            u.apply(data, c * dim, 1, dim);
        }
        // (M U†)_{rj} = Σ_k conj(U_{jk}) M_{rk}: apply conj(U) along each row.
        for r in 0..dim {
            u_conj.apply(data, r, dim, dim);
        }
        Ok(())
    }

    /// `ρ → (1 − p) ρ + p · (I_T / d_T) ⊗ Tr_T ρ` on the target qubits `T`.
    fn depolarize_in_place(&mut self, targets: &[usize], p: f64) {
        if p == 0.0 {
            return;
        }
        let n = self.n_qubits;
        let target_mask = targets.iter().fold(0, |m, &q| m | bit(n, q));
        let d_t = 1usize << targets.len();
        let dim = self.dim();
        // Target-bit patterns as full-index masks.
        let mut patterns = [0usize; 4];
        for (s, slot) in patterns.iter_mut().enumerate().take(d_t) {
            for (t, &q) in targets.iter().enumerate() {
                if s >> (targets.len() - 1 - t) & 1 == 1 {
                    *slot |= bit(n, q);
                }
            }
        }
        let patterns = &patterns[..d_t];
        let data = self.matrix.as_mut_slice();
        for j in 0..dim {
            for i in 0..dim {
                if (i ^ j) & target_mask != 0 {
                    data[j * dim + i] *= 1.0 - p;
                }
            }
        }
        for rj in (0..dim).filter(|x| x & target_mask == 0) {
            for ri in (0..dim).filter(|x| x & target_mask == 0) {
                let traced: Complex64 = patterns.iter().map(|&s| data[(rj | s) * dim + (ri | s)]).sum();
                let mixed = traced * (p / d_t as f64);
                for &s in patterns {
                    let e = &mut data[(rj | s) * dim + (ri | s)];
                    *e = *e * (1.0 - p) + mixed;
                }
            }
        }
    }
}

/// Gate-local depolarizing probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub depolarizing_prob_1q: f64,
    pub depolarizing_prob_2q: f64,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        let model = Self { depolarizing_prob_1q: p1, depolarizing_prob_2q: p2 };
        model.validate()?;
        Ok(model)
    }

    pub fn noiseless() -> Self {
        Self { depolarizing_prob_1q: 0.0, depolarizing_prob_2q: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for p in [self.depolarizing_prob_1q, self.depolarizing_prob_2q] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("depolarizing probability {p} not in [0, 1]")));
            }
        }
        Ok(())
    }

    fn prob_for(&self, gate: &GateOp) -> f64 {
        if gate.arity() == 1 {
            self.depolarizing_prob_1q
        } else {
            self.depolarizing_prob_2q
        }
    }
}

pub fn apply_gate(state: &StateVector, gate: &GateOp) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_in_place(gate)?;
    Ok(out)
}

/// Runs a whole circuit on a pure state.
pub fn run_circuit(state: &StateVector, gates: &[GateOp]) -> Result<StateVector> {
    let mut out = state.clone();
    for g in gates {
        out.apply_in_place(g)?;
    }
    Ok(out)
}

/// Unitary conjugation followed by depolarization of the gate's targets.
pub fn apply_gate_noisy(rho: &DensityMatrix, gate: &GateOp, noise: &NoiseModel) -> Result<DensityMatrix> {
    noise.validate()?;
    let mut out = rho.clone();
    out.conjugate_in_place(gate)?;
    out.depolarize_in_place(&gate.targets, noise.prob_for(gate));
    Ok(out)
}

pub fn run_circuit_noisy(rho: &DensityMatrix, gates: &[GateOp], noise: &NoiseModel) -> Result<DensityMatrix> {
    noise.validate()?;
    let mut out = rho.clone();
    for g in gates {
        out.conjugate_in_place(g)?;
        out.depolarize_in_place(&g.targets, noise.prob_for(g));
    }
    Ok(out)
}

/// A state the observables can be measured on.
pub enum QuantumState<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a StateVector> for QuantumState<'a> {
    fn from(s: &'a StateVector) -> Self {
        QuantumState::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for QuantumState<'a> {
    fn from(r: &'a DensityMatrix) -> Self {
        QuantumState::Mixed(r)
    }
}

impl QuantumState<'_> {
    fn n_qubits(&self) -> usize {
        match self {
            QuantumState::Pure(s) => s.n_qubits,
            QuantumState::Mixed(r) => r.n_qubits,
        }
    }

    /// ⟨P⟩ for a single Pauli string (complex, so callers can check the residue).
    fn pauli_value(&self, label: &PauliString) -> Complex64 {
        let flip = label.flip_mask();
        match self {
            QuantumState::Pure(s) => s
                .amplitudes
                .iter()
                .enumerate()
                .map(|(col, a)| s.amplitudes[col ^ flip].conj() * label.phase_on(col) * a)
                .sum(),
            QuantumState::Mixed(r) => (0..r.dim())
                .map(|col| label.phase_on(col) * r.matrix[(col, col ^ flip)])
                .sum(),
        }
    }
}

fn check_dims(state: &QuantumState<'_>, observable: &PauliSum) -> Result<()> {
    if state.n_qubits() != observable.qubit_count() {
        return Err(Error::InvalidArgument(format!(
            "observable on {} qubits applied to a {}-qubit state",
            observable.qubit_count(),
            state.n_qubits()
        )));
    }
    Ok(())
}

/// `Σ_P c_P ⟨P⟩`, GHz.
pub fn expectation<'a>(state: impl Into<QuantumState<'a>>, observable: &PauliSum) -> Result<f64> {
    let state = state.into();
    check_dims(&state, observable)?;
    let total: Complex64 = observable
        .terms()
        .iter()
        .map(|t| state.pauli_value(&t.label) * t.coeff)
        .sum();
    let scale = observable.terms().iter().map(|t| t.coeff.abs()).sum::<f64>().max(1.0);
    if total.im.abs() > 1e-10 * scale {
        return Err(Error::InvalidArgument(format!(
            "expectation has imaginary residue {:e}",
            total.im
        )));
    }
    Ok(total.re)
}

/// `Tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // Tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ.
    rho.matrix.iter().map(|z| z.norm_sqr()).sum()
}

/// Finite-shot estimate of `expectation`.
///
/// Each non-identity term is measured with `shots` independent ±1 outcomes;
/// the number of +1 outcomes is binomial with probability `(1 + ⟨P⟩) / 2`.
pub fn sample_expectation<'a>(
    state: impl Into<QuantumState<'a>>,
    observable: &PauliSum,
    shots: u64,
    seed: u64,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    let state = state.into();
    check_dims(&state, observable)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for t in observable.terms() {
        if t.label.is_identity() {
            total += t.coeff;
            continue;
        }
        let value = state.pauli_value(&t.label).re.clamp(-1.0, 1.0);
        let p_plus = (1.0 + value) / 2.0;
        let plus = Binomial::new(shots, p_plus)
            .map_err(|e| Error::InvalidArgument(format!("binomial sampling failed: {e}")))?
            .sample(&mut rng);
        let estimate = (2.0 * plus as f64 - shots as f64) / shots as f64;
        total += t.coeff * estimate;
    }
    Ok(total)
}
