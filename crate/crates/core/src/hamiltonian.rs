//! Inductively shunted Josephson junction in the Fock basis of its harmonic part.
//!
//! The circuit Hamiltonian is
//!
//! ```text
//! H = 4 E_C n² − E_J cos(φ + φ_ext) + ½ E_L φ²
//! ```
//!
//! With `φ = A (a + a†)`, `n = i (a† − a) / (2A)` and `A = (2 E_C / E_L)^{1/4}`,
//! the harmonic part becomes `ω a†a` with `ω = √(8 E_C E_L)` and the cosine is a
//! sum of two displacement operators:
//!
//! ```text
//! H = ω a†a − E_J (D(iA) e^{iφ_ext} + D(−iA) e^{−iφ_ext}) / 2
//! ```

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{CMatrix, Complex64};

/// Default external-flux step for the central-difference flux sensitivity.
pub const DEFAULT_FLUX_STEP: f64 = 1e-3;

/// Fock cutoff used for exact design metrics.
pub const METRICS_CUTOFF: usize = 40;

/// Fock cutoff of the 3-qubit encoding (8 levels).
pub const ENCODING_CUTOFF: usize = 7;

/// A design point of the circuit. Energies in GHz, flux in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub e_c: f64,
    pub e_j: f64,
    pub e_l: f64,
    pub phi_ext: f64,
}

impl CircuitParams {
    pub fn new(e_c: f64, e_j: f64, e_l: f64, phi_ext: f64) -> Result<Self> {
        let params = Self {
            e_c,
            e_j,
            e_l,
            phi_ext,
        };
        params.validate()?;
        Ok(params)
    }

    /// The fixed point used throughout the sweep: E_C = 0.7, E_J = 4.5, φ_ext = π/2.
    pub fn sweep_default(e_l: f64) -> Self {
        Self {
            e_c: 0.7,
            e_j: 4.5,
            e_l,
            phi_ext: std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_c.is_finite() && self.e_c > 0.0) {
            return Err(Error::InvalidParams(format!("e_c must be > 0, got {}", self.e_c)));
        }
        if !(self.e_l.is_finite() && self.e_l > 0.0) {
            return Err(Error::InvalidParams(format!("e_l must be > 0, got {}", self.e_l)));
        }
        if !(self.e_j.is_finite() && self.e_j >= 0.0) {
            return Err(Error::InvalidParams(format!("e_j must be >= 0, got {}", self.e_j)));
        }
        if !self.phi_ext.is_finite() {
            return Err(Error::InvalidParams(format!(
                "phi_ext must be finite, got {}",
                self.phi_ext
            )));
        }
        Ok(())
    }

    pub fn with_e_l(self, e_l: f64) -> Self {
        Self { e_l, ..self }
    }

    pub fn with_phi_ext(self, phi_ext: f64) -> Self {
        Self { phi_ext, ..self }
    }

    /// Plasma frequency of the harmonic part, √(8 E_C E_L).
    pub fn omega(&self) -> f64 {
        (8.0 * self.e_c * self.e_l).sqrt()
    }

    /// Zero-point phase amplitude, (2 E_C / E_L)^{1/4}.
    pub fn amp_a(&self) -> f64 {
        (2.0 * self.e_c / self.e_l).powf(0.25)
    }
}

/// Truncated Fock-basis Hamiltonian. The basis is |0⟩..|cutoff⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct FockHamiltonian {
    pub params: CircuitParams,
    pub cutoff: usize,
    pub matrix: CMatrix,
    pub omega: f64,
    pub amp_a: f64,
}

impl FockHamiltonian {
    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }

    /// Largest imaginary part of any entry.
    pub fn imaginary_residue(&self) -> f64 {
        self.matrix.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

pub(crate) fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Truncated matrix of `D(α) = exp(α a† − α* a)` from the closed-form Laguerre elements.
///
/// Each element is the exact infinite-dimensional value, so truncation only
/// discards rows and columns beyond `dim`.
pub fn displacement_matrix(alpha: Complex64, dim: usize) -> Result<CMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension("displacement matrix needs dim >= 1".into()));
    }
    let x = alpha.norm_sqr();
    let envelope = (-x / 2.0).exp();
    let mut d = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        for col in 0..dim {
            // ⟨m|D|n⟩ with (lo, hi) = (min, max) of (m, n).
            let (lo, hi) = if row >= col { (col, row) } else { (row, col) };
            let k = hi - lo;
            let ratio = (lo + 1..=hi).fold(1.0, |acc, j| acc / (j as f64).sqrt());
            let base = if row >= col { alpha } else { -alpha.conj() };
            d[(row, col)] = base.powu(k as u32) * (ratio * envelope * laguerre(lo, k, x));
        }
    }
    Ok(d)
}

/// Generalized Laguerre polynomial L_n^{(k)}(x) by the three-term recurrence.
fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Builds `ω a†a − E_J (D(iA) e^{iφ_ext} + D(−iA) e^{−iφ_ext}) / 2` on |0⟩..|cutoff⟩.
///
/// Any cutoff is accepted; a spectrum of three levels needs `cutoff >= 2`.
pub fn build_fock_hamiltonian(params: &CircuitParams, cutoff: usize) -> Result<FockHamiltonian> {
    params.validate()?;
    let dim = cutoff + 1;
    let omega = params.omega();
    let amp_a = params.amp_a();
    let d_plus = displacement_matrix(Complex64::new(0.0, amp_a), dim)?;
    let phase = Complex64::from_polar(1.0, params.phi_ext);

    let mut matrix = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            // D(−iA) = D(iA)†, so the second term is the adjoint of the first.
            let forward = d_plus[(i, j)] * phase;
            let backward = (d_plus[(j, i)] * phase).conj();
            matrix[(i, j)] = -(forward + backward) * (params.e_j / 2.0);
        }
        matrix[(i, i)] += Complex64::new(omega * i as f64, 0.0);
    }
    Ok(FockHamiltonian {
        params: *params,
        cutoff,
        matrix,
        omega,
        amp_a,
    })
}

/// Lowest eigenpairs, energies ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub energies: Vec<f64>,
    /// Eigenvectors as columns, in the same order as `energies`.
    pub eigenvectors: CMatrix,
}

impl SpectrumResult {
    pub fn eigenvector(&self, level: usize) -> Vec<Complex64> {
        self.eigenvectors.column(level).iter().copied().collect()
    }
}

/// Full Hermitian eigendecomposition of a dense matrix, ascending.
///
/// Each eigenvector's phase is fixed so its largest-magnitude entry is real and positive.
pub fn hermitian_eigen(matrix: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = matrix.nrows();
    let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let pivot = col
            .iter()
            .copied()
            .fold(Complex64::new(0.0, 0.0), |best, z| if z.norm() > best.norm() + 1e-12 { z } else { best });
        let fix = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { Complex64::new(1.0, 0.0) };
        for r in 0..n {
            vectors[(r, dst)] = col[r] * fix;
        }
    }
    (energies, vectors)
}

/// Lowest `k` eigenvalues and eigenvectors of the truncated Hamiltonian.
pub fn exact_spectrum(h: &FockHamiltonian, k: usize) -> Result<SpectrumResult> {
    let dim = h.dim();
    if k == 0 || k > dim {
        return Err(Error::InvalidArgument(format!(
            "requested {k} levels from a {dim}-dimensional Hamiltonian"
        )));
    }
    let (energies, vectors) = hermitian_eigen(&h.matrix);
    Ok(SpectrumResult {
        energies: energies[..k].to_vec(),
        eigenvectors: vectors.columns(0, k).into_owned(),
    })
}

/// Lowest `k` energies at a design point, building the Hamiltonian on the way.
pub fn lowest_energies(params: &CircuitParams, cutoff: usize, k: usize) -> Result<Vec<f64>> {
    let h = build_fock_hamiltonian(params, cutoff)?;
    Ok(exact_spectrum(&h, k)?.energies)
}

/// Per-level shift `E_i(high) − E_i(low)` of the lowest `k` levels between two cutoffs.
pub fn truncation_shift(
    params: &CircuitParams,
    low_cutoff: usize,
    high_cutoff: usize,
    k: usize,
) -> Result<Vec<f64>> {
    let low = lowest_energies(params, low_cutoff, k)?;
    let high = lowest_energies(params, high_cutoff, k)?;
    Ok(high.iter().zip(&low).map(|(h, l)| h - l).collect())
}

/// Potential energy `−E_J cos(φ + φ_ext) + ½ E_L φ²` in GHz.
pub fn potential(params: &CircuitParams, phi: f64) -> f64 {
    -params.e_j * (phi + params.phi_ext).cos() + 0.5 * params.e_l * phi * phi
}

fn potential_slope(params: &CircuitParams, phi: f64) -> f64 {
    params.e_j * (phi + params.phi_ext).sin() + params.e_l * phi
}

/// A local minimum of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Valley {
    /// Inductor phase φ at the minimum.
    pub phi: f64,
    /// Junction phase φ + φ_ext at the minimum.
    pub junction_phase: f64,
    /// Potential value at the minimum, GHz. Lower is deeper.
    pub depth: f64,
}

/// Local minima of [`potential`] on `[lo, hi]`, deepest (lowest potential) first.
///
/// Minima are located on a uniform grid and then refined by bisection on the
/// slope until the bracket is narrower than 1e-9 rad. Minima at the range edges
/// are not valleys and are skipped.
pub fn count_valleys(
    params: &CircuitParams,
    phi_range: (f64, f64),
    grid_points: usize,
) -> Result<Vec<Valley>> {
    let (lo, hi) = phi_range;
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return Err(Error::InvalidArgument(format!("empty phase range [{lo}, {hi}]")));
    }
    if grid_points < 100 {
        return Err(Error::InvalidArgument(format!(
            "valley scan needs at least 100 grid points, got {grid_points}"
        )));
    }
    params.validate()?;
    let step = (hi - lo) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points).map(|i| lo + step * i as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&phi| potential(params, phi)).collect();

    let mut valleys = Vec::new();
    for i in 1..grid_points - 1 {
        if !(values[i] < values[i - 1] && values[i] <= values[i + 1]) {
            continue;
        }
        let (mut left, mut right) = (grid[i - 1], grid[i + 1]);
        while right - left > 1e-9 {
            let mid = 0.5 * (left + right);
            if potential_slope(params, mid) < 0.0 {
                left = mid;
            } else {
                right = mid;
            }
        }
        let phi = 0.5 * (left + right);
        valleys.push(Valley {
            phi,
            junction_phase: phi + params.phi_ext,
            depth: potential(params, phi),
        });
    }
    valleys.sort_by(|a, b| a.depth.total_cmp(&b.depth));
    Ok(valleys)
}

/// Transition frequencies, flux sensitivity and transition matrix elements of the 0-1 qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitMetrics {
    pub f01: f64,
    pub f12: f64,
    pub anharmonicity: f64,
    /// |∂f01/∂φ_ext| in GHz/rad.
    pub flux_sensitivity: f64,
    /// |⟨0|n|1⟩|
    pub n_element: f64,
    /// |⟨0|φ|1⟩|
    pub phi_element: f64,
}

/// Charge operator `n = i (a† − a) / (2A)` on |0⟩..|dim−1⟩.
pub fn charge_operator(amp_a: f64, dim: usize) -> CMatrix {
    let mut n = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        let s = (k as f64).sqrt() / (2.0 * amp_a);
        // a†|k−1⟩ = √k |k⟩, a|k⟩ = √k |k−1⟩
        n[(k, k - 1)] = Complex64::new(0.0, s);
        n[(k - 1, k)] = Complex64::new(0.0, -s);
    }
    n
}

/// Phase operator `φ = A (a† + a)` on |0⟩..|dim−1⟩.
pub fn phase_operator(amp_a: f64, dim: usize) -> CMatrix {
    let mut phi = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        let s = Complex64::new(amp_a * (k as f64).sqrt(), 0.0);
        phi[(k, k - 1)] = s;
        phi[(k - 1, k)] = s;
    }
    phi
}

fn transition_element(op: &CMatrix, spectrum: &SpectrumResult, a: usize, b: usize) -> f64 {
    let va = spectrum.eigenvectors.column(a);
    let vb = spectrum.eigenvectors.column(b);
    (va.adjoint() * op * vb)[(0, 0)].norm()
}

fn f01_at(params: &CircuitParams, cutoff: usize) -> Result<f64> {
    let e = lowest_energies(params, cutoff, 2)?;
    Ok(e[1] - e[0])
}

/// Design metrics of the lowest transition at `params`.
pub fn qubit_metrics(params: &CircuitParams, cutoff: usize, flux_step: f64) -> Result<QubitMetrics> {
    if !(flux_step.is_finite() && flux_step > 0.0) {
        return Err(Error::InvalidArgument(format!("flux_step must be > 0, got {flux_step}")));
    }
    let h = build_fock_hamiltonian(params, cutoff)?;
    let spectrum = exact_spectrum(&h, 3)?;
    let e = &spectrum.energies;
    let f01 = e[1] - e[0];
    let f12 = e[2] - e[1];

    let upper = f01_at(&params.with_phi_ext(params.phi_ext + flux_step), cutoff)?;
    let lower = f01_at(&params.with_phi_ext(params.phi_ext - flux_step), cutoff)?;
    let flux_sensitivity = (upper - lower).abs() / (2.0 * flux_step);

    let dim = h.dim();
    let n_element = transition_element(&charge_operator(h.amp_a, dim), &spectrum, 0, 1);
    let phi_element = transition_element(&phase_operator(h.amp_a, dim), &spectrum, 0, 1);

    Ok(QubitMetrics {
        f01,
        f12,
        anharmonicity: f12 - f01,
        flux_sensitivity,
        n_element,
        phi_element,
    })
}

/// Real part of a matrix, for callers that know the input is real.
pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}
