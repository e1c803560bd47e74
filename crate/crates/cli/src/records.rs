//! Output rows and their self-checks.

use plasmonium_core::hamiltonian::{QubitMetrics, Valley};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub e_l: f64,
    /// λ0, λ1, λ2 from exact diagonalization at the sweep cutoff.
    pub exact_energies: [f64; 3],
    pub vqe_energies: Option<[f64; 3]>,
    pub mitigated_energies: Option<[f64; 3]>,
    pub purities: Option<[f64; 3]>,
    /// Level shifts from the sweep cutoff to the metrics cutoff.
    pub truncation_shift: Option<[f64; 3]>,
    pub term_count: Option<usize>,
    pub iterations_used: Option<usize>,
    pub cost: Option<f64>,
    pub shots: Option<u64>,
    pub seed: u64,
}

impl SweepRecord {
    pub fn exact(e_l: f64, exact_energies: [f64; 3], seed: u64) -> Self {
        Self {
            e_l,
            exact_energies,
            vqe_energies: None,
            mitigated_energies: None,
            purities: None,
            truncation_shift: None,
            term_count: None,
            iterations_used: None,
            cost: None,
            shots: None,
            seed,
        }
    }

    /// Checks that exact levels ascend and that noiseless, exactly measured
    /// VQE ground energies respect the variational bound.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Runtime(format!("record at E_L = {}: {msg}", self.e_l)));
        let ex = self.exact_energies;
        if !self.e_l.is_finite() || ex.iter().any(|e| !e.is_finite()) {
            return bad("non-finite values".into());
        }
        if !(ex[0] <= ex[1] && ex[1] <= ex[2]) {
            return bad(format!("exact energies not ascending: {ex:?}"));
        }
        if let Some(vqe) = self.vqe_energies {
            if self.purities.is_none() && self.shots.is_none() && vqe[0] < ex[0] - 1e-9 {
                return bad(format!("noiseless E0 {} below exact ground {}", vqe[0], ex[0]));
            }
        }
        if let Some(p) = self.purities {
            if p.iter().any(|&v| !(v > 0.0 && v <= 1.0 + 1e-10)) {
                return bad(format!("purities outside (0, 1]: {p:?}"));
            }
        }
        Ok(())
    }

    pub fn max_vqe_error(&self) -> Option<f64> {
        self.vqe_energies.map(|v| max_abs_diff(&v, &self.exact_energies))
    }

    pub fn mean_vqe_deviation(&self) -> Option<f64> {
        self.vqe_energies.map(|v| mean_abs_diff(&v, &self.exact_energies))
    }

    pub fn mean_mitigated_deviation(&self) -> Option<f64> {
        self.mitigated_energies.map(|v| mean_abs_diff(&v, &self.exact_energies))
    }
}

fn max_abs_diff(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn mean_abs_diff(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 3.0
}

/// Flat CSV form of [`SweepRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub e_l: f64,
    pub exact_e0: f64,
    pub exact_e1: f64,
    pub exact_e2: f64,
    pub vqe_e0: Option<f64>,
    pub vqe_e1: Option<f64>,
    pub vqe_e2: Option<f64>,
    pub mitigated_e0: Option<f64>,
    pub mitigated_e1: Option<f64>,
    pub mitigated_e2: Option<f64>,
    pub purity_0: Option<f64>,
    pub purity_1: Option<f64>,
    pub purity_2: Option<f64>,
    pub shift_e0: Option<f64>,
    pub shift_e1: Option<f64>,
    pub shift_e2: Option<f64>,
    pub term_count: Option<usize>,
    pub iterations_used: Option<usize>,
    pub cost: Option<f64>,
    pub shots: Option<u64>,
    pub seed: u64,
}

fn split(v: Option<[f64; 3]>) -> [Option<f64>; 3] {
    match v {
        Some([a, b, c]) => [Some(a), Some(b), Some(c)],
        None => [None; 3],
    }
}

fn join(name: &str, v: [Option<f64>; 3]) -> CliResult<Option<[f64; 3]>> {
    match v {
        [Some(a), Some(b), Some(c)] => Ok(Some([a, b, c])),
        [None, None, None] => Ok(None),
        _ => Err(CliError::Runtime(format!("partially filled {name} columns"))),
    }
}

impl From<&SweepRecord> for SweepRow {
    fn from(r: &SweepRecord) -> Self {
        let [vqe_e0, vqe_e1, vqe_e2] = split(r.vqe_energies);
        let [mitigated_e0, mitigated_e1, mitigated_e2] = split(r.mitigated_energies);
        let [purity_0, purity_1, purity_2] = split(r.purities);
        let [shift_e0, shift_e1, shift_e2] = split(r.truncation_shift);
        Self {
            e_l: r.e_l,
            exact_e0: r.exact_energies[0],
            exact_e1: r.exact_energies[1],
            exact_e2: r.exact_energies[2],
            vqe_e0,
            vqe_e1,
            vqe_e2,
            mitigated_e0,
            mitigated_e1,
            mitigated_e2,
            purity_0,
            purity_1,
            purity_2,
            shift_e0,
            shift_e1,
            shift_e2,
            term_count: r.term_count,
            iterations_used: r.iterations_used,
            cost: r.cost,
            shots: r.shots,
            seed: r.seed,
        }
    }
}

impl TryFrom<SweepRow> for SweepRecord {
    type Error = CliError;

    fn try_from(r: SweepRow) -> CliResult<Self> {
        Ok(Self {
            e_l: r.e_l,
            exact_energies: [r.exact_e0, r.exact_e1, r.exact_e2],
            vqe_energies: join("vqe", [r.vqe_e0, r.vqe_e1, r.vqe_e2])?,
            mitigated_energies: join("mitigated", [r.mitigated_e0, r.mitigated_e1, r.mitigated_e2])?,
            purities: join("purity", [r.purity_0, r.purity_1, r.purity_2])?,
            truncation_shift: join("shift", [r.shift_e0, r.shift_e1, r.shift_e2])?,
            term_count: r.term_count,
            iterations_used: r.iterations_used,
            cost: r.cost,
            shots: r.shots,
            seed: r.seed,
        })
    }
}

/// A sweep point that failed; the rest of the sweep continues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub index: usize,
    pub e_l: f64,
    pub message: String,
}

/// Metrics at one flux bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub phi_ext: f64,
    pub f01: f64,
    pub f12: f64,
    pub anharmonicity: f64,
    pub flux_sensitivity: f64,
    pub n_element: f64,
    pub phi_element: f64,
}

impl MetricsRecord {
    pub fn new(phi_ext: f64, m: &QubitMetrics) -> Self {
        Self {
            phi_ext,
            f01: m.f01,
            f12: m.f12,
            anharmonicity: m.anharmonicity,
            flux_sensitivity: m.flux_sensitivity,
            n_element: m.n_element,
            phi_element: m.phi_element,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValleyRecord {
    pub phi: f64,
    pub junction_phase: f64,
    pub depth: f64,
}

impl From<&Valley> for ValleyRecord {
    fn from(v: &Valley) -> Self {
        Self { phi: v.phi, junction_phase: v.junction_phase, depth: v.depth }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSample {
    pub phi: f64,
    pub potential: f64,
}

/// Result of the anti-crossing search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntiCrossing {
    pub level_lo: usize,
    pub level_hi: usize,
    pub e_l_star: f64,
    pub min_gap: f64,
    /// False when the smallest gap sits on a sweep endpoint.
    pub interior: bool,
    pub grid_e_l: f64,
    pub grid_gap: f64,
}
