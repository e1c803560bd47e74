//! Run configuration: built-in defaults, then an optional JSON or TOML file,
//! then command-line overrides.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use plasmonium_core::hamiltonian::{CircuitParams, DEFAULT_FLUX_STEP, ENCODING_CUTOFF, METRICS_CUTOFF};
use plasmonium_core::pauli::DEFAULT_DROP_TOL;
use plasmonium_core::simulator::NoiseModel;
use plasmonium_core::ssvqe::{derive_seed, SpsaConfig, SSVQE_STEP_GAIN};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Sweep step used by `ssvqe` when none is configured.
pub const SSVQE_STEP: f64 = 0.1;
/// Sweep step used by `spectrum` and `anticross` when none is configured.
pub const EXACT_STEP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    /// Worker threads for sweep points; 0 uses every available core. Not
    /// echoed, since it cannot change any result.
    #[serde(skip_serializing)]
    pub workers: usize,
    pub circuit: CircuitConfig,
    pub sweep: SweepConfig,
    pub ssvqe: SsvqeConfig,
    pub metrics: MetricsConfig,
    pub decompose: DecomposeConfig,
    pub valleys: ValleysConfig,
    pub anticross: AnticrossConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 0,
            circuit: CircuitConfig::default(),
            sweep: SweepConfig::default(),
            ssvqe: SsvqeConfig::default(),
            metrics: MetricsConfig::default(),
            decompose: DecomposeConfig::default(),
            valleys: ValleysConfig::default(),
            anticross: AnticrossConfig::default(),
        }
    }
}

/// Fixed circuit energies in GHz; `E_L` comes from the sweep or command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitConfig {
    pub e_c: f64,
    pub e_j: f64,
    pub phi_ext: f64,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self { e_c: 0.7, e_j: 4.5, phi_ext: FRAC_PI_2 }
    }
}

impl CircuitConfig {
    pub fn params(&self, e_l: f64) -> CliResult<CircuitParams> {
        CircuitParams::new(self.e_c, self.e_j, e_l, self.phi_ext).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub e_l_start: f64,
    pub e_l_stop: f64,
    /// `None` means the command's default step.
    pub e_l_step: Option<f64>,
    pub cutoff: usize,
    pub drop_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { e_l_start: 0.2, e_l_stop: 3.0, e_l_step: None, cutoff: ENCODING_CUTOFF, drop_tol: DEFAULT_DROP_TOL }
    }
}

impl SweepConfig {
    /// Grid values `start + i·step` through `stop`, rounded to 1e-12 GHz so
    /// that 0.2 + 0.1 prints as 0.3.
    pub fn grid(&self) -> Vec<f64> {
        let step = self.e_l_step.unwrap_or(SSVQE_STEP);
        let n = ((self.e_l_stop - self.e_l_start) / step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| ((self.e_l_start + step * i as f64) * 1e12).round() / 1e12)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsvqeConfig {
    pub iterations: usize,
    pub restarts: usize,
    pub a: f64,
    pub c: f64,
    /// Stability constant; `None` means a tenth of `iterations`.
    pub big_a: Option<f64>,
    pub alpha: f64,
    pub gamma: f64,
    pub shots: Option<u64>,
    pub noise: Option<NoiseModel>,
    pub mitigate: bool,
    /// Write each point's full optimizer trace under `history/`.
    pub dump_history: bool,
}

impl Default for SsvqeConfig {
    fn default() -> Self {
        let base = SpsaConfig::for_ssvqe(2000, 0);
        Self {
            iterations: base.iterations,
            restarts: 5,
            a: SSVQE_STEP_GAIN,
            c: base.c,
            big_a: None,
            alpha: base.alpha,
            gamma: base.gamma,
            shots: None,
            noise: None,
            mitigate: false,
            dump_history: false,
        }
    }
}

impl SsvqeConfig {
    /// SPSA settings for sweep point `index`, seeded from the run seed.
    pub fn spsa(&self, run_seed: u64, index: usize) -> SpsaConfig {
        SpsaConfig {
            a: self.a,
            c: self.c,
            big_a: self.big_a.unwrap_or(self.iterations as f64 / 10.0),
            alpha: self.alpha,
            gamma: self.gamma,
            iterations: self.iterations,
            seed: point_seed(run_seed, index),
        }
    }
}

/// Seed of sweep point `index`.
pub fn point_seed(run_seed: u64, index: usize) -> u64 {
    derive_seed(run_seed, index as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub e_l: f64,
    pub cutoff: usize,
    pub flux_start: f64,
    pub flux_stop: f64,
    pub flux_points: usize,
    pub flux_step: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { e_l: 2.2, cutoff: METRICS_CUTOFF, flux_start: -0.5, flux_stop: 0.5, flux_points: 21, flux_step: DEFAULT_FLUX_STEP }
    }
}

impl MetricsConfig {
    pub fn flux_grid(&self) -> Vec<f64> {
        if self.flux_points == 1 {
            return vec![self.flux_start];
        }
        let h = (self.flux_stop - self.flux_start) / (self.flux_points - 1) as f64;
        (0..self.flux_points).map(|i| self.flux_start + h * i as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeConfig {
    pub e_l: f64,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self { e_l: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValleysConfig {
    pub e_l: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    pub grid_points: usize,
    /// Samples of the potential curve written for plotting.
    pub curve_points: usize,
}

impl Default for ValleysConfig {
    fn default() -> Self {
        Self { e_l: 0.2, phi_min: -2.0 * PI, phi_max: 4.0 * PI, grid_points: 4000, curve_points: 601 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnticrossConfig {
    pub level_pair: [usize; 2],
}

impl Default for AnticrossConfig {
    fn default() -> Self {
        Self { level_pair: [1, 2] }
    }
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be a positive number, got {v}")))
    }
}

impl Config {
    /// Reads a config file; `.toml` is parsed as TOML, anything else as JSON.
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let is_toml = path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("toml"));
        let parsed = if is_toml {
            toml::from_str(&text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fills in the sweep step for a command that has not been given one.
    pub fn with_default_step(mut self, step: f64) -> Self {
        self.sweep.e_l_step.get_or_insert(step);
        self
    }

    pub fn validate_circuit(&self) -> CliResult<()> {
        let c = &self.circuit;
        if !(c.e_c.is_finite() && c.e_c > 0.0) || !(c.e_j.is_finite() && c.e_j >= 0.0) || !c.phi_ext.is_finite() {
            return Err(CliError::Config(format!("invalid circuit energies {c:?}")));
        }
        Ok(())
    }

    pub fn validate_sweep(&self) -> CliResult<()> {
        self.validate_circuit()?;
        let s = &self.sweep;
        positive("sweep.e_l_start", s.e_l_start)?;
        positive("sweep.e_l_stop", s.e_l_stop)?;
        if let Some(step) = s.e_l_step {
            positive("sweep.e_l_step", step)?;
        }
        if s.e_l_start > s.e_l_stop {
            return Err(CliError::Config(format!(
                "sweep.e_l_start {} exceeds sweep.e_l_stop {}",
                s.e_l_start, s.e_l_stop
            )));
        }
        if s.cutoff < 2 {
            return Err(CliError::Config(format!("sweep.cutoff must be >= 2, got {}", s.cutoff)));
        }
        if !(s.drop_tol.is_finite() && s.drop_tol >= 0.0) {
            return Err(CliError::Config(format!("sweep.drop_tol must be >= 0, got {}", s.drop_tol)));
        }
        Ok(())
    }

    pub fn validate_ssvqe(&self) -> CliResult<()> {
        self.validate_sweep()?;
        if self.sweep.cutoff != ENCODING_CUTOFF {
            return Err(CliError::Config(format!(
                "ssvqe runs on the 3-qubit encoding and needs sweep.cutoff = {ENCODING_CUTOFF}, got {}",
                self.sweep.cutoff
            )));
        }
        let q = &self.ssvqe;
        if q.restarts == 0 {
            return Err(CliError::Config("ssvqe.restarts must be >= 1".into()));
        }
        if q.shots == Some(0) {
            return Err(CliError::Config("ssvqe.shots must be >= 1".into()));
        }
        q.spsa(self.seed, 0).validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(noise) = &q.noise {
            noise.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if q.mitigate && q.noise.is_none() {
            return Err(CliError::Config("ssvqe.mitigate needs a noise model".into()));
        }
        Ok(())
    }

    pub fn validate_metrics(&self) -> CliResult<()> {
        self.validate_circuit()?;
        let m = &self.metrics;
        positive("metrics.e_l", m.e_l)?;
        positive("metrics.flux_step", m.flux_step)?;
        if m.cutoff < 3 {
            return Err(CliError::Config(format!("metrics.cutoff must be >= 3, got {}", m.cutoff)));
        }
        if m.flux_points == 0 || !m.flux_start.is_finite() || !m.flux_stop.is_finite() || m.flux_start > m.flux_stop {
            return Err(CliError::Config(format!(
                "invalid flux range [{}, {}] with {} points",
                m.flux_start, m.flux_stop, m.flux_points
            )));
        }
        Ok(())
    }

    pub fn validate_decompose(&self) -> CliResult<()> {
        self.validate_circuit()?;
        positive("decompose.e_l", self.decompose.e_l)?;
        if self.sweep.cutoff != ENCODING_CUTOFF {
            return Err(CliError::Config(format!(
                "decompose needs sweep.cutoff = {ENCODING_CUTOFF} for the 3-qubit encoding, got {}",
                self.sweep.cutoff
            )));
        }
        Ok(())
    }

    pub fn validate_valleys(&self) -> CliResult<()> {
        self.validate_circuit()?;
        let v = &self.valleys;
        positive("valleys.e_l", v.e_l)?;
        if !(v.phi_min.is_finite() && v.phi_max.is_finite() && v.phi_min < v.phi_max) {
            return Err(CliError::Config(format!("empty phase range [{}, {}]", v.phi_min, v.phi_max)));
        }
        if v.grid_points < 100 || v.curve_points < 2 {
            return Err(CliError::Config("valleys.grid_points must be >= 100 and curve_points >= 2".into()));
        }
        Ok(())
    }

    pub fn validate_anticross(&self) -> CliResult<()> {
        self.validate_sweep()?;
        let [lo, hi] = self.anticross.level_pair;
        if lo >= hi || hi > 2 {
            return Err(CliError::Config(format!("level pair ({lo}, {hi}) must satisfy lo < hi <= 2")));
        }
        if self.sweep.grid().len() < 3 {
            return Err(CliError::Config("anticross needs a sweep of at least 3 points".into()));
        }
        Ok(())
    }
}
