//! Argument parsing and the per-command drivers that write output files.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use plasmonium_core::simulator::NoiseModel;
use serde::Serialize;
use serde_json::json;

use crate::config::{Config, EXACT_STEP, SSVQE_STEP};
use crate::error::{CliError, CliResult};
use crate::ops;
use crate::output::{ensure_dir, schema_id, write_csv, write_json, Document, Format};
use crate::records::{PointError, SweepRecord, SweepRow};

/// Reported device anharmonicity, GHz.
pub const REFERENCE_ANHARMONICITY: f64 = 0.49;
/// Reference Pauli term count of the 3-qubit encoding.
pub const REFERENCE_TERM_COUNT: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "plasmonium", version, about = "Design sweeps for the inductively shunted Josephson junction")]
pub struct Cli {
    /// JSON or TOML config file (flags override it).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub e_c: Option<f64>,
    #[arg(long, global = true)]
    pub e_j: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub phi_ext: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact lowest-three spectrum over the E_L sweep.
    Spectrum(SweepArgs),
    /// SSVQE over the E_L sweep, optionally noisy and mitigated.
    Ssvqe(SsvqeArgs),
    /// Gray-coded Pauli decomposition at one design point.
    Decompose(PointArgs),
    /// Qubit metrics against external flux.
    Metrics(MetricsArgs),
    /// Potential minima and a sampled potential curve.
    Valleys(ValleysArgs),
    /// Locate the minimum excited-state gap along the sweep.
    Anticross(AnticrossArgs),
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    #[arg(long)]
    pub e_l_start: Option<f64>,
    #[arg(long)]
    pub e_l_stop: Option<f64>,
    #[arg(long)]
    pub e_l_step: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SsvqeArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub spsa_a: Option<f64>,
    #[arg(long)]
    pub spsa_c: Option<f64>,
    #[arg(long)]
    pub shots: Option<u64>,
    /// Single-qubit depolarizing probability; enables noise.
    #[arg(long)]
    pub noise_1q: Option<f64>,
    /// Two-qubit depolarizing probability; enables noise.
    #[arg(long)]
    pub noise_2q: Option<f64>,
    #[arg(long)]
    pub mitigate: bool,
    /// Write each point's optimizer trace under `history/`.
    #[arg(long)]
    pub dump_history: bool,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(long)]
    pub e_l: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub e_l: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub flux_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub flux_stop: Option<f64>,
    #[arg(long)]
    pub flux_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValleysArgs {
    #[arg(long)]
    pub e_l: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnticrossArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Lower level of the pair; the upper one is given by --level-hi.
    #[arg(long)]
    pub level_lo: Option<usize>,
    #[arg(long)]
    pub level_hi: Option<usize>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl SweepArgs {
    fn apply(&self, config: &mut Config) {
        let s = &mut config.sweep;
        set(&mut s.e_l_start, self.e_l_start);
        set(&mut s.e_l_stop, self.e_l_stop);
        if self.e_l_step.is_some() {
            s.e_l_step = self.e_l_step;
        }
        set(&mut s.cutoff, self.cutoff);
    }
}

impl Cli {
    /// Defaults, then the config file, then flags.
    pub fn resolve_config(&self) -> CliResult<Config> {
        let mut config = match &self.config {
            Some(path) => Config::from_file(path)?,
            None => Config::default(),
        };
        set(&mut config.seed, self.seed);
        set(&mut config.workers, self.workers);
        set(&mut config.circuit.e_c, self.e_c);
        set(&mut config.circuit.e_j, self.e_j);
        set(&mut config.circuit.phi_ext, self.phi_ext);
        match &self.command {
            Command::Spectrum(a) => a.apply(&mut config),
            Command::Ssvqe(a) => {
                a.sweep.apply(&mut config);
                let q = &mut config.ssvqe;
                set(&mut q.iterations, a.iterations);
                set(&mut q.restarts, a.restarts);
                set(&mut q.a, a.spsa_a);
                set(&mut q.c, a.spsa_c);
                if a.shots.is_some() {
                    q.shots = a.shots;
                }
                if a.noise_1q.is_some() || a.noise_2q.is_some() {
                    let base = q.noise.unwrap_or(NoiseModel::noiseless());
                    q.noise = Some(NoiseModel {
                        depolarizing_prob_1q: a.noise_1q.unwrap_or(base.depolarizing_prob_1q),
                        depolarizing_prob_2q: a.noise_2q.unwrap_or(base.depolarizing_prob_2q),
                    });
                }
                q.mitigate |= a.mitigate;
                q.dump_history |= a.dump_history;
            }
            Command::Decompose(a) => {
                set(&mut config.decompose.e_l, a.e_l);
                set(&mut config.sweep.cutoff, a.cutoff);
            }
            Command::Metrics(a) => {
                let m = &mut config.metrics;
                set(&mut m.e_l, a.e_l);
                set(&mut m.cutoff, a.cutoff);
                set(&mut m.flux_start, a.flux_start);
                set(&mut m.flux_stop, a.flux_stop);
                set(&mut m.flux_points, a.flux_points);
            }
            Command::Valleys(a) => {
                let v = &mut config.valleys;
                set(&mut v.e_l, a.e_l);
                set(&mut v.phi_min, a.phi_min);
                set(&mut v.phi_max, a.phi_max);
            }
            Command::Anticross(a) => {
                a.sweep.apply(&mut config);
                set(&mut config.anticross.level_pair[0], a.level_lo);
                set(&mut config.anticross.level_pair[1], a.level_hi);
            }
        }
        Ok(config)
    }
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Report {
    pub written: Vec<PathBuf>,
    pub errors: Vec<PointError>,
}

struct Sink<'a> {
    dir: &'a Path,
    format: Format,
    config: &'a Config,
    report: Report,
}

impl Sink<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn csv<R: Serialize>(&mut self, stem: &str, kind: &str, rows: &[R]) -> CliResult<()> {
        if self.format.csv() {
            let path = self.path(&format!("{stem}.csv"));
            write_csv(&path, &schema_id(kind), self.config, rows)?;
            self.report.written.push(path);
        }
        Ok(())
    }

    fn json<R: Serialize + Clone>(
        &mut self,
        stem: &str,
        kind: &str,
        summary: Option<serde_json::Value>,
        records: &[R],
        errors: &[PointError],
    ) -> CliResult<()> {
        if self.format.json() {
            let path = self.path(&format!("{stem}.json"));
            let doc = Document {
                schema: schema_id(kind),
                command: stem.to_string(),
                config: self.config.clone(),
                summary,
                records: records.to_vec(),
                errors: errors.to_vec(),
            };
            write_json(&path, &doc)?;
            self.report.written.push(path);
        }
        Ok(())
    }
}

fn level_extremes(records: &[SweepRecord], pick: impl Fn(&SweepRecord) -> Option<[f64; 3]>) -> Option<[f64; 3]> {
    let mut out = [0.0f64; 3];
    let mut any = false;
    for v in records.iter().filter_map(pick) {
        any = true;
        for k in 0..3 {
            out[k] = out[k].max(v[k].abs());
        }
    }
    any.then_some(out)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Summary statistics of an SSVQE sweep.
pub fn ssvqe_summary(records: &[SweepRecord], failed: usize) -> serde_json::Value {
    let max_error = records.iter().filter_map(SweepRecord::max_vqe_error).fold(0.0, f64::max);
    let mitigated: Vec<&SweepRecord> = records.iter().filter(|r| r.mitigated_energies.is_some()).collect();
    let improved = mitigated
        .iter()
        .filter(|r| r.mean_mitigated_deviation() < r.mean_vqe_deviation())
        .count();
    json!({
        "points": records.len(),
        "failed_points": failed,
        "max_abs_error": max_error,
        "mean_vqe_deviation": mean(records.iter().filter_map(SweepRecord::mean_vqe_deviation)),
        "mean_mitigated_deviation": mean(records.iter().filter_map(SweepRecord::mean_mitigated_deviation)),
        "mitigation_improved_fraction": (!mitigated.is_empty()).then(|| improved as f64 / mitigated.len() as f64),
        "mean_ground_bias": mean(records.iter().filter_map(|r| r.vqe_energies.map(|v| v[0] - r.exact_energies[0]))),
    })
}

pub fn run(cli: &Cli) -> CliResult<Report> {
    let config = cli.resolve_config()?;
    match &cli.command {
        Command::Spectrum(_) => run_spectrum(config.with_default_step(EXACT_STEP), cli),
        Command::Ssvqe(_) => run_ssvqe(config.with_default_step(SSVQE_STEP), cli),
        Command::Decompose(_) => run_decompose(config, cli),
        Command::Metrics(_) => run_metrics(config, cli),
        Command::Valleys(_) => run_valleys(config, cli),
        Command::Anticross(_) => run_anticross(config.with_default_step(EXACT_STEP), cli),
    }
}

fn sink<'a>(cli: &'a Cli, config: &'a Config) -> CliResult<Sink<'a>> {
    ensure_dir(&cli.out)?;
    Ok(Sink { dir: &cli.out, format: cli.format, config, report: Report::default() })
}

fn run_spectrum(config: Config, cli: &Cli) -> CliResult<Report> {
    config.validate_sweep()?;
    let records = ops::spectrum_records(&config)?;
    let summary = json!({
        "points": records.len(),
        "truncation_reference_cutoff": plasmonium_core::hamiltonian::METRICS_CUTOFF,
        "max_abs_truncation_shift": level_extremes(&records, |r| r.truncation_shift),
    });
    let mut out = sink(cli, &config)?;
    let rows: Vec<SweepRow> = records.iter().map(SweepRow::from).collect();
    out.csv("spectrum", "sweep", &rows)?;
    out.json("spectrum", "sweep", Some(summary), &records, &[])?;
    Ok(out.report)
}

fn run_ssvqe(config: Config, cli: &Cli) -> CliResult<Report> {
    config.validate_ssvqe()?;
    let (points, errors) = ops::ssvqe_sweep(&config)?;
    let records: Vec<SweepRecord> = points.iter().map(|p| p.record.clone()).collect();
    let mut out = sink(cli, &config)?;
    let rows: Vec<SweepRow> = records.iter().map(SweepRow::from).collect();
    out.csv("ssvqe", "sweep", &rows)?;
    out.json("ssvqe", "sweep", Some(ssvqe_summary(&records, errors.len())), &records, &errors)?;
    if config.ssvqe.dump_history {
        let grid = config.sweep.grid();
        let mut p = points.iter();
        for (index, &e_l) in grid.iter().enumerate() {
            if errors.iter().any(|e| e.index == index) {
                continue;
            }
            let point = p.next().expect("one point per successful grid index");
            let path = out.path(&format!("history/point_{index:03}.json"));
            write_json(&path, &json!({ "index": index, "e_l": e_l, "result": point.result }))?;
            out.report.written.push(path);
        }
    }
    if !errors.is_empty() {
        let path = out.path("errors.log");
        let log: String = errors
            .iter()
            .map(|e| format!("point {} (E_L = {}): {}\n", e.index, e.e_l, e.message))
            .collect();
        std::fs::write(&path, log).map_err(|e| CliError::io(&path, "write", e))?;
        out.report.written.push(path);
    }
    out.report.errors = errors;
    Ok(out.report)
}

fn run_decompose(config: Config, cli: &Cli) -> CliResult<Report> {
    config.validate_decompose()?;
    let (sum, residual) = ops::decompose(&config)?;
    let summary = json!({
        "e_l": config.decompose.e_l,
        "cutoff": config.sweep.cutoff,
        "term_count": sum.len(),
        "reference_term_count": REFERENCE_TERM_COUNT,
        "reconstruction_residual": residual,
        "diagonal_only": sum.terms().iter().all(|t| t.label.is_diagonal()),
    });
    let mut out = sink(cli, &config)?;
    out.csv("decompose", "pauli", sum.terms())?;
    out.json("decompose", "pauli", Some(summary), sum.terms(), &[])?;
    Ok(out.report)
}

fn run_metrics(config: Config, cli: &Cli) -> CliResult<Report> {
    config.validate_metrics()?;
    let records = ops::metrics_records(&config)?;
    let zero = records.iter().min_by(|a, b| a.phi_ext.abs().total_cmp(&b.phi_ext.abs()));
    let summary = json!({
        "e_l": config.metrics.e_l,
        "cutoff": config.metrics.cutoff,
        "closest_to_zero_flux": zero,
        "reference_device_anharmonicity": REFERENCE_ANHARMONICITY,
        "device_comparison": "exploratory: device E_C and E_J are not published",
    });
    let mut out = sink(cli, &config)?;
    out.csv("metrics", "metrics", &records)?;
    out.json("metrics", "metrics", Some(summary), &records, &[])?;
    Ok(out.report)
}

fn run_valleys(config: Config, cli: &Cli) -> CliResult<Report> {
    config.validate_valleys()?;
    let (valleys, curve) = ops::valleys(&config)?;
    let margin = (valleys.len() >= 2).then(|| valleys[1].depth - valleys[0].depth);
    let summary = json!({
        "e_l": config.valleys.e_l,
        "phi_range": [config.valleys.phi_min, config.valleys.phi_max],
        "valley_count": valleys.len(),
        "depth_margin": margin,
        "curve": curve,
    });
    let mut out = sink(cli, &config)?;
    out.csv("valleys", "valleys", &valleys)?;
    out.csv("potential", "potential", &curve)?;
    out.json("valleys", "valleys", Some(summary), &valleys, &[])?;
    Ok(out.report)
}

fn run_anticross(config: Config, cli: &Cli) -> CliResult<Report> {
    config.validate_anticross()?;
    let records = ops::spectrum_records(&config)?;
    let [lo, hi] = config.anticross.level_pair;
    let found = ops::find_anticrossing(&records, (lo, hi))?;
    let mut out = sink(cli, &config)?;
    out.csv("anticross", "anticross", &[found])?;
    let summary = serde_json::to_value(found).map_err(|e| CliError::Runtime(e.to_string()))?;
    out.json("anticross", "sweep", Some(summary), &records, &[])?;
    Ok(out.report)
}
