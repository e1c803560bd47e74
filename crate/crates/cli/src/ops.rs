//! The computations behind each subcommand, free of any file handling.

use plasmonium_core::hamiltonian::{
    build_fock_hamiltonian, count_valleys, exact_spectrum, potential, qubit_metrics, truncation_shift,
    ENCODING_CUTOFF, METRICS_CUTOFF,
};
use plasmonium_core::mitigation::{mitigate_energy, MitigationInput};
use plasmonium_core::pauli::{encode_pauli, reconstruction_residual, PauliSum};
use plasmonium_core::ssvqe::{run_ssvqe, SsvqeResult};
use rayon::prelude::*;

use crate::config::{point_seed, Config};
use crate::error::{CliError, CliResult};
use crate::records::{AntiCrossing, MetricsRecord, PointError, PotentialSample, SweepRecord, ValleyRecord};

/// Runs `f` on a pool of `workers` threads (0 = one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn three(levels: &[f64]) -> [f64; 3] {
    [levels[0], levels[1], levels[2]]
}

/// Exact lowest-three spectrum at every sweep point.
pub fn spectrum_records(config: &Config) -> CliResult<Vec<SweepRecord>> {
    let grid = config.sweep.grid();
    let cutoff = config.sweep.cutoff;
    let points: Vec<CliResult<SweepRecord>> = with_workers(config.workers, || {
        grid.par_iter()
            .enumerate()
            .map(|(i, &e_l)| {
                let params = config.circuit.params(e_l)?;
                let h = build_fock_hamiltonian(&params, cutoff)?;
                let mut record = SweepRecord::exact(e_l, three(&exact_spectrum(&h, 3)?.energies), point_seed(config.seed, i));
                if cutoff == ENCODING_CUTOFF {
                    record.term_count = Some(encode_pauli(&h, config.sweep.drop_tol)?.len());
                }
                if cutoff < METRICS_CUTOFF {
                    record.truncation_shift = Some(three(&truncation_shift(&params, cutoff, METRICS_CUTOFF, 3)?));
                }
                Ok(record)
            })
            .collect()
    })?;
    points.into_iter().collect()
}

/// One optimized sweep point together with the optimizer's full result.
pub struct SsvqePoint {
    pub record: SweepRecord,
    pub result: SsvqeResult,
}

fn ssvqe_point(config: &Config, index: usize, e_l: f64) -> CliResult<SsvqePoint> {
    let q = &config.ssvqe;
    let params = config.circuit.params(e_l)?;
    let h = build_fock_hamiltonian(&params, config.sweep.cutoff)?;
    let exact = three(&exact_spectrum(&h, 3)?.energies);
    let sum = encode_pauli(&h, config.sweep.drop_tol)?;
    let spsa = q.spsa(config.seed, index);
    let result = run_ssvqe(&sum, &spsa, q.noise.as_ref(), q.shots, q.restarts)?;

    let mitigated = match (q.mitigate, result.purities) {
        (true, Some(purities)) => {
            let mut out = [0.0; 3];
            for k in 0..3 {
                out[k] = mitigate_energy(&MitigationInput {
                    e_measured: result.energies[k],
                    purity: purities[k],
                    trace_h: sum.trace(),
                    dim: sum.dim(),
                })?;
            }
            Some(out)
        }
        _ => None,
    };
    let record = SweepRecord {
        e_l,
        exact_energies: exact,
        vqe_energies: Some(result.energies),
        mitigated_energies: mitigated,
        purities: result.purities,
        truncation_shift: None,
        term_count: Some(sum.len()),
        iterations_used: Some(result.iterations_used),
        cost: Some(result.cost),
        shots: q.shots,
        seed: spsa.seed,
    };
    record.validate()?;
    Ok(SsvqePoint { record, result })
}

/// SSVQE at every sweep point. Failed points are reported, not fatal.
pub fn ssvqe_sweep(config: &Config) -> CliResult<(Vec<SsvqePoint>, Vec<PointError>)> {
    let grid = config.sweep.grid();
    let results: Vec<CliResult<SsvqePoint>> = with_workers(config.workers, || {
        grid.par_iter().enumerate().map(|(i, &e_l)| ssvqe_point(config, i, e_l)).collect()
    })?;
    let mut points = Vec::new();
    let mut errors = Vec::new();
    for (index, (r, &e_l)) in results.into_iter().zip(&grid).enumerate() {
        match r {
            Ok(p) => points.push(p),
            Err(e) => errors.push(PointError { index, e_l, message: e.to_string() }),
        }
    }
    Ok((points, errors))
}

/// Smallest `E_hi − E_lo` gap over sorted records, refined by a parabola
/// through the grid minimum and its two neighbours.
pub fn find_anticrossing(records: &[SweepRecord], level_pair: (usize, usize)) -> CliResult<AntiCrossing> {
    let (lo, hi) = level_pair;
    if records.len() < 3 {
        return Err(CliError::Runtime(format!("anti-crossing search needs >= 3 records, got {}", records.len())));
    }
    if lo >= hi || hi > 2 {
        return Err(CliError::Runtime(format!("level pair ({lo}, {hi}) must satisfy lo < hi <= 2")));
    }
    if records.windows(2).any(|w| !(w[0].e_l < w[1].e_l)) {
        return Err(CliError::Runtime("records must be sorted by strictly increasing E_L".into()));
    }
    let gaps: Vec<f64> = records.iter().map(|r| r.exact_energies[hi] - r.exact_energies[lo]).collect();
    let i = (0..gaps.len()).min_by(|&a, &b| gaps[a].total_cmp(&gaps[b])).expect("non-empty");
    let grid = (records[i].e_l, gaps[i]);
    let interior = i > 0 && i + 1 < gaps.len();
    let (e_l_star, min_gap) = if interior {
        parabola_vertex(
            [records[i - 1].e_l, records[i].e_l, records[i + 1].e_l],
            [gaps[i - 1], gaps[i], gaps[i + 1]],
        )
        .unwrap_or(grid)
    } else {
        grid
    };
    Ok(AntiCrossing {
        level_lo: lo,
        level_hi: hi,
        e_l_star,
        min_gap,
        interior,
        grid_e_l: grid.0,
        grid_gap: grid.1,
    })
}

/// Vertex of the parabola through three points, if it opens upward.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    // Divided differences: y = y0 + d1 (t − x0) + d2 (t − x0)(t − x1).
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let d2 = (d12 - d01) / (x[2] - x[0]);
    if !(d2 > 0.0) {
        return None;
    }
    let vertex = (0.5 * (x[0] + x[1]) - d01 / (2.0 * d2)).clamp(x[0], x[2]);
    let value = y[0] + d01 * (vertex - x[0]) + d2 * (vertex - x[0]) * (vertex - x[1]);
    Some((vertex, value))
}

/// Qubit metrics across the configured flux grid.
pub fn metrics_records(config: &Config) -> CliResult<Vec<MetricsRecord>> {
    let m = config.metrics;
    let base = config.circuit.params(m.e_l)?;
    let grid = m.flux_grid();
    let rows: Vec<CliResult<MetricsRecord>> = with_workers(config.workers, || {
        grid.par_iter()
            .map(|&phi| {
                let metrics = qubit_metrics(&base.with_phi_ext(phi), m.cutoff, m.flux_step)?;
                Ok(MetricsRecord::new(phi, &metrics))
            })
            .collect()
    })?;
    rows.into_iter().collect()
}

/// Pauli decomposition at the decompose design point, with its reconstruction residual.
pub fn decompose(config: &Config) -> CliResult<(PauliSum, f64)> {
    let params = config.circuit.params(config.decompose.e_l)?;
    let h = build_fock_hamiltonian(&params, config.sweep.cutoff)?;
    let sum = encode_pauli(&h, config.sweep.drop_tol)?;
    let residual = reconstruction_residual(&sum, &h.matrix)?;
    Ok((sum, residual))
}

/// Potential minima and a sampled potential curve.
pub fn valleys(config: &Config) -> CliResult<(Vec<ValleyRecord>, Vec<PotentialSample>)> {
    let v = config.valleys;
    let params = config.circuit.params(v.e_l)?;
    let found = count_valleys(&params, (v.phi_min, v.phi_max), v.grid_points)?;
    let h = (v.phi_max - v.phi_min) / (v.curve_points - 1) as f64;
    let curve = (0..v.curve_points)
        .map(|i| {
            let phi = v.phi_min + h * i as f64;
            PotentialSample { phi, potential: potential(&params, phi) }
        })
        .collect();
    Ok((found.iter().map(ValleyRecord::from).collect(), curve))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(points: &[(f64, f64)]) -> Vec<SweepRecord> {
        points.iter().map(|&(e_l, gap)| SweepRecord::exact(e_l, [0.0, 1.0, 1.0 + gap], 0)).collect()
    }

    #[test]
    fn symmetric_gap_returns_grid_point() {
        let r = records(&[(0.3, 0.5), (0.4, 0.2), (0.5, 0.5)]);
        let ac = find_anticrossing(&r, (1, 2)).unwrap();
        assert!(ac.interior);
        assert!((ac.e_l_star - 0.4).abs() < 1e-9);
        assert!((ac.min_gap - 0.2).abs() < 1e-12);
    }

    #[test]
    fn parabola_is_recovered_exactly() {
        let g = |x: f64| 2.0 * (x - 0.47).powi(2) + 0.1;
        let r = records(&[(0.3, g(0.3)), (0.4, g(0.4)), (0.5, g(0.5)), (0.6, g(0.6))]);
        let ac = find_anticrossing(&r, (1, 2)).unwrap();
        assert!((ac.e_l_star - 0.47).abs() < 1e-12);
        assert!((ac.min_gap - 0.1).abs() < 1e-12);
        assert_eq!(ac.grid_e_l, 0.5);
    }

    #[test]
    fn monotone_gap_is_flagged_at_boundary() {
        let r = records(&[(0.3, 0.9), (0.4, 0.7), (0.5, 0.5), (0.6, 0.3)]);
        let ac = find_anticrossing(&r, (1, 2)).unwrap();
        assert!(!ac.interior);
        assert_eq!(ac.e_l_star, 0.6);
    }

    #[test]
    fn rejects_short_or_unsorted_input() {
        assert!(find_anticrossing(&records(&[(0.3, 0.9), (0.4, 0.7)]), (1, 2)).is_err());
        assert!(find_anticrossing(&records(&[(0.4, 0.9), (0.3, 0.7), (0.5, 0.1)]), (1, 2)).is_err());
        assert!(find_anticrossing(&records(&[(0.3, 0.9), (0.4, 0.7), (0.5, 0.1)]), (2, 1)).is_err());
    }
}
