//! Subspace-search VQE over the three lowest Gray-coded Fock states.
//!
//! One shared 26-angle circuit is applied to `|000⟩`, `|001⟩` and `|011⟩` (the
//! Gray images of Fock levels 0, 1, 2). Minimizing `5 E0 + 4 E1 + 2 E2` with
//! SPSA drives the three outputs onto the three lowest eigenstates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::simulator::{
    expectation, purity, run_circuit, run_circuit_noisy, sample_expectation, GateOp, NoiseModel,
    StateVector,
};

/// Number of variational angles in the ansatz.
pub const PARAM_COUNT: usize = 26;

/// Qubits in the register.
pub const QUBITS: usize = 3;

/// Cost weights for E0, E1, E2.
pub const WEIGHTS: [f64; 3] = [5.0, 4.0, 2.0];

/// Computational basis inputs: Gray codes of Fock |0⟩, |1⟩, |2⟩.
pub const INPUT_STATES: [usize; 3] = [0b000, 0b001, 0b011];

/// Number of entangling blocks.
pub const BLOCKS: usize = 12;

/// Gates in the compiled ansatz: two front rotations, five gates per block.
pub const GATE_COUNT: usize = 2 + 5 * BLOCKS;

/// Entangling pair of block `b`; blocks alternate between (0, 1) and (1, 2).
pub fn block_pair(b: usize) -> (usize, usize) {
    if b % 2 == 0 {
        (0, 1)
    } else {
        (1, 2)
    }
}

/// Deterministic 64-bit seed mixing (SplitMix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Ansatz angles in radians; always exactly [`PARAM_COUNT`] long.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AnsatzParams(Vec<f64>);

impl AnsatzParams {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.len() != PARAM_COUNT {
            return Err(Error::InvalidArgument(format!(
                "ansatz takes {PARAM_COUNT} angles, got {}",
                angles.len()
            )));
        }
        Ok(Self(angles))
    }

    pub fn zeros() -> Self {
        Self(vec![0.0; PARAM_COUNT])
    }

    /// Angles uniform in `[-spread, spread]`.
    pub fn random(rng: &mut impl Rng, spread: f64) -> Self {
        Self((0..PARAM_COUNT).map(|_| rng.random_range(-spread..=spread)).collect())
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for AnsatzParams {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AnsatzParams> for Vec<f64> {
    fn from(p: AnsatzParams) -> Self {
        p.0
    }
}

/// `RZ(π/2) · √iSWAP · RZ(−π/2)` on `(p, q)`, with the frame rotation on `p`.
///
/// The frame change turns the √iSWAP mixing block `[[c, is], [is, c]]` into the
/// real rotation `[[c, −s], [s, c]]`, so an ansatz of RY gates and framed
/// entanglers stays real-orthogonal.
pub fn framed_sqrt_iswap(p: usize, q: usize) -> [GateOp; 3] {
    [
        GateOp::rz(p, std::f64::consts::FRAC_PI_2),
        GateOp::sqrt_iswap(p, q),
        GateOp::rz(p, -std::f64::consts::FRAC_PI_2),
    ]
}

/// The 62-gate, 26-angle ansatz.
///
/// Angles 0 and 1 drive `RY` on qubits 1 and 2, the bits in which the three
/// inputs differ. Block `b` on pair `(p, q)` = [`block_pair`]`(b)` is a
/// [`framed_sqrt_iswap`] followed by `RY(p)` and `RY(q)` with angles
/// `2 + 2b` and `3 + 2b`.
pub fn build_ansatz(params: &AnsatzParams) -> Vec<GateOp> {
    let a = params.angles();
    let mut gates = Vec::with_capacity(GATE_COUNT);
    gates.push(GateOp::ry(1, a[0]));
    gates.push(GateOp::ry(2, a[1]));
    for b in 0..BLOCKS {
        let (p, q) = block_pair(b);
        gates.extend(framed_sqrt_iswap(p, q));
        gates.push(GateOp::ry(p, a[2 + 2 * b]));
        gates.push(GateOp::ry(q, a[3 + 2 * b]));
    }
    gates
}

/// Builds the ansatz from a raw slice, checking its length.
pub fn build_ansatz_from_slice(angles: &[f64]) -> Result<Vec<GateOp>> {
    Ok(build_ansatz(&AnsatzParams::new(angles.to_vec())?))
}

/// Output states of the noiseless ansatz for the three inputs.
pub fn output_states(params: &AnsatzParams) -> Result<[StateVector; 3]> {
    let gates = build_ansatz(params);
    let run = |idx: usize| run_circuit(&StateVector::basis(QUBITS, idx)?, &gates);
    Ok([run(INPUT_STATES[0])?, run(INPUT_STATES[1])?, run(INPUT_STATES[2])?])
}

/// One evaluation of the weighted subspace cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEvaluation {
    pub cost: f64,
    pub energies: [f64; 3],
    pub purities: Option<[f64; 3]>,
}

pub fn weighted_cost(energies: &[f64; 3]) -> f64 {
    WEIGHTS.iter().zip(energies).map(|(w, e)| w * e).sum()
}

/// `5 E0 + 4 E1 + 2 E2` for the shared circuit at `params`.
///
/// With `noise` the three states are propagated as density matrices and their
/// purities are returned. With `shots` each energy is a finite-shot estimate
/// drawn from a stream derived from `seed`.
pub fn cost_function(
    params: &AnsatzParams,
    hamiltonian: &PauliSum,
    noise: Option<&NoiseModel>,
    shots: Option<u64>,
    seed: u64,
) -> Result<CostEvaluation> {
    if hamiltonian.qubit_count() != QUBITS {
        return Err(Error::InvalidArgument(format!(
            "SSVQE needs a {QUBITS}-qubit Hamiltonian, got {}",
            hamiltonian.qubit_count()
        )));
    }
    let gates = build_ansatz(params);
    let mut energies = [0.0; 3];
    let mut purities = [0.0; 3];
    for (slot, &input) in INPUT_STATES.iter().enumerate() {
        let start = StateVector::basis(QUBITS, input)?;
        let stream = derive_seed(seed, slot as u64);
        energies[slot] = match noise {
            None => {
                let out = run_circuit(&start, &gates)?;
                match shots {
                    Some(s) => sample_expectation(&out, hamiltonian, s, stream)?,
                    None => expectation(&out, hamiltonian)?,
                }
            }
            Some(model) => {
                let rho = run_circuit_noisy(&start.to_density(), &gates, model)?;
                purities[slot] = purity(&rho);
                match shots {
                    Some(s) => sample_expectation(&rho, hamiltonian, s, stream)?,
                    None => expectation(&rho, hamiltonian)?,
                }
            }
        };
    }
    Ok(CostEvaluation {
        cost: weighted_cost(&energies),
        energies,
        purities: noise.map(|_| purities),
    })
}

/// SPSA gain sequences `a_k = a / (k + 1 + A)^α`, `c_k = c / (k + 1)^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsaConfig {
    pub a: f64,
    pub c: f64,
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self::with_iterations(2000, 0)
    }
}

impl SpsaConfig {
    /// Standard gains with the stability constant at a tenth of the budget.
    pub fn with_iterations(iterations: usize, seed: u64) -> Self {
        Self {
            a: 0.2,
            c: 0.1,
            big_a: iterations as f64 / 10.0,
            alpha: 0.602,
            gamma: 0.101,
            iterations,
            seed,
        }
    }

    /// Gains used by [`run_ssvqe`], whose objective is normalized by [`cost_scale`].
    ///
    /// Only the step gain differs from [`Self::with_iterations`]. On the
    /// normalized cost a unit step gain keeps the first updates at a few tenths
    /// of a radian for every Hamiltonian in the design sweep.
    pub fn for_ssvqe(iterations: usize, seed: u64) -> Self {
        Self { a: SSVQE_STEP_GAIN, ..Self::with_iterations(iterations, seed) }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.a > 0.0
            && self.c > 0.0
            && self.big_a >= 0.0
            && self.gamma > 0.0
            && self.gamma < self.alpha
            && self.alpha <= 1.0
            && self.iterations >= 1;
        if !ok {
            return Err(Error::InvalidArgument(format!("invalid SPSA configuration {self:?}")));
        }
        Ok(())
    }

    pub fn step_gain(&self, k: usize) -> f64 {
        self.a / (k as f64 + 1.0 + self.big_a).powf(self.alpha)
    }

    pub fn perturbation_gain(&self, k: usize) -> f64 {
        self.c / (k as f64 + 1.0).powf(self.gamma)
    }
}

/// Default SPSA step gain for the normalized SSVQE objective.
pub const SSVQE_STEP_GAIN: f64 = 1.0;

/// `Σ |c_P|` over the non-identity terms, a bound on the spread of `⟨H⟩`.
///
/// SPSA steps scale with the objective, so [`run_ssvqe`] divides the weighted
/// cost by this before optimizing. Gains then carry over between Hamiltonians
/// of different magnitude.
pub fn cost_scale(hamiltonian: &PauliSum) -> f64 {
    hamiltonian
        .terms()
        .iter()
        .filter(|t| !t.label.is_identity())
        .map(|t| t.coeff.abs())
        .sum()
}

/// What SPSA saw during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpsaOutcome {
    /// Iterate with the lowest midpoint cost estimate.
    pub best_params: Vec<f64>,
    /// Midpoint estimate `(f(θ+) + f(θ−)) / 2` at `best_params`.
    pub best_estimate: f64,
    /// Iterate after the last update.
    pub final_params: Vec<f64>,
    /// Midpoint cost estimate per iteration.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

/// Minimizes `objective` with simultaneous-perturbation gradient estimates.
///
/// Each iteration makes exactly two calls, at `θ ± c_k Δ` with Rademacher `Δ`,
/// and steps `θ ← θ − a_k ĝ` with `ĝ_i = (f+ − f−) / (2 c_k Δ_i)`. The mean of
/// the two calls is the cost estimate for `θ_k`.
pub fn spsa_minimize<F>(mut objective: F, initial: &[f64], config: &SpsaConfig) -> Result<SpsaOutcome>
where
    F: FnMut(&[f64]) -> f64,
{
    config.validate()?;
    if initial.is_empty() {
        return Err(Error::InvalidArgument("SPSA needs at least one parameter".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dim = initial.len();
    let mut theta = initial.to_vec();
    let mut delta = vec![0.0; dim];
    let mut probe = vec![0.0; dim];
    let mut history = Vec::with_capacity(config.iterations);
    let mut best_params = theta.clone();
    let mut best_estimate = f64::INFINITY;
    let mut evaluations = 0;

    for k in 0..config.iterations {
        let a_k = config.step_gain(k);
        let c_k = config.perturbation_gain(k);
        for d in delta.iter_mut() {
            *d = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }

        let mut eval = |sign: f64, probe: &mut Vec<f64>| -> Result<f64> {
            for ((p, t), d) in probe.iter_mut().zip(&theta).zip(&delta) {
                *p = t + sign * c_k * d;
            }
            let value = objective(probe);
            evaluations += 1;
            if !value.is_finite() {
                return Err(Error::NonFiniteObjective { iteration: k, value });
            }
            Ok(value)
        };
        let plus = eval(1.0, &mut probe)?;
        let minus = eval(-1.0, &mut probe)?;

        let estimate = 0.5 * (plus + minus);
        history.push(estimate);
        if estimate < best_estimate {
            best_estimate = estimate;
            best_params.copy_from_slice(&theta);
        }

        let scale = (plus - minus) / (2.0 * c_k);
        for (t, d) in theta.iter_mut().zip(&delta) {
            *t -= a_k * scale / d;
        }
    }

    Ok(SpsaOutcome {
        best_params,
        best_estimate,
        final_params: theta,
        history,
        evaluations,
    })
}

/// Outcome of a full SSVQE run (best of all restarts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsvqeResult {
    pub energies: [f64; 3],
    pub cost: f64,
    pub optimal_params: AnsatzParams,
    pub cost_history: Vec<f64>,
    pub energy_history: Vec<[f64; 3]>,
    pub purities: Option<[f64; 3]>,
    pub iterations_used: usize,
    /// Final cost of every restart, in restart order.
    pub restart_costs: Vec<f64>,
    pub best_restart: usize,
    pub spsa: SpsaConfig,
    pub restarts: usize,
    pub noise: Option<NoiseModel>,
    pub shots: Option<u64>,
}

/// Spread of the uniform initial angles.
pub const INIT_SPREAD: f64 = 0.1;

/// Runs SSVQE from `restarts` seeded starting points and keeps the lowest final cost.
///
/// SPSA minimizes the weighted cost divided by [`cost_scale`]; reported costs
/// and histories are in GHz. Restart `r` draws its initial angles and
/// perturbation stream from `derive_seed(spsa.seed, r)`. Within a restart, both the midpoint-best and
/// the final SPSA iterate are re-evaluated and the lower one is kept.
pub fn run_ssvqe(
    hamiltonian: &PauliSum,
    spsa: &SpsaConfig,
    noise: Option<&NoiseModel>,
    shots: Option<u64>,
    restarts: usize,
) -> Result<SsvqeResult> {
    spsa.validate()?;
    if let Some(n) = noise {
        n.validate()?;
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    if hamiltonian.qubit_count() != QUBITS {
        return Err(Error::InvalidArgument(format!(
            "SSVQE needs a {QUBITS}-qubit Hamiltonian, got {}",
            hamiltonian.qubit_count()
        )));
    }

    if hamiltonian.terms().iter().all(|t| t.label.is_identity()) {
        // Every state has the same energy; nothing to optimize.
        let params = AnsatzParams::zeros();
        let eval = cost_function(&params, hamiltonian, noise, None, spsa.seed)?;
        return Ok(SsvqeResult {
            energies: eval.energies,
            cost: eval.cost,
            optimal_params: params,
            cost_history: Vec::new(),
            energy_history: Vec::new(),
            purities: eval.purities,
            iterations_used: 0,
            restart_costs: vec![eval.cost],
            best_restart: 0,
            spsa: *spsa,
            restarts,
            noise: noise.copied(),
            shots,
        });
    }

    let scale = cost_scale(hamiltonian);
    let mut best: Option<SsvqeResult> = None;
    let mut restart_costs = Vec::with_capacity(restarts);
    for r in 0..restarts {
        let run_seed = derive_seed(spsa.seed, r as u64);
        let mut init_rng = ChaCha8Rng::seed_from_u64(run_seed);
        let initial = AnsatzParams::random(&mut init_rng, INIT_SPREAD);
        let config = SpsaConfig { seed: derive_seed(run_seed, 0x5350_5341), ..*spsa };

        let mut energy_trace: Vec<[f64; 3]> = Vec::with_capacity(2 * spsa.iterations);
        let mut failure: Option<Error> = None;
        let mut call = 0u64;
        let outcome = spsa_minimize(
            |angles| {
                call += 1;
                let params = AnsatzParams(angles.to_vec());
                match cost_function(&params, hamiltonian, noise, shots, derive_seed(run_seed, call)) {
                    Ok(eval) => {
                        energy_trace.push(eval.energies);
                        eval.cost / scale
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            initial.angles(),
            &config,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let outcome = outcome?;

        let final_seed = derive_seed(run_seed, u64::MAX);
        let candidates = [outcome.best_params.clone(), outcome.final_params.clone()];
        let mut chosen: Option<(AnsatzParams, CostEvaluation)> = None;
        for angles in candidates {
            let params = AnsatzParams(angles);
            let eval = cost_function(&params, hamiltonian, noise, shots, final_seed)?;
            if chosen.as_ref().is_none_or(|(_, c)| eval.cost < c.cost) {
                chosen = Some((params, eval));
            }
        }
        let (params, eval) = chosen.expect("two candidates evaluated");
        restart_costs.push(eval.cost);

        let energy_history = energy_trace
            .chunks_exact(2)
            .map(|pair| std::array::from_fn(|i| 0.5 * (pair[0][i] + pair[1][i])))
            .collect();
        let candidate = SsvqeResult {
            energies: eval.energies,
            cost: eval.cost,
            optimal_params: params,
            cost_history: outcome.history.iter().map(|c| c * scale).collect(),
            energy_history,
            purities: eval.purities,
            iterations_used: spsa.iterations,
            restart_costs: Vec::new(),
            best_restart: r,
            spsa: *spsa,
            restarts,
            noise: noise.copied(),
            shots,
        };
        if best.as_ref().is_none_or(|b| candidate.cost < b.cost) {
            best = Some(candidate);
        }
    }
    let mut best = best.expect("at least one restart");
    best.restart_costs = restart_costs;
    Ok(best)
}
