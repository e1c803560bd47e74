//! Independent checks of the Fock-basis Hamiltonian: a position-space grid
//! diagonalization, a matrix-exponential displacement operator, and symmetry
//! properties under random parameter draws.

use std::f64::consts::{FRAC_PI_2, PI};

use plasmonium_core::hamiltonian::{
    build_fock_hamiltonian, count_valleys, displacement_matrix, exact_spectrum, lowest_energies,
    potential, qubit_metrics, CircuitParams, DEFAULT_FLUX_STEP,
};
use plasmonium_core::{max_abs_entry, CMatrix, Complex64};
use proptest::prelude::*;

/// Number of eigenvalues of a symmetric tridiagonal matrix below `x` (Sturm count).
fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        let coupling = if i == 0 { 0.0 } else { off * off / q };
        q = d - x - coupling;
        if q == 0.0 {
            q = 1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue (0-based) of a tridiagonal matrix by bisection.
fn tridiagonal_eigenvalue(diag: &[f64], off: f64, k: usize) -> f64 {
    let spread = 2.0 * off.abs();
    let mut lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - spread;
    let mut hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + spread;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lowest levels of `−4E_C ∂²/∂φ² + U(φ)` on `points` interior nodes of a Dirichlet box.
fn grid_levels(params: &CircuitParams, half_width: f64, points: usize, levels: usize) -> Vec<f64> {
    let h = 2.0 * half_width / (points + 1) as f64;
    let kinetic = 4.0 * params.e_c / (h * h);
    let diag: Vec<f64> = (1..=points)
        .map(|i| 2.0 * kinetic + potential(params, -half_width + h * i as f64))
        .collect();
    (0..levels).map(|k| tridiagonal_eigenvalue(&diag, -kinetic, k)).collect()
}

/// Second-order grid result extrapolated from two resolutions.
fn grid_levels_extrapolated(params: &CircuitParams, levels: usize) -> Vec<f64> {
    let half_width = 8.0 * PI;
    let coarse = grid_levels(params, half_width, 4095, levels);
    let fine = grid_levels(params, half_width, 8191, levels);
    coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
}

#[test]
fn fock_spectrum_matches_phase_grid() {
    let params = CircuitParams::sweep_default(2.0);
    let fock = lowest_energies(&params, 40, 3).unwrap();
    let grid = grid_levels_extrapolated(&params, 3);
    // ω a†a omits the zero-point energy ω/2 carried by the position-space form.
    let zero_point = params.omega() / 2.0;
    for (k, (f, g)) in fock.iter().zip(&grid).enumerate() {
        assert!((f + zero_point - g).abs() < 1e-6, "level {k}: fock {f} grid {g}");
    }
}

#[test]
fn harmonic_grid_sanity() {
    // The grid solver alone reproduces the oscillator ladder.
    let params = CircuitParams::new(0.7, 0.0, 2.0, 0.0).unwrap();
    let grid = grid_levels_extrapolated(&params, 3);
    for (k, g) in grid.iter().enumerate() {
        assert!((g - params.omega() * (k as f64 + 0.5)).abs() < 1e-6, "level {k}: {g}");
    }
}

/// `exp(M)` by scaling and squaring with a Taylor series (test-only reference).
fn expm(m: &CMatrix) -> CMatrix {
    let norm = max_abs_entry(m) * m.nrows() as f64;
    let squarings = norm.max(1.0).log2().ceil() as u32 + 4;
    let scaled = m / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let n = m.nrows();
    let mut term = CMatrix::identity(n, n);
    let mut sum = CMatrix::identity(n, n);
    for j in 1..30 {
        term = &term * &scaled / Complex64::new(j as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn closed_form_displacement_matches_generator_exponential() {
    let dim = 64;
    let alpha = Complex64::new(0.0, CircuitParams::sweep_default(2.0).amp_a());
    let mut generator = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        let s = (k as f64).sqrt();
        generator[(k, k - 1)] += alpha * s; // α a†
        generator[(k - 1, k)] -= alpha.conj() * s; // −α* a
    }
    let reference = expm(&generator);
    let closed = displacement_matrix(alpha, dim).unwrap();
    let vacuum = (-alpha.norm_sqr() / 2.0).exp();
    assert!((reference[(0, 0)].re - vacuum).abs() < 1e-12);
    // Truncating the generator only corrupts rows and columns near the edge.
    let block = 24;
    let diff = closed.view((0, 0), (block, block)) - reference.view((0, 0), (block, block));
    assert!(max_abs_entry(&diff.into_owned()) < 1e-10);
}

#[test]
fn cutoff_convergence_is_recorded() {
    let params = CircuitParams::sweep_default(2.0);
    let low = lowest_energies(&params, 7, 3).unwrap();
    let high = lowest_energies(&params, 40, 3).unwrap();
    let shift: Vec<f64> = high.iter().zip(&low).map(|(h, l)| h - l).collect();
    println!("cutoff 7 -> 40 shift at E_L = 2.0: {shift:?}");
    // Truncation is variational: a larger basis can only lower each level.
    assert!(shift.iter().all(|s| *s <= 1e-12));
    let higher = lowest_energies(&params, 60, 3).unwrap();
    assert!(higher.iter().zip(&high).all(|(a, b)| (a - b).abs() < 1e-9));
}

#[test]
fn anticrossing_lies_near_045() {
    let (mut best_e_l, mut best_gap) = (0.0, f64::INFINITY);
    for i in 0..=56 {
        let e_l = 0.2 + 0.05 * i as f64;
        let e = lowest_energies(&CircuitParams::sweep_default(e_l), 7, 3).unwrap();
        if e[2] - e[1] < best_gap {
            best_gap = e[2] - e[1];
            best_e_l = e_l;
        }
    }
    assert!((0.35..=0.55 + 1e-9).contains(&best_e_l), "minimum gap at {best_e_l}");
}

#[test]
fn valleys_at_reference_points() {
    let range = (-2.0 * PI, 4.0 * PI);
    let fluxonium = count_valleys(&CircuitParams::sweep_default(0.2), range, 4000).unwrap();
    assert!(fluxonium.len() >= 2);
    // In the junction phase φ + φ_ext the two lowest sit near 0 and 2π.
    let mut lowest: Vec<f64> = fluxonium[..2].iter().map(|v| v.junction_phase).collect();
    lowest.sort_by(f64::total_cmp);
    assert!(lowest[0].abs() < FRAC_PI_2, "{lowest:?}");
    assert!((lowest[1] - 2.0 * PI).abs() < FRAC_PI_2, "{lowest:?}");

    let plasmonium = count_valleys(&CircuitParams::sweep_default(2.0), range, 4000).unwrap();
    let deepest = plasmonium[0];
    for other in &plasmonium[1..] {
        assert!(other.depth - deepest.depth >= 4.5 / 2.0);
    }
}

#[test]
fn valley_count_non_increasing_in_e_l() {
    let counts: Vec<usize> = [0.2, 0.5, 1.0, 2.0, 3.0]
        .iter()
        .map(|&e_l| {
            count_valleys(&CircuitParams::sweep_default(e_l), (-2.0 * PI, 4.0 * PI), 4000)
                .unwrap()
                .len()
        })
        .collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
}

fn arb_params() -> impl Strategy<Value = CircuitParams> {
    (0.2f64..2.0, 0.0f64..10.0, 0.2f64..5.0, -PI..PI)
        .prop_map(|(e_c, e_j, e_l, phi_ext)| CircuitParams::new(e_c, e_j, e_l, phi_ext).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hamiltonian_is_hermitian(params in arb_params(), cutoff in 2usize..30) {
        let h = build_fock_hamiltonian(&params, cutoff).unwrap();
        prop_assert!(h.hermiticity_error() < 1e-12);
    }

    #[test]
    fn spectrum_even_in_flux(params in arb_params()) {
        let h_plus = build_fock_hamiltonian(&params, 20).unwrap();
        let h_minus = build_fock_hamiltonian(&params.with_phi_ext(-params.phi_ext), 20).unwrap();
        let plus = exact_spectrum(&h_plus, 21).unwrap().energies;
        let minus = exact_spectrum(&h_minus, 21).unwrap().energies;
        for (a, b) in plus.iter().zip(&minus) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn zero_flux_is_sweet_spot(e_c in 0.3f64..1.5, e_j in 1.0f64..10.0, e_l in 0.5f64..4.0) {
        let params = CircuitParams::new(e_c, e_j, e_l, 0.0).unwrap();
        let m = qubit_metrics(&params, 40, DEFAULT_FLUX_STEP).unwrap();
        prop_assert!(m.flux_sensitivity <= 1e-6);
    }
}
