use plasmonium_core::hamiltonian::{build_fock_hamiltonian, exact_spectrum, hermitian_eigen, CircuitParams};
use plasmonium_core::pauli::{encode_matrix, encode_pauli, reconstruction_residual, DEFAULT_DROP_TOL};
use plasmonium_core::{CMatrix, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hermitian(rng: &mut ChaCha8Rng, real: bool) -> CMatrix {
    let mut m = CMatrix::zeros(8, 8);
    for i in 0..8 {
        m[(i, i)] = Complex64::new(rng.random_range(-5.0..5.0), 0.0);
        for j in 0..i {
            let im = if real { 0.0 } else { rng.random_range(-5.0..5.0) };
            let z = Complex64::new(rng.random_range(-5.0..5.0), im);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

#[test]
fn random_hermitian_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let gray = |k: usize| k ^ (k >> 1);
    for _ in 0..100 {
        let m = random_hermitian(&mut rng, false);
        let dense = encode_matrix(&m, 0.0).unwrap().to_dense();
        // Fock level k lives on qubit basis state gray(k).
        for i in 0..8 {
            for j in 0..8 {
                let d = (dense[(gray(i), gray(j))] - m[(i, j)]).norm();
                assert!(d <= 1e-10, "entry ({i}, {j}) off by {d}");
            }
        }
    }
}

#[test]
fn real_symmetric_inputs_keep_even_y_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let m = random_hermitian(&mut rng, true);
        let sum = encode_matrix(&m, 0.0).unwrap();
        for t in sum.terms() {
            assert!(t.label.y_count() % 2 == 0 || t.coeff.abs() < 1e-12, "{} {}", t.label, t.coeff);
        }
    }
}

#[test]
fn encoding_preserves_spectrum() {
    for e_l in [0.2, 0.45, 1.0, 3.0] {
        let h = build_fock_hamiltonian(&CircuitParams::sweep_default(e_l), 7).unwrap();
        let exact = exact_spectrum(&h, 8).unwrap().energies;
        let sum = encode_pauli(&h, DEFAULT_DROP_TOL).unwrap();
        let (encoded, _) = hermitian_eigen(&sum.to_dense());
        for (a, b) in exact.iter().zip(&encoded) {
            assert!((a - b).abs() < 1e-8, "E_L {e_l}: {a} vs {b}");
        }
        assert!(reconstruction_residual(&sum, &h.matrix).unwrap() <= 1e-10);
    }
}

#[test]
fn no_junction_gives_diagonal_strings() {
    let params = CircuitParams::new(0.7, 0.0, 1.3, std::f64::consts::FRAC_PI_2).unwrap();
    let sum = encode_pauli(&build_fock_hamiltonian(&params, 7).unwrap(), DEFAULT_DROP_TOL).unwrap();
    assert!(sum.terms().iter().all(|t| t.label.is_diagonal()));
}

#[test]
fn term_count_is_logged_across_sweep() {
    for i in 0..29 {
        let e_l = 0.2 + 0.1 * i as f64;
        let h = build_fock_hamiltonian(&CircuitParams::sweep_default(e_l), 7).unwrap();
        let n = encode_pauli(&h, DEFAULT_DROP_TOL).unwrap().len();
        println!("E_L {e_l:.1}: {n} Pauli terms (reference figure: 20)");
        assert!(n <= 64);
    }
}
