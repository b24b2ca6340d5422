use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use bellops::*;
use matqm::{pauli, HermMat, Pauli};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// λ_max of the CHSH operator from B² = 4I − [A₀,A₁]⊗[B₀,B₁], which for
/// Z–X plane observables gives 4(1 ± sin2a·sin2b).
fn chsh_lmax_oracle(a: f64, b: f64) -> f64 {
    2.0 * (1.0 + (2.0 * a).sin() * (2.0 * b).sin()).sqrt()
}

fn close(a: &HermMat, b: &HermMat, tol: f64) -> bool {
    a.sub(b).unwrap().frobenius() <= tol
}

#[test]
fn observables() {
    assert!(close(&observable(0.0, 0), &pauli(Pauli::Z), 1e-15));
    assert!(close(&observable(FRAC_PI_2, 1), &pauli(Pauli::X).scale(-1.0), 1e-15));
    let expect = pauli(Pauli::Z).add(&pauli(Pauli::X)).unwrap().scale(1.0 / SQRT_2);
    assert!(close(&observable(FRAC_PI_4, 0), &expect, 1e-15));
}

#[test]
fn chsh_operator_examples() {
    let f = BellFunctional::chsh();
    let zz = matqm::kron(&pauli(Pauli::Z), &pauli(Pauli::Z)).unwrap();
    let b00 = bell_operator(&f, AnglePair::new(0.0, 0.0).unwrap());
    assert!(close(&b00, &zz.scale(2.0), 1e-15));
    assert_eq!(max_quantum_value(&f, AnglePair::new(0.0, 0.0).unwrap()).unwrap(), 2.0);
    let top = max_quantum_value(&f, AnglePair::new(FRAC_PI_4, FRAC_PI_4).unwrap()).unwrap();
    assert!((top - chsh_lmax_oracle(FRAC_PI_4, FRAC_PI_4)).abs() < 1e-12);
    assert!((top - 2.0 * SQRT_2).abs() < 1e-9);

    let zero = BellFunctional::new("zero", [[0.0; 2]; 2], [0.0; 2], [0.0; 2], None).unwrap();
    assert_eq!(bell_operator(&zero, AnglePair::new(0.3, 1.1).unwrap()).frobenius(), 0.0);
}

#[test]
fn chsh_sweep_reaches_tsirelson() {
    let f = BellFunctional::chsh();
    let n = 400;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        for j in 0..=n {
            let ab = AnglePair::new(i as f64 * FRAC_PI_2 / n as f64, j as f64 * FRAC_PI_2 / n as f64).unwrap();
            best = best.max(max_quantum_value(&f, ab).unwrap());
        }
    }
    assert!((best - 2.0 * SQRT_2).abs() < 1e-6);
}

#[test]
fn chsh_bounds_and_numeric_bounds_agree() {
    let f = BellFunctional::chsh();
    let b = f.bounds();
    assert_eq!((b.eta_q_min, b.eta_l_min, b.eta_l_max, b.eta_q_max), (-2.0 * SQRT_2, -2.0, 2.0, 2.0 * SQRT_2));
    assert_eq!(f.gamma_star(), 1.0);
    let g = BellFunctional::new("chsh-numeric", f.gamma(), [0.0; 2], [0.0; 2], None).unwrap();
    let nb = g.bounds();
    assert!((nb.eta_q_max - 2.0 * SQRT_2).abs() < 1e-9);
    assert!((nb.eta_q_min + 2.0 * SQRT_2).abs() < 1e-9);
    assert_eq!((nb.eta_l_min, nb.eta_l_max), (-2.0, 2.0));
}

#[test]
fn lipschitz_examples() {
    assert_eq!(lipschitz_constants(&BellFunctional::chsh()), (4.0, 4.0));
    let only_a = BellFunctional::new("a", [[0.0; 2]; 2], [3.0, 0.0], [0.0; 2], None).unwrap();
    assert_eq!(lipschitz_constants(&only_a), (3.0, 0.0));
    let alpha = 0.7;
    let tilted = BellFunctional::new("tilted", [[1.0, 1.0], [1.0, -1.0]], [alpha, 0.0], [0.0; 2], None).unwrap();
    assert_eq!(lipschitz_constants(&tilted), (4.0 + alpha, 4.0));
    assert!(tilted.has_marginals());
    assert!(!tilted.is_chsh());
    // Tilted CHSH: classical max 2 + α, quantum max √(8 + 2α²).
    let b = tilted.bounds();
    assert!((b.eta_l_max - (2.0 + alpha)).abs() < 1e-12);
    assert!((b.eta_q_max - (8.0 + 2.0 * alpha * alpha).sqrt()).abs() < 1e-8);
}

#[test]
fn score_value_conversions() {
    assert_eq!(score_to_value(0.75).unwrap(), 2.0);
    let p = (2.0 + SQRT_2) / 4.0;
    assert!((score_to_value(p).unwrap() - 2.0 * SQRT_2).abs() < 1e-15);
    assert_eq!(value_to_score(0.0).unwrap(), 0.5);
    assert!(score_to_value(1.1).is_err());
    assert!(value_to_score(-4.5).is_err());
}

#[test]
fn json_round_trip_and_load() {
    let doc = r#"{"gamma": [[1, 1], [1, -1]], "cA": [0.5, 0], "cB": [0, 0]}"#;
    let f = BellFunctional::from_json_str(doc).unwrap();
    assert_eq!(f.c_a(), [0.5, 0.0]);
    let again = BellFunctional::from_json_str(&f.to_json()).unwrap();
    assert_eq!(f, again);
    assert!(BellFunctional::load("chsh").unwrap().is_chsh());
    assert!(matches!(BellFunctional::load("/nonexistent/functional.json"), Err(BellError::Io(_))));
    assert!(BellFunctional::from_json_str("{\"gamma\": 3}").is_err());
}

#[test]
fn lipschitz_bound_on_random_states() {
    let f = BellFunctional::chsh();
    let (c0, c1) = lipschitz_constants(&f);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let mut v = [matqm::Complex64::new(0.0, 0.0); 4];
        for z in v.iter_mut() {
            *z = matqm::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let rho = matqm::DensityMat::pure(&v).unwrap();
        let ab = AnglePair::new(rng.random_range(0.0..FRAC_PI_2), rng.random_range(0.0..FRAC_PI_2)).unwrap();
        let ab2 = AnglePair::new(rng.random_range(0.0..FRAC_PI_2), rng.random_range(0.0..FRAC_PI_2)).unwrap();
        let v1 = bell_operator(&f, ab).trace_product(rho.as_herm());
        let v2 = bell_operator(&f, ab2).trace_product(rho.as_herm());
        assert!(v2 <= v1 + c0 * (ab2.a - ab.a).abs() + c1 * (ab2.b - ab.b).abs() + 1e-9);
    }
}

proptest! {
    #[test]
    fn observables_are_involutions(theta in -10.0f64..10.0, x in 0u8..2) {
        let o = observable(theta, x);
        let sq = o.matmul(&o).unwrap();
        prop_assert!(close(&sq, &HermMat::identity(2).unwrap(), 1e-12));
    }

    #[test]
    fn chsh_lmax_matches_commutator_oracle(a in 0.0f64..FRAC_PI_2, b in 0.0f64..FRAC_PI_2) {
        let f = BellFunctional::chsh();
        let v = max_quantum_value(&f, AnglePair::new(a, b).unwrap()).unwrap();
        prop_assert!((v - chsh_lmax_oracle(a, b)).abs() < 1e-12);
    }

    #[test]
    fn max_quantum_value_is_lipschitz(a in 0.0f64..FRAC_PI_2, b in 0.0f64..FRAC_PI_2,
                                      a2 in 0.0f64..FRAC_PI_2, b2 in 0.0f64..FRAC_PI_2,
                                      g in prop::array::uniform4(-2.0f64..2.0), ca in -1.0f64..1.0) {
        let f = BellFunctional::new("r", [[g[0], g[1]], [g[2], g[3]]], [ca, 0.0], [0.0, 0.3], None).unwrap();
        let (c0, c1) = lipschitz_constants(&f);
        let v1 = max_quantum_value(&f, AnglePair::new(a, b).unwrap()).unwrap();
        let v2 = max_quantum_value(&f, AnglePair::new(a2, b2).unwrap()).unwrap();
        prop_assert!((v1 - v2).abs() <= c0 * (a - a2).abs() + c1 * (b - b2).abs() + 1e-9);
    }

    #[test]
    fn score_round_trip(p in 0.0f64..=1.0) {
        let back = value_to_score(score_to_value(p).unwrap()).unwrap();
        prop_assert!((back - p).abs() <= 1e-14);
    }
}
