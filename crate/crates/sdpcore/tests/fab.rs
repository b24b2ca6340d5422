use std::f64::consts::{FRAC_PI_4, SQRT_2};

use bellops::{bell_operator_sym4, observable_real, AnglePair, BellFunctional};
use matqm::{partial_trace, HermMat, Side, Sym4};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use sdpcore::*;

fn chsh_op(a: f64, b: f64) -> Sym4 {
    bell_operator_sym4(&BellFunctional::chsh(), AnglePair::new(a, b).unwrap())
}

/// Σ γ_xy A_x(a) ⊗ B_y(b) for arbitrary correlator coefficients.
fn correlator_op(g: [[f64; 2]; 2], a: f64, b: f64) -> Sym4 {
    let mut m = Sym4::ZERO;
    for x in 0..2u8 {
        for y in 0..2u8 {
            let term = Sym4::kron2(&observable_real(a, x), &observable_real(b, y));
            m = m.axpy(g[x as usize][y as usize], &term);
        }
    }
    m
}

fn check_invariants(sol: &FabSolution, p: &FabProblem) {
    assert!(sol.lambda >= 0.0);
    assert!((sol.value - (sol.lambda * p.omega + sol.mu)).abs() <= 1e-12);
    assert!(sol.sigma.min_eigenvalue().unwrap() >= -1e-8);
    assert!(marginal_error(&sol.sigma) <= 1e-8);
    assert!(sol.psd_slack >= -1e-8, "psd slack {}", sol.psd_slack);
    assert!(sol.is_feasible(&p.bell_op, 1e-8));
    // The primal witness bounds every dual point from above.
    assert!(sol.gap >= -1e-9, "negative gap {}", sol.gap);
    if sol.status == SolveStatus::Optimal {
        assert!(sol.gap <= 1e-6);
    }
}

#[test]
fn chsh_maximum_gives_unit_value() {
    let p = FabProblem::from_sym4(chsh_op(FRAC_PI_4, FRAC_PI_4), 2.0 * SQRT_2);
    let sol = solve_fab(&p).unwrap();
    check_invariants(&sol, &p);
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.value - 1.0).abs() <= 1e-4, "value {}", sol.value);
    assert!(sol.gap.abs() <= 1e-6, "gap {}", sol.gap);
}

#[test]
fn chsh_classical_bound_at_least_half() {
    let p = FabProblem::from_sym4(chsh_op(FRAC_PI_4, FRAC_PI_4), 2.0);
    let sol = solve_fab(&p).unwrap();
    check_invariants(&sol, &p);
    assert!(sol.value >= 0.5 - 1e-6, "value {}", sol.value);
}

#[test]
fn from_hermitian_input() {
    let f = BellFunctional::chsh();
    let h = bellops::bell_operator(&f, AnglePair::new(FRAC_PI_4, FRAC_PI_4).unwrap());
    let p = FabProblem::new(&h, 2.5).unwrap();
    assert_eq!(p.bell_op, chsh_op(FRAC_PI_4, FRAC_PI_4));
    let y = matqm::kron(&matqm::pauli(matqm::Pauli::Y), &matqm::pauli(matqm::Pauli::X)).unwrap();
    assert_eq!(FabProblem::new(&y, 0.0), Err(SdpError::NotRealSymmetric));
}

/// Coarse grid over the five Bell-diagonal parameters: max_t λ_min(σ(t)).
fn zero_operator_grid_oracle() -> f64 {
    let levels = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut best = f64::NEG_INFINITY;
    for i in 0..levels.len().pow(5) {
        let mut k = i;
        let t: [f64; 5] = std::array::from_fn(|_| {
            let v = levels[k % 5];
            k /= 5;
            v
        });
        let s = bd_sigma(&t).min_eigenvalue().unwrap();
        if s >= 0.0 {
            best = best.max(s);
        }
    }
    best
}

#[test]
fn zero_operator_value() {
    // Against the zero operator only μ matters: the best σ is I/4, and
    // the maximally mixed ρ pins every σ to 1/4.
    let oracle = zero_operator_grid_oracle();
    assert!((oracle - 0.25).abs() < 1e-12);
    let p = FabProblem::from_sym4(Sym4::ZERO, 0.0);
    let sol = solve_fab(&p).unwrap();
    check_invariants(&sol, &p);
    assert!((sol.value - oracle).abs() <= 1e-6, "value {}", sol.value);
}

#[test]
fn infeasible_above_operator_maximum() {
    let p = FabProblem::from_sym4(chsh_op(FRAC_PI_4, FRAC_PI_4), 2.0 * SQRT_2 + 0.1);
    assert!(matches!(solve_fab(&p), Err(SdpError::Infeasible { .. })));
    let p = FabProblem::from_sym4(chsh_op(0.0, 0.0), 2.5);
    assert!(matches!(solve_fab(&p), Err(SdpError::Infeasible { .. })));
    assert!(matches!(supergrad_oracle(&p, 10), Err(SdpError::Infeasible { .. })));
}

#[test]
fn oracle_reaches_one_at_chsh_maximum() {
    let p = FabProblem::from_sym4(chsh_op(FRAC_PI_4, FRAC_PI_4), 2.0 * SQRT_2);
    let v = supergrad_oracle(&p, 20_000).unwrap();
    assert!(v >= 0.999, "oracle {v}");
}

#[test]
fn oracle_below_solver_at_operator_maximum() {
    for (a, b) in [(0.3, 1.1), (0.7, 0.2), (FRAC_PI_4, FRAC_PI_4), (1.5, 0.05)] {
        let op = chsh_op(a, b);
        let omega = op.max_eigenvalue().unwrap();
        let p = FabProblem::from_sym4(op, omega);
        let sol = solve_fab(&p).unwrap();
        check_invariants(&sol, &p);
        let o = supergrad_oracle(&p, 5_000).unwrap();
        assert!(o <= sol.value + 1e-6, "({a},{b}) oracle {o} solver {}", sol.value);
    }
}

#[test]
fn oracle_agrees_on_random_operators() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strat = (prop::array::uniform4(-1.0..1.0f64), 0.0..1.5707f64, 0.0..1.5707f64);
    for _ in 0..12 {
        let (g, a, b) = strat.new_tree(&mut runner).unwrap().current();
        let op = correlator_op([[g[0], g[1]], [g[2], g[3]]], a, b);
        let omega = op.max_eigenvalue().unwrap() - 0.1;
        let p = FabProblem::from_sym4(op, omega);
        let sol = solve_fab(&p).unwrap();
        check_invariants(&sol, &p);
        let o = supergrad_oracle(&p, 5_000).unwrap();
        assert!((o - sol.value).abs() <= 1e-3, "g={g:?} a={a} b={b}: oracle {o} solver {}", sol.value);
    }
}

#[test]
fn complex_family_does_not_beat_real_family_on_chsh() {
    // Y⊗Y is the only Y-containing product that survives for real operators.
    let p = FabProblem::from_sym4(chsh_op(0.6, 0.9), 2.4);
    let sol = solve_fab(&p).unwrap();
    let o9 = supergrad_oracle_with(&p, 20_000, BdFamily::Complex9).unwrap();
    assert!(o9 <= sol.value + 1e-6, "complex oracle {o9} solver {}", sol.value);
    assert!((o9 - sol.value).abs() <= 1e-2);
}

#[test]
fn witness_accepts_feasible_solutions() {
    for (a, b, w) in [(FRAC_PI_4, FRAC_PI_4, 2.0), (FRAC_PI_4, FRAC_PI_4, 2.8), (0.2, 1.3, 1.0), (0.5, 0.5, -1.0)] {
        let p = FabProblem::from_sym4(chsh_op(a, b), w);
        let sol = solve_fab(&p).unwrap();
        assert!(weak_duality_witness(&sol, &p, 10_000).unwrap());
    }
}

#[test]
fn witness_rejects_inflated_mu() {
    for w in [2.0, 2.5, 2.8] {
        let p = FabProblem::from_sym4(chsh_op(FRAC_PI_4, FRAC_PI_4), w);
        let mut sol = solve_fab(&p).unwrap();
        sol.mu += 0.1;
        sol.value += 0.1;
        assert!(!weak_duality_witness(&sol, &p, 10_000).unwrap(), "ω = {w}");
    }
}

#[test]
fn complementary_slackness_at_chsh_optimum() {
    for w in [2.0, 2.5, 2.0 * SQRT_2] {
        let p = FabProblem::from_sym4(chsh_op(FRAC_PI_4, FRAC_PI_4), w);
        let sol = solve_fab(&p).unwrap();
        let rho = sol.primal;
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(rho.min_eigenvalue().unwrap() >= -1e-12);
        assert!(rho.dot(&p.bell_op) >= w - 1e-5);
        let excess = rho.dot(&sol.sigma) - sol.value;
        assert!(excess.abs() <= 1e-5, "ω = {w}: excess {excess}");
    }
}

#[test]
fn transported_solutions_remain_valid() {
    let p = FabProblem::from_sym4(chsh_op(0.8, 0.8), 2.6);
    let sol = solve_fab(&p).unwrap();
    let other = chsh_op(0.81, 0.79);
    let v = transported_value(&sol, &other, 2.6).unwrap();
    let direct = solve_fab(&FabProblem::from_sym4(other, 2.6)).unwrap().value;
    assert!(v <= direct + 1e-7);
    assert!(certifies_at_least(&sol, &other, 2.6, v - 1e-9));
    assert!(!certifies_at_least(&sol, &other, 2.6, v + 1e-6));
}

#[test]
fn bd_family_has_exact_marginals() {
    let sigma = bd_sigma(&[0.3, -0.2, 0.1, 0.4, -0.5]);
    let h = HermMat::from_sym4(&sigma);
    for side in [Side::A, Side::B] {
        let m = partial_trace(&h, side).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 0.5 } else { 0.0 };
                assert!((m.get(i, j).re - target).abs() <= 1e-15);
            }
        }
    }
}

fn arb_op() -> impl Strategy<Value = Sym4> {
    (prop::array::uniform4(-1.0..1.0f64), 0.0..1.5707f64, 0.0..1.5707f64)
        .prop_map(|(g, a, b)| correlator_op([[g[0], g[1]], [g[2], g[3]]], a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn value_monotone_in_omega(op in arb_op()) {
        let (lo, hi) = (op.min_eigenvalue().unwrap(), op.max_eigenvalue().unwrap());
        let mut prev = f64::NEG_INFINITY;
        for k in 0..10 {
            let w = lo + (hi - lo) * k as f64 / 9.0;
            let p = FabProblem::from_sym4(op, w);
            let sol = solve_fab(&p).unwrap();
            check_invariants(&sol, &p);
            prop_assert!(sol.value >= prev - 1e-8, "ω={} value {} < {}", w, sol.value, prev);
            prev = sol.value;
        }
    }

    #[test]
    fn value_scale_covariant(op in arb_op(), frac in 0.0..1.0f64, c in 0.1..10.0f64) {
        let (lo, hi) = (op.min_eigenvalue().unwrap(), op.max_eigenvalue().unwrap());
        let w = lo + frac * (hi - lo);
        let v1 = solve_fab(&FabProblem::from_sym4(op, w)).unwrap();
        let v2 = solve_fab(&FabProblem::from_sym4(op.scale(c), c * w)).unwrap();
        prop_assert!((v1.value - v2.value).abs() <= 1e-8, "{} vs {}", v1.value, v2.value);
    }

    #[test]
    fn bd_marginals_exact(t in prop::array::uniform5(-1.0..1.0f64)) {
        prop_assert!(marginal_error(&bd_sigma(&t)) <= 1e-15);
    }

    #[test]
    fn solutions_pass_weak_duality(op in arb_op(), frac in 0.0..1.0f64) {
        let (lo, hi) = (op.min_eigenvalue().unwrap(), op.max_eigenvalue().unwrap());
        let p = FabProblem::from_sym4(op, lo + frac * (hi - lo));
        let sol = solve_fab(&p).unwrap();
        prop_assert!(weak_duality_witness(&sol, &p, 500).unwrap());
    }
}
