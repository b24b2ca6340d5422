use std::f64::consts::{FRAC_PI_4, SQRT_2};

use bellops::{AnglePair, BellFunctional};
use extract::*;
use proptest::prelude::*;
use sdpcore::weak_duality_witness;

const QMAX: f64 = 2.0 * SQRT_2;

fn knots() -> Vec<f64> {
    let mut k: Vec<f64> = (0..=6).map(|i| 2.0 + (QMAX - 2.01) * i as f64 / 6.0).collect();
    k.extend([QMAX - 2e-3, QMAX - 1e-3, QMAX]);
    k
}

fn run(delta: f64, mode: PenaltyMode) -> ExtractabilityCurve {
    xi_lower_bound(&BellFunctional::chsh(), &GridSpec::new(delta, mode, knots())).unwrap()
}

fn bardyn(w: f64) -> f64 {
    analytic(AnalyticKind::BardynLocc, w).unwrap()
}

#[test]
fn feasible_cell_examples() {
    let f = BellFunctional::chsh();
    // Empty only while the margin is below the 0.1 overshoot.
    let fine = GridSpec::new(0.01, PenaltyMode::Tight, vec![2.8]);
    assert!(feasible_cells(&f, QMAX + 0.1, &fine).unwrap().is_empty());
    let g = GridSpec::new(0.05, PenaltyMode::Paper, vec![2.8]);

    let side = grid_axis(0.05).len();
    assert_eq!(feasible_cells(&f, 0.0, &g).unwrap().len(), side * side);

    let cells = feasible_cells(&f, 2.8, &g).unwrap();
    let near = |p: &AnglePair, a: f64, b: f64| (p.a - a).abs() < 1e-12 && (p.b - b).abs() < 1e-12;
    // π/4 is not a multiple of 0.05; the nearest grid point is 0.8.
    assert!(cells.iter().any(|p| near(p, 0.8, 0.8)));
    assert!(!cells.iter().any(|p| near(p, 0.0, 0.0)));

    // A grid containing π/4 exactly.
    let g = GridSpec::new(FRAC_PI_4 / 16.0, PenaltyMode::Paper, vec![2.8]);
    let cells = feasible_cells(&f, 2.8, &g).unwrap();
    assert!(cells.iter().any(|p| near(p, FRAC_PI_4, FRAC_PI_4)));
    assert!(!cells.iter().any(|p| near(p, 0.0, 0.0)));
}

#[test]
fn grid_axis_nests_under_halving() {
    let coarse = grid_axis(0.02);
    let fine = grid_axis(0.01);
    assert!(coarse.iter().all(|x| fine.iter().any(|y| (x - y).abs() < 1e-12)));
    assert_eq!(*coarse.last().unwrap(), std::f64::consts::FRAC_PI_2);
}

#[test]
fn penalty_modes() {
    let f = BellFunctional::chsh();
    assert!((penalty(&f, 0.005, PenaltyMode::Paper) - 0.04).abs() < 1e-15);
    assert!((penalty(&f, 0.005, PenaltyMode::Tight) - 0.02).abs() < 1e-15);
}

#[test]
fn analytic_examples() {
    assert!((bardyn(2.0) - 0.5).abs() < 1e-15);
    assert!((bardyn(QMAX) - 1.0).abs() < 1e-15);
    assert_eq!(analytic(AnalyticKind::KaniewskiLo, 2.05).unwrap(), 0.5);
    assert!((analytic(AnalyticKind::KaniewskiLo, QMAX).unwrap() - 1.0).abs() < 1e-15);
    assert!((omega_star() - (16.0 + 14.0 * SQRT_2) / 17.0).abs() < 1e-15);
    assert!((omega_star() - 2.1058).abs() < 1e-4);
    assert!(analytic(AnalyticKind::BardynLocc, 1.9).is_err());
    assert!(analytic(AnalyticKind::KaniewskiLo, 2.9).is_err());
}

#[test]
fn invalid_specs() {
    let f = BellFunctional::chsh();
    let bad = |g: GridSpec| xi_lower_bound(&f, &g).unwrap_err();
    assert!(matches!(bad(GridSpec::new(0.0, PenaltyMode::Paper, vec![2.5])), ExtractError::BadSpacing(_)));
    assert!(matches!(bad(GridSpec::new(1.0, PenaltyMode::Paper, vec![2.5])), ExtractError::BadSpacing(_)));
    assert!(matches!(bad(GridSpec::new(0.1, PenaltyMode::Paper, vec![])), ExtractError::NoKnots));
    assert!(matches!(bad(GridSpec::new(0.1, PenaltyMode::Paper, vec![2.5, 2.4])), ExtractError::KnotsNotAscending));
    assert!(matches!(bad(GridSpec::new(0.1, PenaltyMode::Paper, vec![3.0])), ExtractError::KnotOutOfRange { .. }));
}

#[test]
fn default_knot_grid() {
    let k = default_knots(&BellFunctional::chsh(), 65);
    assert_eq!(k.len(), 65);
    assert_eq!(k[0], 2.0);
    assert!((k[64] - QMAX).abs() < 1e-15);
}

#[test]
fn chsh_curve_at_default_spacing() {
    let c = run(0.01, PenaltyMode::Paper);
    assert_eq!(c.knots.len(), knots().len());
    assert!((c.eval(2.0) - 0.5).abs() <= 2e-3);
    let v = c.eval(QMAX - 1e-3);
    assert!((0.9..=1.0).contains(&v), "{v}");

    let pw = c.as_piecewise();
    assert!(pw.is_convex(1e-12));
    assert!(pw.is_non_decreasing(1e-12));
    for k in &c.knots {
        assert!((FLOOR..=1.0).contains(&k.value));
        assert!(k.value <= bardyn(k.omega) + 1e-6, "{k:?}");
    }
    assert_eq!(c.eval(1.0), FLOOR);
}

#[test]
fn refinement_and_tight_mode_do_not_lower_values() {
    let coarse = run(0.02, PenaltyMode::Paper);
    let fine = run(0.01, PenaltyMode::Paper);
    let tight = run(0.02, PenaltyMode::Tight);
    for ((c, f), t) in coarse.knots.iter().zip(&fine.knots).zip(&tight.knots) {
        assert!(f.value >= c.value - 1e-9, "refine {c:?} {f:?}");
        assert!(t.value >= c.value - 1e-9, "tight {c:?} {t:?}");
    }
    for ((c, f), t) in coarse.details().iter().zip(fine.details()).zip(tight.details()) {
        assert!(f.clamped >= c.clamped - 1e-9);
        assert!(t.clamped >= c.clamped - 1e-9);
    }
}

#[test]
fn argmin_witness_passes() {
    let c = run(0.02, PenaltyMode::Paper);
    for d in c.details() {
        let (p, sol) = d.result.witness.as_ref().unwrap();
        assert!(weak_duality_witness(sol, p, 10_000).unwrap(), "knot {}", d.result.omega);
        assert!((sol.value - d.result.minimum.unwrap()).abs() < 1e-15);
    }
}

/// Pruning only skips cells already certified above the minimum, so pruned
/// and exhaustive sweeps agree.
#[test]
fn pruning_matches_exhaustive_sweep() {
    let f = BellFunctional::chsh();
    let grid = Grid::new(&f, 0.05).unwrap();
    let pruned = SweepOptions::default();
    let exhaustive = SweepOptions { block_radians: 0.0, ..pruned };
    for w in [2.3, 2.6, 2.8] {
        let a = knot_minimum(&f, &grid, w, PenaltyMode::Tight, &pruned).unwrap();
        let b = knot_minimum(&f, &grid, w, PenaltyMode::Tight, &exhaustive).unwrap();
        assert_eq!(b.pruned, 0);
        assert_eq!(a.cells, b.cells);
        assert!((a.minimum.unwrap() - b.minimum.unwrap()).abs() < 1e-9);
    }
}

#[test]
fn first_knot_above_bottom_is_floor_pinned() {
    let f = BellFunctional::chsh();
    let c = xi_lower_bound(&f, &GridSpec::new(0.05, PenaltyMode::Tight, vec![2.7, QMAX])).unwrap();
    assert_eq!(c.knots[0].value, FLOOR);
    assert!(c.details()[0].clamped > FLOOR);
}

#[test]
fn oversized_penalty_gives_floor() {
    // Paper penalty at δ = 0.5 is 4, more than the whole range above 2.
    let f = BellFunctional::chsh();
    let c = xi_lower_bound(&f, &GridSpec::new(0.5, PenaltyMode::Paper, vec![2.0, QMAX])).unwrap();
    assert!(c.knots.iter().all(|k| k.value == FLOOR));
    let c = xi_lower_bound(&f, &GridSpec::new(0.1, PenaltyMode::Tight, vec![-2.0 * SQRT_2, QMAX])).unwrap();
    assert_eq!(c.knots.len(), 2);
    assert_eq!(c.knots[0].value, FLOOR);
}

#[test]
fn serialization_round_trip() {
    let c = run(0.05, PenaltyMode::Tight);
    let text = c.to_json();
    let back = ExtractabilityCurve::from_json(&text).unwrap();
    assert_eq!(back.knots, c.knots);
    assert_eq!(back.meta, c.meta);
    assert_eq!(back.functional, "chsh");
    assert!(back.details().is_empty());
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["meta"]["mode"], "tight");
    assert_eq!(v["meta"]["floor"], 0.5);

    let mut csv = Vec::new();
    c.write_csv(&mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    assert!(csv.starts_with("omega,value\n"));
    assert_eq!(csv.lines().count(), c.knots.len() + 1);

    assert!(ExtractabilityCurve::from_json(r#"{"functional":"chsh","knots":[],"meta":{"delta":0.1,"mode":"paper","penalty":0.8,"floor":0.5}}"#).is_err());
}

#[test]
fn g_epsilon_from_curve() {
    let c = run(0.05, PenaltyMode::Tight);
    let g = c.g_epsilon((-QMAX, QMAX), 0.1).unwrap();
    assert!(g.base().is_concave(1e-12));
    assert!(g.base().is_non_increasing(1e-12));
    // Left of the local bound only the floor is known: h = 1/√2 − ε.
    assert!((g.eval(0.0) - (0.5f64.sqrt() - 0.1)).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn curve_shape_invariants(
        raw in prop::collection::vec(2.0..QMAX, 1..6),
        delta in 0.05..0.2f64,
        tight in any::<bool>(),
    ) {
        let mut k = raw;
        k.sort_by(f64::total_cmp);
        k.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let mode = if tight { PenaltyMode::Tight } else { PenaltyMode::Paper };
        let c = xi_lower_bound(&BellFunctional::chsh(), &GridSpec::new(delta, mode, k)).unwrap();
        let pw = c.as_piecewise();
        prop_assert!(pw.is_convex(1e-12));
        prop_assert!(pw.is_non_decreasing(1e-12));
        for kn in &c.knots {
            prop_assert!((FLOOR..=1.0).contains(&kn.value));
            prop_assert!(kn.value <= bardyn(kn.omega) + 1e-6);
        }
    }
}

#[test]
fn analytic_curves_as_extractability_curves() {
    for kind in [AnalyticKind::BardynLocc, AnalyticKind::KaniewskiLo] {
        let c = ExtractabilityCurve::from_analytic(kind);
        for i in 0..=100 {
            let w = 2.0 + (QMAX - 2.0) * i as f64 / 100.0;
            assert!((c.eval(w) - analytic(kind, w).unwrap()).abs() < 1e-12);
        }
        assert_eq!(c.eval(-1.0), FLOOR);
        assert!(c.as_piecewise().is_convex(1e-12));
    }
}
