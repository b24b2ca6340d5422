use std::f64::consts::SQRT_2;

use bellops::BellFunctional;
use extract::{AnalyticKind, ExtractabilityCurve};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use security::*;

const QMAX: f64 = 2.0 * SQRT_2;

fn cfg(protocol: Protocol, n: u64, threshold: f64, epsilon: f64, mode: BoundMode) -> ProtocolConfig {
    ProtocolConfig {
        protocol,
        n,
        kappa: 0.01,
        threshold,
        epsilon,
        functional: BellFunctional::chsh(),
        curve: ExtractabilityCurve::from_analytic(AnalyticKind::BardynLocc),
        bound_mode: mode,
    }
}

fn with_kappa(mut c: ProtocolConfig, target: f64) -> ProtocolConfig {
    c.kappa = kappa_for_completeness(&c, target).unwrap();
    c
}

fn eps_s(c: &ProtocolConfig) -> f64 {
    soundness(c).unwrap().eps_sound
}

#[test]
fn a_term_example() {
    let c = cfg(Protocol::P2, 2, QMAX, 0.1, BoundMode::Paper);
    let t = SoundnessTerms::new(&c).unwrap();
    assert!((t.a(1.0) - (-1f64).exp()).abs() < 1e-15);
}

#[test]
fn rigorous_a_term_matches_hoeffding_on_the_estimator() {
    let c = cfg(Protocol::P2, 101, 2.7, 0.1, BoundMode::Rigorous);
    let t = SoundnessTerms::new(&c).unwrap();
    let d = 0.2;
    // Deviation of Σ W (W ∈ [−1, 1]) above its largest allowed mean.
    let r = (100.0 * d + 2.7 - 0.01) / 4.0;
    assert!((t.a(d) - (-2.0 * r * r / (100.0 * 4.0)).exp()).abs() < 1e-15);
}

#[test]
fn report_invariants() {
    for p in [Protocol::P1, Protocol::P2, Protocol::P3] {
        for mode in [BoundMode::Paper, BoundMode::Rigorous] {
            let eps = if p == Protocol::P1 { 0.0 } else { 0.1 };
            let c = with_kappa(cfg(p, 100_000, 2.8, eps, mode), 1e-2);
            let r = soundness(&c).unwrap();
            assert_eq!(r.eps_sound, r.a.max(r.b));
            assert!((0.0..=2.0).contains(&r.eps_sound));
            assert!(r.eps_complete <= 1e-2 + 1e-12);
        }
    }
    for p in [Protocol::P4, Protocol::P5] {
        let c = with_kappa(cfg(p, 100_000, (2.0 + SQRT_2) / 4.0, 0.1, BoundMode::Paper), 1e-2);
        let r = soundness(&c).unwrap();
        assert_eq!(r.eps_sound, r.a.max(r.b));
        assert!(r.eps_complete <= 1e-2);
    }
}

#[test]
fn located_optimum_beats_random_probes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let configs = [
        cfg(Protocol::P1, 10_000, 2.8, 0.0, BoundMode::Paper),
        cfg(Protocol::P2, 10_000, 2.75, 0.1, BoundMode::Paper),
        cfg(Protocol::P2, 10_000, QMAX, 0.05, BoundMode::Rigorous),
        cfg(Protocol::P4, 10_000, 0.85, 0.1, BoundMode::Paper),
        cfg(Protocol::P2, 50, 2.5, 0.0, BoundMode::Paper),
    ];
    for c in &configs {
        let t = SoundnessTerms::new(c).unwrap();
        let best = eps_s(c);
        let (lo, hi) = t.bracket();
        for _ in 0..1000 {
            let d = rng.random_range(lo..4.0 * hi);
            assert!(best <= t.max(d) + 1e-9, "{:?} δ={d}: {best} > {}", c.protocol, t.max(d));
        }
    }
}

#[test]
fn variant_protocols_share_soundness() {
    let p2 = eps_s(&cfg(Protocol::P2, 50_000, 2.8, 0.1, BoundMode::Paper));
    let p3 = eps_s(&cfg(Protocol::P3, 50_000, 2.8, 0.1, BoundMode::Paper));
    assert_eq!(p2, p3);
    let p4 = eps_s(&cfg(Protocol::P4, 50_000, 0.85, 0.1, BoundMode::Paper));
    let p5 = eps_s(&cfg(Protocol::P5, 50_000, 0.85, 0.1, BoundMode::Paper));
    assert_eq!(p4, p5);
}

#[test]
fn soundness_trends() {
    let base = |n, w, e| with_kappa(cfg(Protocol::P2, n, w, e, BoundMode::Paper), 1e-2);
    let by_n: Vec<f64> = [1_000, 10_000, 100_000, 1_000_000].iter().map(|&n| eps_s(&base(n, 2.82, 0.1))).collect();
    assert!(by_n.windows(2).all(|w| w[1] < w[0]), "{by_n:?}");
    let by_w: Vec<f64> = [2.7, 2.75, 2.8, QMAX].iter().map(|&w| eps_s(&base(100_000, w, 0.1))).collect();
    assert!(by_w.windows(2).all(|w| w[1] < w[0]), "{by_w:?}");
    let by_e: Vec<f64> = [0.0, 0.05, 0.1, 0.15].iter().map(|&e| eps_s(&base(100_000, 2.8, e))).collect();
    assert!(by_e.windows(2).all(|w| w[1] < w[0]), "{by_e:?}");
    // Ideal case: shrinks steadily with n.
    let ideal: Vec<f64> = [1_000, 10_000, 100_000].iter().map(|&n| eps_s(&base(n, QMAX, 0.1))).collect();
    assert!(ideal.windows(2).all(|w| w[1] < w[0]) && ideal[2] < 0.1, "{ideal:?}");
}

#[test]
fn sequential_trend_in_n() {
    let p = (2.0 + SQRT_2) / 4.0;
    let v: Vec<f64> = [1_000, 10_000, 100_000]
        .iter()
        .map(|&n| eps_s(&with_kappa(cfg(Protocol::P4, n, p, 0.1, BoundMode::Paper), 1e-2)))
        .collect();
    assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
}

#[test]
fn parallel_completeness() {
    let mut c = cfg(Protocol::P2, 1000, QMAX, 0.1, BoundMode::Paper);
    c.kappa = 1e3;
    assert_eq!(completeness(&c).unwrap(), 0.0);
    c.kappa = 0.05;
    assert!((completeness(&c).unwrap() - 2.0 * (-999.0 * 0.0025f64).exp()).abs() < 1e-15);

    // Closed-form κ in paper mode.
    let k = kappa_for_completeness(&c, 1e-2).unwrap();
    assert!((k - (200f64.ln() / 999.0).sqrt()).abs() < 1e-12);
    c.bound_mode = BoundMode::Rigorous;
    let kr = kappa_for_completeness(&c, 1e-2).unwrap();
    // Σ W lies in an interval of width 2 per round; the target is
    // exp(−r²/(2·999)) = 0.01 with r = (1000κ − 2√2)/4.
    let expect = (4.0 * (2.0 * 999.0 * 100f64.ln()).sqrt() + QMAX) / 1000.0;
    assert!((kr - expect).abs() < 1e-12, "{kr} vs {expect}");
}

/// Honest CHSH rounds: W = ±1 with win probability (2+√2)/4.
#[test]
fn rigorous_completeness_bounds_simulated_abort_rate() {
    let n = 400u64;
    let c = with_kappa(cfg(Protocol::P2, n, QMAX, 0.1, BoundMode::Rigorous), 0.05);
    let bound = completeness(&c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let win = (2.0 + SQRT_2) / 4.0;
    let trials = 20_000;
    let aborts = (0..trials)
        .filter(|_| {
            let s: f64 = (0..n - 1).map(|_| if rng.random_bool(win) { 1.0 } else { -1.0 }).sum();
            4.0 * s / n as f64 <= QMAX - c.kappa
        })
        .count();
    assert!((aborts as f64 / trials as f64) <= bound, "{aborts} vs bound {bound}");
}

#[test]
fn sequential_completeness_examples() {
    // κ small enough that the failure limit lands on the mean (n−1)(1−p).
    let mut c = cfg(Protocol::P4, 101, 0.7, 0.1, BoundMode::Paper);
    c.kappa = 1e-12;
    assert_eq!(seq_failure_limit(101, 0.7, 1e-12), 30);
    assert!((completeness(&c).unwrap() - 0.5).abs() < 1e-15);

    // n = 10, p♯ = 0.7, κ = 0.1: limit 3 failures out of 9.
    let mut c = cfg(Protocol::P4, 10, 0.7, 0.1, BoundMode::Paper);
    c.kappa = 0.1;
    let eps = completeness(&c).unwrap();
    let cdf = |k: u64| -> f64 {
        (0..=k)
            .map(|i| {
                let coef: f64 = (1..=i).map(|j| (9 - j + 1) as f64 / j as f64).product();
                coef * 0.3f64.powi(i as i32) * 0.7f64.powi(9 - i as i32)
            })
            .sum()
    };
    assert!(1.0 - cdf(3) <= eps && eps <= 1.0 - cdf(2), "{eps}");

    // Every round may be lost: never aborts.
    c.kappa = 0.8;
    assert_eq!(completeness(&c).unwrap(), 0.0);
}

#[test]
fn validation() {
    let mut c = cfg(Protocol::P1, 100, 2.8, 0.1, BoundMode::Paper);
    assert!(matches!(soundness(&c), Err(SecurityError::BadEpsilon(_))));
    c.epsilon = 0.0;
    c.n = 1;
    assert!(matches!(soundness(&c), Err(SecurityError::TooFewRounds(1))));
    c.n = 100;
    c.threshold = 3.0;
    assert!(matches!(soundness(&c), Err(SecurityError::ThresholdOutOfRange { .. })));
    c.threshold = 2.8;
    c.kappa = 0.0;
    assert!(matches!(soundness(&c), Err(SecurityError::BadKappa(_))));

    let f = BellFunctional::new("skew", [[1.0, 1.0], [1.0, -0.5]], [0.0; 2], [0.0; 2], None).unwrap();
    let mut c = cfg(Protocol::P4, 100, 0.8, 0.1, BoundMode::Paper);
    c.functional = f.clone();
    assert!(matches!(soundness(&c), Err(SecurityError::NotChsh(Protocol::P4))));
    let mut c = cfg(Protocol::P2, 100, 2.0, 0.1, BoundMode::Paper);
    c.functional = f;
    assert!(matches!(soundness(&c), Err(SecurityError::FunctionalMismatch { .. })));

    let m = BellFunctional::new("marg", [[1.0, 1.0], [1.0, -1.0]], [0.5, 0.0], [0.0; 2], None).unwrap();
    c.functional = m;
    assert!(matches!(soundness(&c), Err(SecurityError::MarginalTerms(_))));

    assert!(matches!(
        kappa_for_completeness(&cfg(Protocol::P2, 100, 2.8, 0.1, BoundMode::Paper), 0.0),
        Err(SecurityError::UnreachableTarget(_))
    ));
}

#[test]
fn serialization() {
    let r = soundness(&cfg(Protocol::P2, 10_000, 2.8, 0.1, BoundMode::Rigorous)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["protocol"], "P2");
    assert_eq!(v["bound_mode"], "rigorous");
    for key in ["eps_sound", "eps_complete", "delta_star", "a", "b"] {
        assert!(v[key].is_f64(), "{key}");
    }
    let mut out = Vec::new();
    write_sweep_csv(&mut out, &[r.clone(), r]).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("n,eps_sound,eps_complete,delta_star\n"));
    assert_eq!(text.lines().count(), 3);
    assert_eq!("p4".parse::<Protocol>().unwrap(), Protocol::P4);
    assert!("P6".parse::<Protocol>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn term_monotonicity(
        n in 10u64..1_000_000,
        w in 2.0..QMAX,
        eps in 0.0..0.2f64,
        kappa in 1e-4..0.2f64,
        proto in 0usize..4,
        d1 in 1e-6..3.0f64,
        d2 in 1e-6..3.0f64,
    ) {
        let (p, mode) = [
            (Protocol::P2, BoundMode::Paper),
            (Protocol::P2, BoundMode::Rigorous),
            (Protocol::P1, BoundMode::Paper),
            (Protocol::P4, BoundMode::Paper),
        ][proto];
        let threshold = if p.is_sequential() { (w + 4.0) / 8.0 } else { w };
        let eps = if p == Protocol::P1 { 0.0 } else { eps };
        let mut c = cfg(p, n, threshold, eps, mode);
        c.kappa = kappa;
        let t = SoundnessTerms::new(&c).unwrap();
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        prop_assume!(hi > lo);
        prop_assert!(t.a(hi) <= t.a(lo));
        if !p.is_sequential() && t.a(lo) < 1.0 && t.a(lo) > 0.0 {
            prop_assert!(t.a(hi) < t.a(lo));
        }
        prop_assert!(t.b(hi) >= t.b(lo) - 1e-12);
    }
}
