//! Soundness and completeness parameters for the five certification
//! protocols: three with parallel (independent) measurements and a general
//! Bell functional, two with a single sequential CHSH device.
//!
//! Soundness is ε_s = inf_δ max{a(δ), b(δ)}: a(δ) bounds the chance of
//! passing with a low average Bell value, b(δ) the distance to the target
//! when the average is high.

mod tails;

use bellops::{score_to_value, BellFunctional};
use envelope::PenaltyCurve;
use extract::ExtractabilityCurve;
use serde::{Deserialize, Serialize};

pub use tails::{binary_kl, hoeffding_tail, phi, zubkov_c};

#[derive(Debug, thiserror::Error)]
pub enum SecurityError {
    #[error("need at least 2 rounds, got {0}")]
    TooFewRounds(u64),
    #[error("κ must be finite and positive, got {0}")]
    BadKappa(f64),
    #[error("ε must be finite and non-negative (0 for P1), got {0}")]
    BadEpsilon(f64),
    #[error("threshold {value} outside [{lo}, {hi}]")]
    ThresholdOutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("{0:?} requires the CHSH functional")]
    NotChsh(Protocol),
    #[error("the protocol estimator only sees correlators; functional '{0}' has marginal terms")]
    MarginalTerms(String),
    #[error("curve is for '{curve}' but the functional is '{functional}'")]
    FunctionalMismatch { curve: String, functional: String },
    #[error("completeness target {0} is not reachable")]
    UnreachableTarget(f64),
    #[error(transparent)]
    Extract(#[from] extract::ExtractError),
    #[error(transparent)]
    Bell(#[from] bellops::BellError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    P1,
    P2,
    P3,
    P4,
    P5,
}

impl Protocol {
    pub fn is_sequential(self) -> bool {
        matches!(self, Protocol::P4 | Protocol::P5)
    }
}

impl std::str::FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "P1" | "1" => Ok(Protocol::P1),
            "P2" | "2" => Ok(Protocol::P2),
            "P3" | "3" => Ok(Protocol::P3),
            "P4" | "4" => Ok(Protocol::P4),
            "P5" | "5" => Ok(Protocol::P5),
            _ => Err(format!("unknown protocol '{s}' (expected P1..P5)")),
        }
    }
}

/// Constants in the parallel-protocol Hoeffding bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    /// a(δ) = exp(−(n−1)δ²/γ*), ε_c = 2 exp(−(n−1)κ²/γ*).
    Paper,
    /// Hoeffding applied to the estimator ω_exp = (4/n) Σ_{i≠t} Wᵢ with
    /// Wᵢ ∈ [−γ*, γ*] and E Wᵢ = μᵢ/4.
    Rigorous,
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub protocol: Protocol,
    pub n: u64,
    pub kappa: f64,
    /// ω♯ for P1–P3, p♯ (CHSH winning probability) for P4–P5.
    pub threshold: f64,
    pub epsilon: f64,
    pub functional: BellFunctional,
    pub curve: ExtractabilityCurve,
    pub bound_mode: BoundMode,
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<(), SecurityError> {
        if self.n < 2 {
            return Err(SecurityError::TooFewRounds(self.n));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(SecurityError::BadKappa(self.kappa));
        }
        let eps_ok = self.epsilon.is_finite()
            && self.epsilon >= 0.0
            && (self.protocol != Protocol::P1 || self.epsilon == 0.0);
        if !eps_ok {
            return Err(SecurityError::BadEpsilon(self.epsilon));
        }
        let (lo, hi) = if self.protocol.is_sequential() {
            if !self.functional.is_chsh() {
                return Err(SecurityError::NotChsh(self.protocol));
            }
            (0.0, 1.0)
        } else {
            if self.functional.has_marginals() {
                return Err(SecurityError::MarginalTerms(self.functional.id().to_string()));
            }
            let b = self.functional.bounds();
            (b.eta_q_min, b.eta_q_max)
        };
        let slack = 1e-12 * hi.abs().max(1.0);
        if !(self.threshold >= lo - slack && self.threshold <= hi + slack) {
            return Err(SecurityError::ThresholdOutOfRange { value: self.threshold, lo, hi });
        }
        if self.curve.functional != self.functional.id() {
            return Err(SecurityError::FunctionalMismatch {
                curve: self.curve.functional.clone(),
                functional: self.functional.id().to_string(),
            });
        }
        Ok(())
    }
}

/// The two soundness terms as functions of the free parameter δ.
pub struct SoundnessTerms<'a> {
    cfg: &'a ProtocolConfig,
    g: Option<PenaltyCurve>,
    eta_q_min: f64,
}

impl<'a> SoundnessTerms<'a> {
    pub fn new(cfg: &'a ProtocolConfig) -> Result<Self, SecurityError> {
        cfg.validate()?;
        let b = cfg.functional.bounds();
        let g = match cfg.protocol {
            Protocol::P1 => None,
            _ => Some(cfg.curve.g_epsilon((b.eta_q_min, b.eta_q_max), cfg.epsilon)?),
        };
        Ok(SoundnessTerms { cfg, g, eta_q_min: b.eta_q_min })
    }

    /// Finite-statistics term; decreasing in δ.
    pub fn a(&self, delta: f64) -> f64 {
        let c = self.cfg;
        let m = (c.n - 1) as f64;
        if c.protocol.is_sequential() {
            let j = (m * delta).floor().max(0.0);
            return (-j * j / m).exp();
        }
        let gs = c.functional.gamma_star();
        match c.bound_mode {
            BoundMode::Paper => (-m * delta * delta / gs).exp(),
            BoundMode::Rigorous => {
                let r = (m * delta + c.threshold - c.kappa) / 4.0;
                hoeffding_tail(c.n - 1, r, 2.0 * gs)
            }
        }
    }

    /// Bell value at which the extractability term is evaluated.
    pub fn argument(&self, delta: f64) -> f64 {
        let c = self.cfg;
        let (n, m) = (c.n as f64, (c.n - 1) as f64);
        if c.protocol.is_sequential() {
            let wins = (m * (c.threshold - c.kappa - delta)).floor();
            return score_to_value((wins / n).clamp(0.0, 1.0)).expect("clamped score");
        }
        m / n * (c.threshold - c.kappa - delta) + self.eta_q_min / n
    }

    /// Extractability term; non-decreasing in δ.
    pub fn b(&self, delta: f64) -> f64 {
        let w = self.argument(delta);
        match &self.g {
            None => (1.0 - self.cfg.curve.eval(w)).max(0.0).sqrt(),
            Some(g) => g.eval(w),
        }
    }

    pub fn max(&self, delta: f64) -> f64 {
        self.a(delta).max(self.b(delta))
    }

    /// Search bracket (lo, hi] for δ.
    pub fn bracket(&self) -> (f64, f64) {
        let c = self.cfg;
        let hi = if c.protocol.is_sequential() { c.threshold } else { c.threshold - self.eta_q_min };
        (1e-9, hi.max(2e-9))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SecurityReport {
    pub protocol: Protocol,
    pub n: u64,
    pub kappa: f64,
    pub threshold: f64,
    pub epsilon: f64,
    pub bound_mode: BoundMode,
    pub eps_sound: f64,
    pub eps_complete: f64,
    pub delta_star: f64,
    pub a: f64,
    pub b: f64,
    pub notes: Vec<String>,
}

impl SecurityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

const BISECTION_STEPS: usize = 200;
const SCAN_POINTS: usize = 10_000;

/// Minimizes max{a, b} over δ > 0.
///
/// Bisection on the sign of a − b locates the crossing of the decreasing and
/// non-decreasing terms; a dense scan covers jumps where no crossing exists,
/// and sequential protocols also try the left end of every floor step of a.
/// Beyond the nominal bracket b is constant, so the bracket is widened while
/// a still dominates there.
pub fn minimize_delta(t: &SoundnessTerms) -> (f64, f64) {
    let (lo, mut hi) = t.bracket();
    while t.a(hi) > t.b(hi) && hi < 1e6 {
        hi *= 2.0;
    }
    let mut best = (f64::INFINITY, hi);
    let mut consider = |d: f64| {
        let v = t.max(d);
        if v < best.0 {
            best = (v, d);
        }
    };

    let (mut l, mut h) = (lo, hi);
    consider(l);
    consider(h);
    if t.a(l) > t.b(l) && t.a(h) <= t.b(h) {
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (l + h);
            if t.a(mid) > t.b(mid) {
                l = mid;
            } else {
                h = mid;
            }
        }
        consider(l);
        consider(h);
    }
    for i in 0..=SCAN_POINTS {
        consider(lo + (hi - lo) * i as f64 / SCAN_POINTS as f64);
    }
    if t.cfg.protocol.is_sequential() {
        let m = (t.cfg.n - 1) as f64;
        let last = (m * hi).ceil() as u64;
        for j in 1..=last {
            // Just inside step j, so that ⌊(n−1)δ⌋ = j despite rounding.
            consider((j as f64 + 1e-7) / m);
        }
    }
    best
}

/// Completeness error of the honest i.i.d. implementation, clamped to [0, 1].
pub fn completeness(cfg: &ProtocolConfig) -> Result<f64, SecurityError> {
    cfg.validate()?;
    let (n, k) = (cfg.n, cfg.kappa);
    let m = (n - 1) as f64;
    let v = if cfg.protocol.is_sequential() {
        let limit = seq_failure_limit(n, cfg.threshold, k);
        if limit >= n - 1 {
            0.0
        } else {
            1.0 - zubkov_c(n - 1, 1.0 - cfg.threshold, limit)
        }
    } else {
        let gs = cfg.functional.gamma_star();
        match cfg.bound_mode {
            BoundMode::Paper => 2.0 * (-m * k * k / gs).exp(),
            BoundMode::Rigorous => {
                // Abort iff Σ W ≤ n(ω♯ − κ)/4, while E Σ W = (n−1)ω♯/4.
                let r = (n as f64 * k - cfg.threshold) / 4.0;
                hoeffding_tail(n - 1, r, 2.0 * gs)
            }
        }
    };
    Ok(v.clamp(0.0, 1.0))
}

/// Largest number of lost rounds the sequential protocols accept:
/// ⌊(n−1)(1 − p♯ + κ)⌋.
pub fn seq_failure_limit(n: u64, p_sharp: f64, kappa: f64) -> u64 {
    ((n - 1) as f64 * (1.0 - p_sharp + kappa)).floor().max(0.0) as u64
}

/// Smallest κ (to bisection precision) with completeness error ≤ target.
pub fn kappa_for_completeness(cfg: &ProtocolConfig, target: f64) -> Result<f64, SecurityError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(SecurityError::UnreachableTarget(target));
    }
    let mut probe = cfg.clone();
    let mut eps_at = |k: f64| {
        probe.kappa = k;
        completeness(&probe)
    };
    let mut hi = 1e-3;
    while eps_at(hi)? > target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(SecurityError::UnreachableTarget(target));
        }
    }
    let mut lo = 0.0;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eps_at(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Soundness with the optimal δ, together with the completeness error.
pub fn soundness(cfg: &ProtocolConfig) -> Result<SecurityReport, SecurityError> {
    let t = SoundnessTerms::new(cfg)?;
    let (_, delta_star) = minimize_delta(&t);
    let (a, b) = (t.a(delta_star), t.b(delta_star));
    let mut notes = Vec::new();
    if cfg.protocol.is_sequential() {
        notes.push("a(δ) = exp(−⌊(n−1)δ⌋²/(n−1)); b argument ⌊(n−1)(p♯−κ−δ)⌋/n mapped to ω = 8p − 4".into());
        notes.push("ε_c = 1 − C(n−1, 1−p♯, ⌊(n−1)(1−p♯+κ)⌋), counting lost rounds".into());
    } else {
        match cfg.bound_mode {
            BoundMode::Paper => {
                notes.push("a(δ) = exp(−(n−1)δ²/γ*); ε_c = 2exp(−(n−1)κ²/γ*) with negative exponent".into())
            }
            BoundMode::Rigorous => notes
                .push("Hoeffding on (4/n)ΣW with W ∈ [−γ*, γ*]: r = ((n−1)δ + ω♯ − κ)/4, ε_c r = (nκ − ω♯)/4".into()),
        }
    }
    Ok(SecurityReport {
        protocol: cfg.protocol,
        n: cfg.n,
        kappa: cfg.kappa,
        threshold: cfg.threshold,
        epsilon: cfg.epsilon,
        bound_mode: cfg.bound_mode,
        eps_sound: a.max(b).clamp(0.0, 2.0),
        eps_complete: completeness(cfg)?,
        delta_star,
        a,
        b,
        notes,
    })
}

/// CSV with columns n,eps_sound,eps_complete,delta_star.
pub fn write_sweep_csv<W: std::io::Write>(out: W, reports: &[SecurityReport]) -> std::io::Result<()> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(out);
    writeln!(w, "n,eps_sound,eps_complete,delta_star")?;
    for r in reports {
        writeln!(w, "{},{},{},{}", r.n, r.eps_sound, r.eps_complete, r.delta_star)?;
    }
    w.flush()
}
