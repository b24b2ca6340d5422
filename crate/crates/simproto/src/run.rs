use matqm::{kron, DensityMat, HermMat};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{DeviceModel, ObservableSet, Party, SideRecord, SideView, SourceModel, StateTable};
use crate::{SimConfig, SimError};

/// One measured round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Round {
    pub round: usize,
    pub x: u8,
    pub y: u8,
    pub a: u8,
    pub b: u8,
    /// ±γ̃_xy in the parallel protocols, 1/0 for a win/loss in the sequential ones.
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    /// Stored (unmeasured) round, 0-based.
    pub t: usize,
    pub rounds: Vec<Round>,
    /// (4/n) Σ W for the parallel protocols; the fraction of won rounds for
    /// the sequential ones.
    pub omega_exp: f64,
    pub failures: u64,
    pub aborted: bool,
    #[serde(serialize_with = "crate::io::serialize_state")]
    pub stored_state: DensityMat,
}

/// Deterministic per-(seed, trial, round, role) randomness.
///
/// Each trial is its own ChaCha stream and each draw its own 64-byte block,
/// so a record depends only on (seed, trial), not on scheduling.
struct CounterRng(ChaCha8Rng);

impl CounterRng {
    const T: u64 = 0;
    const X: u64 = 1;
    const Y: u64 = 2;
    const OUTCOME: u64 = 3;

    fn new(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        CounterRng(rng)
    }

    fn at(&mut self, round: u64, role: u64) -> &mut ChaCha8Rng {
        self.0.set_word_pos(((round * 4 + role) as u128) * 16);
        &mut self.0
    }
}

/// Correlator operators for a fixed observable set: [x][y] → (A⊗B, A⊗I, I⊗B).
type Operators = [[(HermMat, HermMat, HermMat); 2]; 2];

fn operators(a: &HermMat, b: &HermMat) -> Result<(HermMat, HermMat, HermMat), SimError> {
    let id = HermMat::identity(2)?;
    Ok((kron(a, b)?, kron(a, &id)?, kron(&id, b)?))
}

/// Born-rule outcome from a uniform draw u.
fn sample_outcome(rho: &DensityMat, ops: &(HermMat, HermMat, HermMat), u: f64) -> (u8, u8) {
    let r = rho.as_herm();
    let (eab, ea, eb) = (r.trace_product(&ops.0), r.trace_product(&ops.1), r.trace_product(&ops.2));
    let mut p = [0.0; 4];
    for (k, pk) in p.iter_mut().enumerate() {
        let (sa, sb) = (if k & 2 == 0 { 1.0 } else { -1.0 }, if k & 1 == 0 { 1.0 } else { -1.0 });
        *pk = ((1.0 + sa * ea + sb * eb + sa * sb * eab) / 4.0).max(0.0);
    }
    let total: f64 = p.iter().sum();
    let mut acc = 0.0;
    for (k, pk) in p.iter().enumerate() {
        acc += pk / total;
        if u < acc {
            return ((k >> 1) as u8, (k & 1) as u8);
        }
    }
    (1, 1)
}

/// A scenario resolved once and reused across trials.
pub struct Prepared<'a> {
    cfg: &'a SimConfig,
    states: StateTable,
    device: &'a DeviceModel,
    fixed: Option<Operators>,
    loss_limit: u64,
}

impl<'a> Prepared<'a> {
    pub fn new(cfg: &'a SimConfig, src: &SourceModel, dev: &'a DeviceModel) -> Result<Self, SimError> {
        cfg.validate()?;
        let states = StateTable::new(src, cfg.n as usize)?;
        let fixed = match dev.fixed() {
            Some(set) => Some(fixed_operators(&set)?),
            None => None,
        };
        let loss_limit = security::seq_failure_limit(cfg.n, cfg.threshold, cfg.kappa);
        Ok(Prepared { cfg, states, device: dev, fixed, loss_limit })
    }

    pub fn trial(&self, seed: u64, trial: u64) -> TrialRecord {
        let n = self.cfg.n as usize;
        let seq = self.cfg.protocol.is_sequential();
        let gamma = self.cfg.functional.gamma();
        let mut rng = CounterRng::new(seed, trial);
        let t = rng.at(0, CounterRng::T).random_range(0..n);

        let mut rounds = Vec::with_capacity(n - 1);
        let (mut hist_a, mut hist_b) = (Vec::new(), Vec::new());
        let (mut sum_w, mut failures) = (0.0, 0u64);
        // Round t is skipped wherever it falls, including t = 0 and t = n−1.
        for i in (0..n).filter(|&i| i != t) {
            let r = i as u64 + 1;
            let x = (rng.at(r, CounterRng::X).next_u64() & 1) as u8;
            let y = (rng.at(r, CounterRng::Y).next_u64() & 1) as u8;
            let u: f64 = rng.at(r, CounterRng::OUTCOME).random();

            let rho = self.states.get(i);
            let (a, b) = match (&self.fixed, self.device) {
                (Some(ops), _) => sample_outcome(rho, &ops[x as usize][y as usize], u),
                (None, DeviceModel::Adaptive(script)) => {
                    let stored = if seq { (t < i).then_some(t) } else { Some(t) };
                    let (ha, hb): (&[SideRecord], &[SideRecord]) = if seq { (&hist_a, &hist_b) } else { (&[], &[]) };
                    let oa = script.observable(Party::Alice, &SideView { round: i, stored, history: ha }, x);
                    let ob = script.observable(Party::Bob, &SideView { round: i, stored, history: hb }, y);
                    let ops = operators(&oa, &ob).expect("scripts return qubit observables");
                    sample_outcome(rho, &ops, u)
                }
                (None, _) => unreachable!("non-adaptive devices are precomputed"),
            };

            let win = (a ^ b) == (x & y);
            let w = if seq {
                f64::from(u8::from(win))
            } else {
                let g = if x & y == 1 { -gamma[x as usize][y as usize] } else { gamma[x as usize][y as usize] };
                if win {
                    g
                } else {
                    -g
                }
            };
            if !win {
                failures += 1;
            }
            sum_w += w;
            if seq {
                hist_a.push(SideRecord { round: i, input: x, output: a });
                hist_b.push(SideRecord { round: i, input: y, output: b });
            }
            rounds.push(Round { round: i, x, y, a, b, w });
        }

        let (omega_exp, aborted) = if seq {
            let measured = (n - 1) as f64;
            ((measured - failures as f64) / measured, failures > self.loss_limit)
        } else {
            let omega = 4.0 * sum_w / n as f64;
            (omega, omega <= self.cfg.threshold - self.cfg.kappa)
        };
        TrialRecord { t, rounds, omega_exp, failures, aborted, stored_state: self.states.get(t).clone() }
    }
}

fn fixed_operators(set: &ObservableSet) -> Result<Operators, SimError> {
    let op = |x: usize, y: usize| operators(&set.alice[x], &set.bob[y]);
    Ok([[op(0, 0)?, op(0, 1)?], [op(1, 0)?, op(1, 1)?]])
}

/// One protocol execution (trial 0 of the seed's stream family).
pub fn run_protocol(cfg: &SimConfig, src: &SourceModel, dev: &DeviceModel, seed: u64) -> Result<TrialRecord, SimError> {
    Ok(Prepared::new(cfg, src, dev)?.trial(seed, 0))
}

/// Abort frequency over `trials` independent executions with its 95% Wilson
/// interval. Trials run in parallel; the result does not depend on the pool.
pub fn estimate_abort_rate(
    cfg: &SimConfig,
    src: &SourceModel,
    dev: &DeviceModel,
    trials: u64,
    seed: u64,
) -> Result<(f64, (f64, f64)), SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    let prep = Prepared::new(cfg, src, dev)?;
    let aborts: u64 = (0..trials).into_par_iter().map(|k| u64::from(prep.trial(seed, k).aborted)).sum();
    Ok((aborts as f64 / trials as f64, wilson_interval(aborts, trials)))
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    const Z: f64 = 1.959963984540054;
    let (nf, p) = (n as f64, k as f64 / n as f64);
    let z2 = Z * Z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    // The endpoints are exactly 0 and 1 at k = 0 and k = n; skip the roundoff.
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}
