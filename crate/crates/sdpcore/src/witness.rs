//! Randomized weak-duality check: for every state ρ with tr[Bρ] ≥ ω a
//! valid dual point must give tr[ρσ] ≥ λω + μ.

use matqm::Sym4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{FabProblem, FabSolution, SdpError};

const SLACK: f64 = 1e-8;

pub fn weak_duality_witness(sol: &FabSolution, p: &FabProblem, samples: usize) -> Result<bool, SdpError> {
    weak_duality_witness_seeded(sol, p, samples, 0x5eed)
}

/// Samples states on and inside the constraint surface tr[Bρ] = ω. Real
/// states are enough: σ and B are real, so tr[ρσ] and tr[Bρ] only see Re ρ,
/// and Re ρ is itself a state.
pub fn weak_duality_witness_seeded(
    sol: &FabSolution,
    p: &FabProblem,
    samples: usize,
    seed: u64,
) -> Result<bool, SdpError> {
    let b = &p.bell_op;
    let (bmax, psi) = b.max_eigenpair()?;
    if p.omega > bmax + 1e-12 {
        return Err(SdpError::Infeasible { omega: p.omega, lambda_max: bmax });
    }
    let top = Sym4::outer(&psi);
    let slack = sol.sigma.axpy(-sol.lambda, b).axpy(-sol.mu, &Sym4::identity());
    let (_, u) = slack.min_eigenpair()?;
    let value = sol.lambda * p.omega + sol.mu;

    let violates = |rho: &Sym4| rho.dot(b) >= p.omega && rho.dot(&sol.sigma) < value - SLACK;

    // Deterministic candidates the random sweep could miss.
    let mut anchors = vec![top, sol.primal, Sym4::outer(&u)];
    anchors.retain(|r| r.trace() > 0.5);
    for a in &anchors {
        if violates(&toward(&top, a, bmax, b, p.omega, 1.0)) {
            return Ok(false);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..samples {
        let r = match k % 4 {
            0 => anchors[rng.random_range(0..anchors.len())],
            _ => random_state(&mut rng, 1 + k % 4),
        };
        let frac = if k % 2 == 0 { 1.0 } else { rng.random::<f64>() };
        if violates(&toward(&top, &r, bmax, b, p.omega, frac)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// (1 − s)·top + s·r with s a fraction `frac` of the largest mixing weight
/// that keeps tr[Bρ] ≥ ω.
fn toward(top: &Sym4, r: &Sym4, bmax: f64, b: &Sym4, omega: f64, frac: f64) -> Sym4 {
    let br = r.dot(b);
    let smax = if br >= omega { 1.0 } else { ((bmax - omega) / (bmax - br)).clamp(0.0, 1.0) };
    let s = frac * smax;
    top.scale(1.0 - s).axpy(s, r)
}

fn random_state(rng: &mut ChaCha8Rng, rank: usize) -> Sym4 {
    let mut m = Sym4::ZERO;
    for _ in 0..rank {
        let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        m = m.axpy(1.0, &Sym4::outer(&v));
    }
    m.scale(1.0 / m.trace())
}
