//! Independent check on the barrier solver by first-order ascent on the
//! concave reduced dual
//!
//! ```text
//! g(t, λ) = λω + λ_min(σ(t) − λB),  σ(t) ⪰ 0,  λ ≥ 0.
//! ```
//!
//! The PSD constraint on σ is folded in as an exact penalty
//! `C·min(0, λ_min(σ))`, both minima are replaced by soft minima, and the
//! smoothed function is maximized by accelerated projected gradient steps
//! with a decreasing smoothing temperature. Supergradients of the nonsmooth
//! function are the β → ∞ limit of the gradients used here. Only points
//! mapped back into σ ⪰ 0 are scored, so the result is always a lower bound.

use matqm::{eig_sym, kron, pauli, EigSys, HermMat, Pauli};

use crate::{bd_terms, FabProblem, SdpError};

/// Search space for σ in the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdFamily {
    /// The five real products used by the solver.
    Real5,
    /// All nine products σ_i ⊗ σ_j, i, j ∈ {X, Y, Z}; may be complex.
    Complex9,
}

fn family_terms(family: BdFamily) -> Vec<HermMat> {
    match family {
        BdFamily::Real5 => bd_terms().iter().map(HermMat::from_sym4).collect(),
        BdFamily::Complex9 => {
            let ps = [Pauli::X, Pauli::Y, Pauli::Z];
            let mut out = Vec::with_capacity(9);
            for a in ps {
                for b in ps {
                    out.push(kron(&pauli(a), &pauli(b)).expect("2x2 kron"));
                }
            }
            out
        }
    }
}

const PENALTY: f64 = 4.0;
const BETAS: [f64; 5] = [30.0, 300.0, 3e3, 3e4, 3e5];

struct Dual<'a> {
    terms: Vec<HermMat>,
    quarter_id: HermMat,
    b: &'a HermMat,
    omega: f64,
    norm: f64,
}

/// Soft minimum −(1/β) log Σ exp(−β x_i) and its softmax weights.
fn softmin(xs: &[f64], beta: f64) -> (f64, Vec<f64>) {
    let m = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let e: Vec<f64> = xs.iter().map(|x| (-beta * (x - m)).exp()).collect();
    let z: f64 = e.iter().sum();
    (m - z.ln() / beta, e.into_iter().map(|v| v / z).collect())
}

/// Σ w_i v_i v_i† over the eigenpairs of `es`.
fn weighted_projector(es: &EigSys, w: &[f64]) -> Result<HermMat, SdpError> {
    let mut g = HermMat::zeros(4)?;
    for (k, wk) in w.iter().enumerate() {
        if *wk > 1e-300 {
            g = g.add(&HermMat::outer(&es.vector(k))?.scale(*wk))?;
        }
    }
    Ok(g)
}

impl Dual<'_> {
    fn sigma(&self, t: &[f64]) -> Result<HermMat, SdpError> {
        let mut s = self.quarter_id.clone();
        for (tk, pk) in t.iter().zip(&self.terms) {
            s = s.add(&pk.scale(0.25 * tk))?;
        }
        Ok(s)
    }

    /// x = (t, ℓ) with λ = ℓ/‖B‖. Returns the smoothed value and gradient.
    fn smoothed(&self, x: &[f64], beta: f64) -> Result<(f64, Vec<f64>), SdpError> {
        let n = self.terms.len();
        let lam = x[n] / self.norm;
        let sigma = self.sigma(&x[..n])?;
        let e1 = eig_sym(&sigma.sub(&self.b.scale(lam))?)?;
        let (m1, w1) = softmin(&e1.values, beta);
        let g1 = weighted_projector(&e1, &w1)?;

        // min(0, λ_min σ) smoothed over {0} ∪ spec σ.
        let e2 = eig_sym(&sigma)?;
        let mut xs = vec![0.0];
        xs.extend_from_slice(&e2.values);
        let (m2, w2) = softmin(&xs, beta);
        let g2 = weighted_projector(&e2, &w2[1..])?;

        let mut grad: Vec<f64> = self
            .terms
            .iter()
            .map(|pk| 0.25 * (g1.trace_product(pk) + PENALTY * g2.trace_product(pk)))
            .collect();
        grad.push((self.omega - g1.trace_product(self.b)) / self.norm);
        Ok((lam * self.omega + m1 + PENALTY * m2, grad))
    }

    /// Exact dual value after shrinking σ toward I/4 into the PSD cone.
    fn feasible_value(&self, x: &[f64]) -> Result<f64, SdpError> {
        let n = self.terms.len();
        let lam = x[n] / self.norm;
        let mut t = x[..n].to_vec();
        let smin = eig_sym(&self.sigma(&t)?)?.values[0];
        if smin < 0.0 {
            let s = 0.25 / (0.25 - smin);
            t.iter_mut().for_each(|v| *v *= s);
        }
        let m = self.sigma(&t)?.sub(&self.b.scale(lam))?;
        Ok(lam * self.omega + eig_sym(&m)?.values[0])
    }
}

pub fn supergrad_oracle(p: &FabProblem, iters: usize) -> Result<f64, SdpError> {
    supergrad_oracle_with(p, iters, BdFamily::Real5)
}

/// Best feasible value found within roughly `iters` gradient evaluations.
/// Every scored point is dual feasible, so the result is a lower bound on
/// the optimum regardless of convergence.
pub fn supergrad_oracle_with(p: &FabProblem, iters: usize, family: BdFamily) -> Result<f64, SdpError> {
    let b = HermMat::from_sym4(&p.bell_op);
    let bvals = eig_sym(&b)?;
    if p.omega > bvals.max() + 1e-12 {
        return Err(SdpError::Infeasible { omega: p.omega, lambda_max: bvals.max() });
    }
    let dual = Dual {
        terms: family_terms(family),
        quarter_id: HermMat::identity(4)?.scale(0.25),
        b: &b,
        omega: p.omega,
        norm: bvals.min().abs().max(bvals.max().abs()).max(1e-12),
    };
    let n = dual.terms.len();
    let project = |x: &mut Vec<f64>| x[n] = x[n].max(0.0);

    let mut x = vec![0.0; n + 1];
    let mut best = dual.feasible_value(&x)?;
    let per_stage = (iters / BETAS.len()).max(1);
    for beta in BETAS {
        // FISTA with backtracking on the step 1/L, restarted per stage.
        let mut y = x.clone();
        let mut x_prev = x.clone();
        let mut theta = 1.0_f64;
        let mut lip = beta;
        for _ in 0..per_stage {
            let (fy, gy) = dual.smoothed(&y, beta)?;
            let mut cand;
            loop {
                cand = y.iter().zip(&gy).map(|(a, g)| a + g / lip).collect::<Vec<_>>();
                project(&mut cand);
                let (fc, _) = dual.smoothed(&cand, beta)?;
                let d: Vec<f64> = cand.iter().zip(&y).map(|(c, a)| c - a).collect();
                let lin: f64 = gy.iter().zip(&d).map(|(g, di)| g * di).sum();
                let quad: f64 = d.iter().map(|v| v * v).sum();
                if fc >= fy + lin - 0.5 * lip * quad || lip > 1e14 {
                    break;
                }
                lip *= 2.0;
            }
            let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
            let mom = (theta - 1.0) / theta_next;
            y = cand.iter().zip(&x_prev).map(|(c, xp)| c + mom * (c - xp)).collect();
            project(&mut y);
            x_prev = cand.clone();
            x = cand;
            theta = theta_next;
            lip *= 0.9;
            best = best.max(dual.feasible_value(&x)?);
        }
    }
    Ok(best)
}
