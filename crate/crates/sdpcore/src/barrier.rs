//! Log-det barrier path following over x = (t₁..t₅, λ, μ).

use matqm::Sym4;

use crate::{bd_sigma, bd_terms, FabProblem, FabSolution, SdpError, SolveStatus};

const NV: usize = 7;
const IL: usize = 5;
const IM: usize = 6;
/// Barrier parameter: two 4×4 cones plus the two bounds on λ.
const NU: f64 = 10.0;
const MAX_CENTERING: usize = 50;
const OPTIMAL_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Target for NU/τ, the duality gap on the central path.
    pub gap_tol: f64,
    pub max_newton: usize,
    /// Multiplicative increase of τ between centerings.
    pub tau_step: f64,
    /// Upper bound on λ, relative to 1/‖B‖.
    pub lambda_cap: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { gap_tol: 1e-9, max_newton: 600, tau_step: 16.0, lambda_cap: 1e6 }
    }
}

struct Model {
    b: Sym4,
    omega: f64,
    cap: f64,
    terms: [Sym4; 5],
}

struct Point {
    phi: f64,
    grad: [f64; NV],
    hess: [[f64; NV]; NV],
    s2inv: Sym4,
}

impl Model {
    fn slacks(&self, x: &[f64; NV]) -> (Sym4, Sym4) {
        let t = [x[0], x[1], x[2], x[3], x[4]];
        let s1 = bd_sigma(&t);
        let s2 = s1.axpy(-x[IL], &self.b).axpy(-x[IM], &Sym4::identity());
        (s1, s2)
    }

    /// Barrier objective only, or None outside the interior.
    fn phi(&self, x: &[f64; NV], tau: f64) -> Option<f64> {
        let lam = x[IL];
        if !(lam > 0.0 && lam < self.cap) {
            return None;
        }
        let (s1, s2) = self.slacks(x);
        let l1 = s1.cholesky()?;
        let l2 = s2.cholesky()?;
        let logdet = |l: [[f64; 4]; 4]| 2.0 * (0..4).map(|i| l[i][i].ln()).sum::<f64>();
        let obj = lam * self.omega + x[IM];
        Some(-tau * obj - logdet(l1) - logdet(l2) - lam.ln() - (self.cap - lam).ln())
    }

    fn point(&self, x: &[f64; NV], tau: f64) -> Option<Point> {
        let phi = self.phi(x, tau)?;
        let (s1, s2) = self.slacks(x);
        let (_, s1inv) = s1.logdet_inverse()?;
        let (_, s2inv) = s2.logdet_inverse()?;
        let lam = x[IL];

        // Derivatives of the cone maps: dS1/dt_k = dS2/dt_k = P_k/4,
        // dS2/dλ = −B, dS2/dμ = −I.
        let mut m1 = [[[0.0; 4]; 4]; 5];
        let mut m2 = [[[0.0; 4]; 4]; NV];
        for k in 0..5 {
            let a = self.terms[k].scale(0.25);
            m1[k] = s1inv.matmul(&a);
            m2[k] = s2inv.matmul(&a);
        }
        m2[IL] = s2inv.matmul(&self.b.scale(-1.0));
        m2[IM] = s2inv.scale(-1.0).0;

        let tr = |m: &[[f64; 4]; 4]| m[0][0] + m[1][1] + m[2][2] + m[3][3];
        let trp = |a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]| {
            let mut s = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    s += a[i][j] * b[j][i];
                }
            }
            s
        };

        let mut grad = [0.0; NV];
        let mut hess = [[0.0; NV]; NV];
        for i in 0..NV {
            grad[i] = -tr(&m2[i]);
            if i < 5 {
                grad[i] -= tr(&m1[i]);
            }
            for j in 0..=i {
                let mut h = trp(&m2[i], &m2[j]);
                if i < 5 && j < 5 {
                    h += trp(&m1[i], &m1[j]);
                }
                hess[i][j] = h;
                hess[j][i] = h;
            }
        }
        grad[IL] += -tau * self.omega - 1.0 / lam + 1.0 / (self.cap - lam);
        grad[IM] += -tau;
        hess[IL][IL] += 1.0 / (lam * lam) + 1.0 / ((self.cap - lam) * (self.cap - lam));
        Some(Point { phi, grad, hess, s2inv })
    }
}

/// Solves H d = −g by Cholesky, adding a ridge if H is numerically singular.
fn newton_direction(h: &[[f64; NV]; NV], g: &[f64; NV]) -> Option<[f64; NV]> {
    let scale = (0..NV).map(|i| h[i][i].abs()).fold(0.0, f64::max).max(1e-300);
    let mut ridge = 0.0;
    for _ in 0..8 {
        let mut l = [[0.0; NV]; NV];
        let mut ok = true;
        'outer: for j in 0..NV {
            let mut d = h[j][j] + ridge;
            for k in 0..j {
                d -= l[j][k] * l[j][k];
            }
            if d <= 0.0 || !d.is_finite() {
                ok = false;
                break 'outer;
            }
            let djj = d.sqrt();
            l[j][j] = djj;
            for i in (j + 1)..NV {
                let mut s = h[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = s / djj;
            }
        }
        if ok {
            let mut y = [0.0; NV];
            for i in 0..NV {
                let mut s = -g[i];
                for k in 0..i {
                    s -= l[i][k] * y[k];
                }
                y[i] = s / l[i][i];
            }
            let mut d = [0.0; NV];
            for i in (0..NV).rev() {
                let mut s = y[i];
                for k in (i + 1)..NV {
                    s -= l[k][i] * d[k];
                }
                d[i] = s / l[i][i];
            }
            return Some(d);
        }
        ridge = if ridge == 0.0 { 1e-14 * scale } else { ridge * 100.0 };
    }
    None
}

pub fn solve_fab(p: &FabProblem) -> Result<FabSolution, SdpError> {
    solve_fab_with(p, &SolverOptions::default())
}

pub fn solve_fab_with(p: &FabProblem, opts: &SolverOptions) -> Result<FabSolution, SdpError> {
    let (vals, _) = p.bell_op.eigh()?;
    let lmax = vals[3];
    let norm = vals[0].abs().max(vals[3].abs());
    if p.omega > lmax + 1e-12 * norm.max(1.0) {
        return Err(SdpError::Infeasible { omega: p.omega, lambda_max: lmax });
    }
    let model = Model { b: p.bell_op, omega: p.omega, cap: opts.lambda_cap / norm.max(1e-12), terms: bd_terms() };

    // Strictly interior start: σ = I/4, small λ, μ low enough that the
    // second slack is at least I.
    let lam0 = (0.1 / norm.max(1e-12)).min(0.5 * model.cap);
    let mut x = [0.0; NV];
    x[IL] = lam0;
    x[IM] = 0.25 - lam0 * norm - 1.0;

    let mut tau = 1.0;
    let mut steps = 0;
    let mut status = SolveStatus::MaxIter;
    let mut last: Option<Point> = None;
    'outer: loop {
        let mut inner = 0;
        loop {
            let Some(pt) = model.point(&x, tau) else { break 'outer };
            let Some(d) = newton_direction(&pt.hess, &pt.grad) else {
                last = Some(pt);
                break 'outer;
            };
            let slope: f64 = (0..NV).map(|i| pt.grad[i] * d[i]).sum();
            last = Some(pt);
            let pt = last.as_ref().unwrap();
            // At large τ the barrier value carries roundoff of order τ·ε,
            // so a Newton decrement below ~1e-7 is as centered as it gets.
            if -slope / 2.0 <= 1e-7 {
                break;
            }
            let mut s = 1.0;
            let mut moved = false;
            while s > 1e-10 {
                let mut xn = x;
                for i in 0..NV {
                    xn[i] += s * d[i];
                }
                if let Some(phin) = model.phi(&xn, tau) {
                    if phin <= pt.phi + 0.25 * s * slope {
                        x = xn;
                        moved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            steps += 1;
            if steps >= opts.max_newton {
                break 'outer;
            }
            inner += 1;
            // A stalled line search or a long centering means roundoff now
            // dominates; move on to the next τ.
            if !moved || inner >= MAX_CENTERING || s < 1e-6 {
                break;
            }
        }
        if NU / tau <= opts.gap_tol {
            status = SolveStatus::Optimal;
            break;
        }
        tau *= opts.tau_step;
    }

    finalize(p, &x, last.as_ref(), status, steps)
}

/// Feasibility restoration and witness extraction.
fn finalize(
    p: &FabProblem,
    x: &[f64; NV],
    last: Option<&Point>,
    status: SolveStatus,
    steps: usize,
) -> Result<FabSolution, SdpError> {
    let mut t = [x[0], x[1], x[2], x[3], x[4]];
    let smin = bd_sigma(&t).min_eigenvalue()?;
    if smin < 0.0 {
        // Mixing toward I/4 keeps both marginals at I/2.
        let s = 0.25 / (0.25 - smin);
        t.iter_mut().for_each(|v| *v *= s);
    }
    let sigma = bd_sigma(&t);
    let lambda = x[IL].max(0.0);
    let mut mu = x[IM];
    let slack_of = |mu: f64| sigma.axpy(-lambda, &p.bell_op).axpy(-mu, &Sym4::identity());
    let mut psd_slack = slack_of(mu).min_eigenvalue()?;
    if psd_slack < 0.0 {
        mu += psd_slack;
        psd_slack = slack_of(mu).min_eigenvalue()?;
        if psd_slack < 0.0 {
            mu += psd_slack;
            psd_slack = slack_of(mu).min_eigenvalue()?;
        }
    }
    let value = lambda * p.omega + mu;

    let (primal, gap) = match last {
        Some(pt) => {
            let rho = primal_witness(&pt.s2inv, &p.bell_op, p.omega)?;
            (rho, primal_objective(&rho)? - value)
        }
        None => (Sym4::identity().scale(0.25), f64::INFINITY),
    };
    // Optimal is only claimed when the witness confirms it.
    let status = if status == SolveStatus::Optimal && gap > OPTIMAL_GAP { SolveStatus::MaxIter } else { status };
    Ok(FabSolution { lambda, mu, t, sigma, value, psd_slack, status, gap, primal, newton_steps: steps })
}

/// ρ ∝ S₂⁻¹ from the barrier, mixed with the top eigenvector of B just
/// enough to satisfy tr[Bρ] ≥ ω exactly.
fn primal_witness(s2inv: &Sym4, b: &Sym4, omega: f64) -> Result<Sym4, SdpError> {
    let rho = s2inv.scale(1.0 / s2inv.trace());
    let br = rho.dot(b);
    if br >= omega {
        return Ok(rho);
    }
    let (bmax, psi) = b.max_eigenpair()?;
    let s = ((omega - br) / (bmax - br)).clamp(0.0, 1.0);
    Ok(rho.scale(1.0 - s).axpy(s, &Sym4::outer(&psi)))
}

/// Upper bound on the optimum from a primal-feasible ρ: with Z = c·σ(−r/c),
/// r_k = tr[ρP_k], the pair (Z, ρ) is feasible once c ≥ λ_max(Σ r_k P_k),
/// and its objective is ¼(1 + tr Z) = ¼(1 + c).
fn primal_objective(rho: &Sym4) -> Result<f64, SdpError> {
    let mut m = Sym4::ZERO;
    for pk in bd_terms() {
        m = m.axpy(rho.dot(&pk), &pk);
    }
    Ok(0.25 * (1.0 + m.max_eigenvalue()?.max(0.0)))
}
