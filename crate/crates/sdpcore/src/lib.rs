//! The per-angle extractability SDP.
//!
//! For a fixed qubit Bell operator `B` and value `ω`,
//!
//! ```text
//! f(ω) = max  λω + μ
//!        s.t. σ − λB − μI ⪰ 0,  σ ⪰ 0,  tr_A σ = tr_B σ = I/2,  λ ≥ 0
//! ```
//!
//! lower-bounds `min_{ρ: tr[Bρ] ≥ ω} max_σ tr[ρσ]`. The marginal constraints
//! are eliminated by writing σ in the real Bell-diagonal family
//! `σ(t) = I/4 + ¼(t₁XX + t₂ZZ + t₃YY + t₄XZ + t₅ZX)`.

mod barrier;
mod oracle;
mod witness;

use matqm::{pauli4, HermMat, MatError, Sym4};
use serde::{Deserialize, Serialize};

pub use barrier::{solve_fab, solve_fab_with, SolverOptions};
pub use oracle::{supergrad_oracle, supergrad_oracle_with, BdFamily};
pub use witness::{weak_duality_witness, weak_duality_witness_seeded};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SdpError {
    #[error("ω = {omega} exceeds the largest eigenvalue {lambda_max} of the Bell operator")]
    Infeasible { omega: f64, lambda_max: f64 },
    #[error("Bell operator must be a real symmetric 4x4 matrix")]
    NotRealSymmetric,
    #[error(transparent)]
    Mat(#[from] MatError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FabProblem {
    pub bell_op: Sym4,
    pub omega: f64,
}

impl FabProblem {
    pub fn new(bell_op: &HermMat, omega: f64) -> Result<Self, SdpError> {
        let b = bell_op.to_sym4().map_err(|_| SdpError::NotRealSymmetric)?;
        Ok(FabProblem { bell_op: b, omega })
    }

    pub fn from_sym4(bell_op: Sym4, omega: f64) -> Self {
        FabProblem { bell_op, omega }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

/// A dual-feasible point. `value` is a valid lower bound whatever the status.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FabSolution {
    pub lambda: f64,
    pub mu: f64,
    /// Bell-diagonal coordinates of σ.
    pub t: [f64; 5],
    pub sigma: Sym4,
    pub value: f64,
    /// λ_min(σ − λB − μI) after restoration.
    pub psd_slack: f64,
    pub status: SolveStatus,
    /// Primal objective of the barrier witness minus `value`.
    pub gap: f64,
    /// Real part of the primal witness state ρ (trace one).
    pub primal: Sym4,
    pub newton_steps: usize,
}

impl FabSolution {
    pub fn sigma_herm(&self) -> HermMat {
        HermMat::from_sym4(&self.sigma)
    }

    /// Checks the feasibility invariants with tolerance `tol`.
    pub fn is_feasible(&self, bell_op: &Sym4, tol: f64) -> bool {
        let Ok(smin) = self.sigma.min_eigenvalue() else { return false };
        let slack = self.sigma.axpy(-self.lambda, bell_op).axpy(-self.mu, &Sym4::identity());
        let Ok(kmin) = slack.min_eigenvalue() else { return false };
        self.lambda >= 0.0 && smin >= -tol && kmin >= -tol && marginal_error(&self.sigma) <= tol
    }
}

/// The five real Bell-diagonal Pauli products, in `t` order.
pub fn bd_terms() -> [Sym4; 5] {
    [pauli4::xx(), pauli4::zz(), pauli4::yy(), pauli4::xz(), pauli4::zx()]
}

/// σ(t) = I/4 + ¼ Σ t_k P_k.
pub fn bd_sigma(t: &[f64; 5]) -> Sym4 {
    let terms = bd_terms();
    let mut s = Sym4::identity().scale(0.25);
    for (tk, p) in t.iter().zip(&terms) {
        s = s.axpy(0.25 * tk, p);
    }
    s
}

/// Largest deviation of either marginal of σ from I/2.
pub fn marginal_error(sigma: &Sym4) -> f64 {
    let m = &sigma.0;
    let mut err: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let target = if r == c { 0.5 } else { 0.0 };
            let of_b = m[r][c] + m[2 + r][2 + c];
            let of_a = m[2 * r][2 * c] + m[2 * r + 1][2 * c + 1];
            err = err.max((of_b - target).abs()).max((of_a - target).abs());
        }
    }
    err
}

/// Value certified by carrying a solution for one operator over to another:
/// σ − λB′ − μ′I ⪰ 0 with μ′ = μ + λ_min(σ − λB′ − μI), so λω′ + μ′ is a
/// valid lower bound for the problem (B′, ω′).
pub fn transported_value(sol: &FabSolution, bell_op: &Sym4, omega: f64) -> Result<f64, MatError> {
    let slack = sol.sigma.axpy(-sol.lambda, bell_op).axpy(-sol.mu, &Sym4::identity());
    Ok(sol.lambda * omega + sol.mu + slack.min_eigenvalue()?)
}

/// True when `sol` certifies at least `threshold` for (B′, ω′), decided
/// by a Cholesky test instead of an eigendecomposition.
pub fn certifies_at_least(sol: &FabSolution, bell_op: &Sym4, omega: f64, threshold: f64) -> bool {
    let mu_needed = threshold - sol.lambda * omega;
    let m = sol.sigma.axpy(-sol.lambda, bell_op).axpy(-mu_needed, &Sym4::identity());
    m.is_positive_definite()
}
