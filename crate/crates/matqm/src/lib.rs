//! Dense linear algebra for one- and two-qubit operators.
//!
//! [`HermMat`] is the general (possibly complex) container used for states
//! and observables; [`Sym4`] is a fixed-size real symmetric 4×4 type used on
//! the extraction hot path where every Bell operator and dual variable is
//! real.

mod herm;
pub mod jacobi;
mod sym4;

pub use herm::{eig_sym, fidelity, kron, partial_trace, pauli, trace_distance, DensityMat, EigSys, HermMat, Pauli, Side};
pub use num_complex::Complex64;
pub use sym4::Sym4;

/// Global numerical tolerances.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Algebraic identities (traces, reconstructions, normalization).
    pub algebraic: f64,
    /// Positive-semidefiniteness checks on solver outputs.
    pub psd: f64,
    /// Accepted asymmetry when building a Hermitian matrix.
    pub hermitian: f64,
}

pub const TOL: Tolerances = Tolerances { algebraic: 1e-10, psd: 1e-8, hermitian: 1e-12 };

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MatError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension {0} (only 2 and 4)")]
    UnsupportedDim(usize),
    #[error("matrix is not Hermitian at ({row},{col})")]
    NotHermitian { row: usize, col: usize },
    #[error("matrix has non-zero imaginary parts")]
    NotReal,
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("not a density matrix: {0}")]
    NotDensity(String),
    #[error("fidelity target must be a pure state")]
    NotPure,
}

/// The real Pauli matrices as plain arrays.
pub mod real2 {
    pub const I: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];
    pub const X: [[f64; 2]; 2] = [[0.0, 1.0], [1.0, 0.0]];
    pub const Z: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, -1.0]];
}

/// Real symmetric two-qubit Pauli products used by the Bell-diagonal family.
pub mod pauli4 {
    use crate::Sym4;

    pub fn xx() -> Sym4 {
        Sym4([[0., 0., 0., 1.], [0., 0., 1., 0.], [0., 1., 0., 0.], [1., 0., 0., 0.]])
    }
    pub fn zz() -> Sym4 {
        Sym4::diag([1., -1., -1., 1.])
    }
    /// Y⊗Y is real: the two factors of i cancel.
    pub fn yy() -> Sym4 {
        Sym4([[0., 0., 0., -1.], [0., 0., 1., 0.], [0., 1., 0., 0.], [-1., 0., 0., 0.]])
    }
    pub fn xz() -> Sym4 {
        Sym4([[0., 0., 1., 0.], [0., 0., 0., -1.], [1., 0., 0., 0.], [0., -1., 0., 0.]])
    }
    pub fn zx() -> Sym4 {
        Sym4([[0., 1., 0., 0.], [1., 0., 0., 0.], [0., 0., 0., -1.], [0., 0., -1., 0.]])
    }
}
