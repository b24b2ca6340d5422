//! Fixed-size real symmetric 4×4 matrices for the hot extraction path.

use std::ops::{Add, Mul, Sub};

use crate::jacobi;
use crate::MatError;

/// Real symmetric 4×4 matrix stored as a full row-major array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym4(pub [[f64; 4]; 4]);

impl Sym4 {
    pub const ZERO: Sym4 = Sym4([[0.0; 4]; 4]);

    pub fn identity() -> Self {
        Self::diag([1.0; 4])
    }

    pub fn diag(d: [f64; 4]) -> Self {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            m[i][i] = d[i];
        }
        Sym4(m)
    }

    /// Symmetrizes an arbitrary 4×4 array as (m + mᵀ)/2.
    pub fn symmetrized(m: [[f64; 4]; 4]) -> Self {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = 0.5 * (m[i][j] + m[j][i]);
            }
        }
        Sym4(out)
    }

    /// Tensor product of two real symmetric 2×2 matrices.
    pub fn kron2(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> Self {
        let mut m = [[0.0; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        m[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        Sym4(m)
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// tr[self · other].
    pub fn dot(&self, other: &Sym4) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += self.0[i][j] * other.0[i][j];
            }
        }
        s
    }

    pub fn scale(&self, c: f64) -> Sym4 {
        let mut m = self.0;
        m.iter_mut().flatten().for_each(|x| *x *= c);
        Sym4(m)
    }

    /// self + c·other.
    pub fn axpy(&self, c: f64, other: &Sym4) -> Sym4 {
        let mut m = self.0;
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] += c * other.0[i][j];
            }
        }
        Sym4(m)
    }

    pub fn frobenius(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Plain matrix product (not symmetric in general).
    pub fn matmul(&self, other: &Sym4) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for k in 0..4 {
                let aik = self.0[i][k];
                for j in 0..4 {
                    m[i][j] += aik * other.0[k][j];
                }
            }
        }
        m
    }

    /// ⟨v|self|v⟩.
    pub fn quad(&self, v: &[f64; 4]) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += v[i] * self.0[i][j] * v[j];
            }
        }
        s
    }

    /// Lower Cholesky factor, or `None` if the matrix is not positive definite.
    pub fn cholesky(&self) -> Option<[[f64; 4]; 4]> {
        let a = &self.0;
        let mut l = [[0.0; 4]; 4];
        for j in 0..4 {
            let mut d = a[j][j];
            for k in 0..j {
                d -= l[j][k] * l[j][k];
            }
            if d <= 0.0 || !d.is_finite() {
                return None;
            }
            let djj = d.sqrt();
            l[j][j] = djj;
            for i in (j + 1)..4 {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = s / djj;
            }
        }
        Some(l)
    }

    /// log det and inverse of a positive definite matrix.
    pub fn logdet_inverse(&self) -> Option<(f64, Sym4)> {
        let l = self.cholesky()?;
        let logdet = 2.0 * (0..4).map(|i| l[i][i].ln()).sum::<f64>();
        // Invert L by forward substitution, then inv = L⁻ᵀ L⁻¹.
        let mut li = [[0.0; 4]; 4];
        for i in 0..4 {
            li[i][i] = 1.0 / l[i][i];
            for j in 0..i {
                let mut s = 0.0;
                for k in j..i {
                    s -= l[i][k] * li[k][j];
                }
                li[i][j] = s / l[i][i];
            }
        }
        let mut inv = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..=i {
                let mut s = 0.0;
                for k in i..4 {
                    s += li[k][i] * li[k][j];
                }
                inv[i][j] = s;
                inv[j][i] = s;
            }
        }
        Some((logdet, Sym4(inv)))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_some()
    }

    pub fn eigh(&self) -> Result<([f64; 4], [[f64; 4]; 4]), MatError> {
        jacobi::eigh(&self.0)
    }

    pub fn eigenvalues(&self) -> Result<[f64; 4], MatError> {
        Ok(self.eigh()?.0)
    }

    /// Smallest eigenvalue with its unit eigenvector.
    pub fn min_eigenpair(&self) -> Result<(f64, [f64; 4]), MatError> {
        let (vals, vecs) = self.eigh()?;
        Ok((vals[0], [vecs[0][0], vecs[1][0], vecs[2][0], vecs[3][0]]))
    }

    /// Largest eigenvalue with its unit eigenvector.
    pub fn max_eigenpair(&self) -> Result<(f64, [f64; 4]), MatError> {
        let (vals, vecs) = self.eigh()?;
        Ok((vals[3], [vecs[0][3], vecs[1][3], vecs[2][3], vecs[3][3]]))
    }

    pub fn min_eigenvalue(&self) -> Result<f64, MatError> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64, MatError> {
        Ok(self.eigenvalues()?[3])
    }

    /// |v⟩⟨v|.
    pub fn outer(v: &[f64; 4]) -> Sym4 {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = v[i] * v[j];
            }
        }
        Sym4(m)
    }
}

impl Add for Sym4 {
    type Output = Sym4;
    fn add(self, rhs: Sym4) -> Sym4 {
        self.axpy(1.0, &rhs)
    }
}

impl Sub for Sym4 {
    type Output = Sym4;
    fn sub(self, rhs: Sym4) -> Sym4 {
        self.axpy(-1.0, &rhs)
    }
}

impl Mul<f64> for Sym4 {
    type Output = Sym4;
    fn mul(self, rhs: f64) -> Sym4 {
        self.scale(rhs)
    }
}
