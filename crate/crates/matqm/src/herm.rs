use num_complex::Complex64;

use crate::sym4::Sym4;
use crate::{jacobi, MatError, TOL};

/// Dense Hermitian matrix of dimension 2 or 4, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMat {
    dim: usize,
    data: Vec<Complex64>,
    real: bool,
}

fn check_dim(dim: usize, len: usize) -> Result<(), MatError> {
    if dim != 2 && dim != 4 {
        return Err(MatError::UnsupportedDim(dim));
    }
    if len != dim * dim {
        return Err(MatError::DimensionMismatch { expected: dim * dim, found: len });
    }
    Ok(())
}

impl HermMat {
    /// Builds a Hermitian matrix, checking hermiticity within the global tolerance.
    /// Tiny asymmetries are averaged away so the stored matrix is exactly Hermitian.
    pub fn from_complex(dim: usize, data: Vec<Complex64>) -> Result<Self, MatError> {
        check_dim(dim, data.len())?;
        let mut out = data.clone();
        for i in 0..dim {
            for j in i..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i].conj();
                if (a - b).norm() > TOL.hermitian {
                    return Err(MatError::NotHermitian { row: i, col: j });
                }
                let avg = (a + b) * 0.5;
                out[i * dim + j] = avg;
                out[j * dim + i] = avg.conj();
            }
            out[i * dim + i].im = 0.0;
        }
        let real = out.iter().all(|z| z.im == 0.0);
        Ok(HermMat { dim, data: out, real })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self, MatError> {
        let c = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_complex(dim, c)
    }

    pub fn identity(dim: usize) -> Result<Self, MatError> {
        let mut d = vec![0.0; dim * dim];
        for i in 0..dim {
            d[i * dim + i] = 1.0;
        }
        Self::from_real(dim, &d)
    }

    pub fn zeros(dim: usize) -> Result<Self, MatError> {
        Self::from_real(dim, &vec![0.0; dim * dim])
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) vector.
    pub fn outer(psi: &[Complex64]) -> Result<Self, MatError> {
        let dim = psi.len();
        let mut d = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                d[i * dim + j] = psi[i] * psi[j].conj();
            }
        }
        Self::from_complex(dim, d)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    fn zip_with(&self, other: &HermMat, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self, MatError> {
        if self.dim != other.dim {
            return Err(MatError::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let d = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self::from_complex(self.dim, d)
    }

    pub fn add(&self, other: &HermMat) -> Result<Self, MatError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &HermMat) -> Result<Self, MatError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        HermMat {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * c).collect(),
            real: self.real,
        }
    }

    fn raw_product(&self, other: &HermMat) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    out[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Matrix product; fails unless the product is itself Hermitian
    /// (e.g. commuting factors).
    pub fn matmul(&self, other: &HermMat) -> Result<Self, MatError> {
        if self.dim != other.dim {
            return Err(MatError::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Self::from_complex(self.dim, self.raw_product(other))
    }

    /// Re tr[self · other]; exact for Hermitian pairs.
    pub fn trace_product(&self, other: &HermMat) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += (self.data[i * n + j] * other.data[j * n + i]).re;
            }
        }
        s
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨ψ|self|ψ⟩.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let n = self.dim;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                s += psi[i].conj() * self.data[i * n + j] * psi[j];
            }
        }
        s.re
    }

    /// Real part as a `Sym4` (for dim 4). Fails if the matrix is complex.
    pub fn to_sym4(&self) -> Result<Sym4, MatError> {
        if self.dim != 4 {
            return Err(MatError::DimensionMismatch { expected: 4, found: self.dim });
        }
        if !self.real {
            return Err(MatError::NotReal);
        }
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = self.data[i * 4 + j].re;
            }
        }
        Ok(Sym4(m))
    }

    /// Real 2×2 block for dim 2 real matrices.
    pub fn to_real2(&self) -> Result<[[f64; 2]; 2], MatError> {
        if self.dim != 2 {
            return Err(MatError::DimensionMismatch { expected: 2, found: self.dim });
        }
        if !self.real {
            return Err(MatError::NotReal);
        }
        Ok([[self.data[0].re, self.data[1].re], [self.data[2].re, self.data[3].re]])
    }

    pub fn from_sym4(s: &Sym4) -> Self {
        let data = s.0.iter().flatten().map(|&x| Complex64::new(x, 0.0)).collect();
        HermMat { dim: 4, data, real: true }
    }
}

/// Single-qubit Pauli operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

pub fn pauli(which: Pauli) -> HermMat {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let data = match which {
        Pauli::I => vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        Pauli::X => vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        Pauli::Y => vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        Pauli::Z => vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
    };
    HermMat::from_complex(2, data).expect("Pauli matrices are Hermitian")
}

/// Tensor product of two single-qubit matrices.
pub fn kron(a: &HermMat, b: &HermMat) -> Result<HermMat, MatError> {
    if a.dim != 2 || b.dim != 2 {
        return Err(MatError::DimensionMismatch { expected: 2, found: if a.dim != 2 { a.dim } else { b.dim } });
    }
    let mut d = vec![Complex64::new(0.0, 0.0); 16];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    d[(2 * i + k) * 4 + 2 * j + l] = a.get(i, j) * b.get(k, l);
                }
            }
        }
    }
    HermMat::from_complex(4, d)
}

/// Which tensor factor is traced out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Traces out subsystem `side` of a two-qubit operator.
pub fn partial_trace(m: &HermMat, side: Side) -> Result<HermMat, MatError> {
    if m.dim != 4 {
        return Err(MatError::DimensionMismatch { expected: 4, found: m.dim });
    }
    let mut d = vec![Complex64::new(0.0, 0.0); 4];
    for r in 0..2 {
        for c in 0..2 {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                s += match side {
                    Side::A => m.get(2 * k + r, 2 * k + c),
                    Side::B => m.get(2 * r + k, 2 * c + k),
                };
            }
            d[r * 2 + c] = s;
        }
    }
    HermMat::from_complex(2, d)
}

/// Eigendecomposition with ascending eigenvalues and orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigSys {
    pub values: Vec<f64>,
    /// Row-major dim×dim; column k is the eigenvector of `values[k]`.
    pub vectors: Vec<Complex64>,
    dim: usize,
}

impl EigSys {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim).map(|r| self.vectors[r * self.dim + k]).collect()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.dim - 1]
    }

    /// V Λ V†.
    pub fn reconstruct(&self) -> Result<HermMat, MatError> {
        let n = self.dim;
        let mut d = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += self.vectors[i * n + k] * self.values[k] * self.vectors[j * n + k].conj();
                }
                d[i * n + j] = s;
            }
        }
        HermMat::from_complex(n, d)
    }
}

fn real_eig<const N: usize>(m: &HermMat) -> Result<EigSys, MatError> {
    let mut a = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..N {
            a[i][j] = m.get(i, j).re;
        }
    }
    let (vals, vecs) = jacobi::eigh(&a)?;
    Ok(EigSys {
        values: vals.to_vec(),
        vectors: vecs.iter().flatten().map(|&x| Complex64::new(x, 0.0)).collect(),
        dim: N,
    })
}

// Complex Hermitian H = R + iJ is diagonalized through the real symmetric
// embedding [[R, -J], [J, R]], whose spectrum is that of H with every
// eigenvalue doubled. Each embedded eigenvector (u; v) maps to u + iv; a
// Gram-Schmidt pass drops the duplicate i·(u + iv) partners.
fn complex_eig<const N: usize, const M: usize>(m: &HermMat) -> Result<EigSys, MatError> {
    let mut a = [[0.0; M]; M];
    for i in 0..N {
        for j in 0..N {
            let z = m.get(i, j);
            a[i][j] = z.re;
            a[i + N][j + N] = z.re;
            a[i][j + N] = -z.im;
            a[i + N][j] = z.im;
        }
    }
    let (_, vecs) = jacobi::eigh(&a)?;
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(N);
    for k in 0..M {
        if basis.len() == N {
            break;
        }
        let mut c: Vec<Complex64> = (0..N).map(|r| Complex64::new(vecs[r][k], vecs[r + N][k])).collect();
        for b in &basis {
            let proj: Complex64 = b.iter().zip(&c).map(|(bi, ci)| bi.conj() * ci).sum();
            for (ci, bi) in c.iter_mut().zip(b) {
                *ci -= proj * bi;
            }
        }
        let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.5 {
            c.iter_mut().for_each(|z| *z /= norm);
            basis.push(c);
        }
    }
    if basis.len() != N {
        return Err(MatError::NoConvergence { sweeps: jacobi::MAX_SWEEPS });
    }
    let mut pairs: Vec<(f64, Vec<Complex64>)> = basis.into_iter().map(|v| (m.expectation(&v), v)).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut vectors = vec![Complex64::new(0.0, 0.0); N * N];
    for (k, (_, v)) in pairs.iter().enumerate() {
        for r in 0..N {
            vectors[r * N + k] = v[r];
        }
    }
    Ok(EigSys { values: pairs.iter().map(|p| p.0).collect(), vectors, dim: N })
}

pub fn eig_sym(m: &HermMat) -> Result<EigSys, MatError> {
    match (m.dim, m.real) {
        (2, true) => real_eig::<2>(m),
        (4, true) => real_eig::<4>(m),
        (2, false) => complex_eig::<2, 4>(m),
        (4, false) => complex_eig::<4, 8>(m),
        (d, _) => Err(MatError::UnsupportedDim(d)),
    }
}

/// Hermitian matrix validated as a quantum state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMat {
    base: HermMat,
}

impl DensityMat {
    pub fn new(base: HermMat) -> Result<Self, MatError> {
        let tr = base.trace();
        if (tr - 1.0).abs() > TOL.algebraic {
            return Err(MatError::NotDensity(format!("trace {tr}")));
        }
        let min = eig_sym(&base)?.min();
        if min < -TOL.algebraic {
            return Err(MatError::NotDensity(format!("minimum eigenvalue {min}")));
        }
        Ok(DensityMat { base })
    }

    /// Normalized projector onto ψ.
    pub fn pure(psi: &[Complex64]) -> Result<Self, MatError> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(MatError::NotDensity("zero vector".into()));
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Self::new(HermMat::outer(&v)?)
    }

    pub fn phi_plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        Self::pure(&[Complex64::new(s, 0.0), z, z, Complex64::new(s, 0.0)]).expect("valid state")
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self, MatError> {
        Self::new(HermMat::identity(dim)?.scale(1.0 / dim as f64))
    }

    /// (1−μ)φ⁺ + μ I/4.
    pub fn isotropic(mu: f64) -> Result<Self, MatError> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(MatError::NotDensity(format!("mixing weight {mu} outside [0,1]")));
        }
        let mixed = Self::maximally_mixed(4)?;
        Self::mix(1.0 - mu, &Self::phi_plus(), &mixed)
    }

    /// p·a + (1−p)·b.
    pub fn mix(p: f64, a: &DensityMat, b: &DensityMat) -> Result<Self, MatError> {
        Self::new(a.base.scale(p).add(&b.base.scale(1.0 - p))?)
    }

    pub fn as_herm(&self) -> &HermMat {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    /// tr[ρ²].
    pub fn purity(&self) -> f64 {
        self.base.trace_product(&self.base)
    }
}

/// Fidelity against a pure target, F = tr[ρ·ψ].
pub fn fidelity(rho: &DensityMat, pure: &DensityMat) -> Result<f64, MatError> {
    if rho.dim() != pure.dim() {
        return Err(MatError::DimensionMismatch { expected: rho.dim(), found: pure.dim() });
    }
    if (pure.purity() - 1.0).abs() > TOL.algebraic {
        return Err(MatError::NotPure);
    }
    Ok(rho.base.trace_product(&pure.base).clamp(0.0, 1.0))
}

/// ½‖ρ − σ‖₁.
pub fn trace_distance(rho: &DensityMat, sigma: &DensityMat) -> Result<f64, MatError> {
    let diff = rho.base.sub(&sigma.base)?;
    Ok(0.5 * eig_sym(&diff)?.values.iter().map(|x| x.abs()).sum::<f64>())
}
