//! Cyclic Jacobi eigensolver for small real symmetric matrices.

use crate::MatError;

/// Sweep cap for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;

/// Diagonalizes the symmetric matrix `a` in place.
///
/// On return the diagonal of `a` holds the eigenvalues (unsorted) and the
/// columns of `v` the matching orthonormal eigenvectors. Returns the number
/// of sweeps used.
pub fn jacobi_in_place<const N: usize>(
    a: &mut [[f64; N]; N],
    v: &mut [[f64; N]; N],
) -> Result<usize, MatError> {
    for (i, row) in v.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = if i == j { 1.0 } else { 0.0 };
        }
    }
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok(0);
    }
    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..N {
            for j in (i + 1)..N {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            return Ok(sweep);
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                a[p][p] -= t * apq;
                a[q][q] += t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for r in 0..N {
                    if r != p && r != q {
                        let arp = a[r][p];
                        let arq = a[r][q];
                        let np = arp - s * (arq + tau * arp);
                        let nq = arq + s * (arp - tau * arq);
                        a[r][p] = np;
                        a[p][r] = np;
                        a[r][q] = nq;
                        a[q][r] = nq;
                    }
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = vp - s * (vq + tau * vp);
                    row[q] = vq + s * (vp - tau * vq);
                }
            }
        }
    }
    Err(MatError::NoConvergence { sweeps: MAX_SWEEPS })
}

/// Eigenvalues in ascending order with eigenvectors as columns of the
/// returned matrix.
pub fn eigh<const N: usize>(m: &[[f64; N]; N]) -> Result<([f64; N], [[f64; N]; N]), MatError> {
    let mut a = *m;
    let mut v = [[0.0; N]; N];
    jacobi_in_place(&mut a, &mut v)?;
    let mut order: [usize; N] = [0; N];
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let mut vals = [0.0; N];
    let mut vecs = [[0.0; N]; N];
    for (k, &src) in order.iter().enumerate() {
        vals[k] = a[src][src];
        for r in 0..N {
            vecs[r][k] = v[r][src];
        }
    }
    Ok((vals, vecs))
}
