//! Eigenvalues of dense symmetric matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const JACOBI_MAX_SWEEPS: usize = 30;
pub const JACOBI_REL_TOL: f64 = 1e-12;

/// Cyclic Jacobi eigenvalues, sorted ascending.
///
/// Sweeps over all `(p, q)` pairs in row order, annihilating each
/// off-diagonal entry with a plane rotation, until the off-diagonal
/// Frobenius norm is at most `1e-12 · ‖A‖_F`. Fails after 30 sweeps.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Domain(format!("matrix must be square, got {}x{}", n, a.ncols())));
    }
    // row-major working copy
    let mut w: Vec<f64> = (0..n * n).map(|idx| a[(idx / n, idx % n)]).collect();
    let frob = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let off_norm = |w: &[f64]| {
        let mut acc = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                acc += 2.0 * w[p * n + q] * w[p * n + q];
            }
        }
        acc.sqrt()
    };
    let tol = JACOBI_REL_TOL * frob;

    let mut converged = off_norm(&w) <= tol;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (n = {n})"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = w[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = w[p * n + p];
                let aqq = w[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    0.0
                };
                if t == 0.0 {
                    // apq negligible against the diagonal gap
                    w[p * n + q] = 0.0;
                    w[q * n + p] = 0.0;
                    continue;
                }
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = w[r * n + p];
                    let arq = w[r * n + q];
                    w[r * n + p] = c * arp - s * arq;
                    w[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = w[p * n + r];
                    let aqr = w[q * n + r];
                    w[p * n + r] = c * apr - s * aqr;
                    w[q * n + r] = s * apr + c * aqr;
                }
                w[p * n + q] = 0.0;
                w[q * n + p] = 0.0;
            }
        }
        converged = off_norm(&w) <= tol;
    }
    let mut eig: Vec<f64> = (0..n).map(|i| w[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Eigenvalues via Householder tridiagonalization and implicit QR
/// (nalgebra), sorted ascending. Used for large covariance matrices.
pub fn tridiagonal_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Domain(format!(
            "matrix must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut eig: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    if eig.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("symmetric eigensolver produced non-finite values".into()));
    }
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// `(1/m) Σ λ^k` for `k = 1..=k_max`.
pub fn normalized_power_sums(eigenvalues: &[f64], k_max: usize) -> Vec<f64> {
    let m = eigenvalues.len() as f64;
    let mut sums = vec![0.0; k_max];
    for &lambda in eigenvalues {
        let mut pow = 1.0;
        for s in sums.iter_mut() {
            pow *= lambda;
            *s += pow;
        }
    }
    sums.iter().map(|s| s / m).collect()
}
