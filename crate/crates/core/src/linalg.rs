//! Small dense linear-algebra helpers shared across the crate.
//!
//! Everything here operates on matrices of dimension at most a few tens,
//! so simplicity and determinism win over asymptotics. Eigendecompositions
//! are delegated to nalgebra's symmetric solver; the routines below add the
//! orderings and degeneracy handling the callers rely on.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigenvalues (ascending) and matching eigenvectors of a symmetric matrix.
pub struct SymEig {
    pub values: Vec<f64>,
    /// Column i is the unit eigenvector for `values[i]`.
    pub vectors: DMatrix<f64>,
}

/// Symmetric eigendecomposition with eigenvalues sorted ascending.
pub fn sym_eig(mat: &DMatrix<f64>) -> SymEig {
    let n = mat.nrows();
    debug_assert_eq!(n, mat.ncols());
    let eig = mat.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    SymEig { values, vectors }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn lambda_min(mat: &DMatrix<f64>) -> f64 {
    sym_eig(mat).values[0]
}

/// Inverse of a symmetric positive-definite matrix via eigendecomposition,
/// rejecting condition numbers above `cond_limit`.
pub fn spd_inverse(mat: &DMatrix<f64>, cond_limit: f64) -> Result<DMatrix<f64>> {
    let eig = sym_eig(mat);
    let lo = eig.values[0];
    let hi = *eig.values.last().unwrap();
    if lo <= 0.0 || hi / lo > cond_limit {
        return Err(Error::SingularMatrix(format!(
            "eigenvalues in [{lo:.3e}, {hi:.3e}] exceed condition limit {cond_limit:.1e}"
        )));
    }
    let n = mat.nrows();
    let mut inv = DMatrix::zeros(n, n);
    for i in 0..n {
        let v = eig.vectors.column(i);
        inv += v * v.transpose() / eig.values[i];
    }
    // Re-symmetrise against rounding.
    let invt = inv.transpose();
    Ok((inv + invt) * 0.5)
}

/// Moore-Penrose pseudo-inverse (thin wrapper over SVD).
pub fn pseudo_inverse(mat: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if mat.ncols() == 0 || mat.nrows() == 0 {
        return Ok(DMatrix::zeros(mat.ncols(), mat.nrows()));
    }
    mat.clone()
        .svd(true, true)
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::SingularMatrix(e.to_string()))
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(mat: &DMatrix<f64>) -> f64 {
    if mat.ncols() == 0 || mat.nrows() == 0 {
        return 0.0;
    }
    mat.clone().svd(false, false).singular_values.max()
}

/// Stabilising solution of the discrete-time Riccati equation
/// `P = Q + A'PA - A'PB (R + B'PB)^{-1} B'PA` by fixed-point iteration,
/// returning the feedback gain `K` such that `A + B K` is Schur stable.
pub fn discrete_riccati_gain(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let m = b.ncols();
    if m == 0 {
        return Ok(DMatrix::zeros(0, n));
    }
    let mut p = q.clone();
    for _ in 0..10_000 {
        let btp = b.transpose() * &p;
        let gram = r + &btp * b;
        let gain = gram
            .clone()
            .lu()
            .solve(&(&btp * a))
            .ok_or_else(|| Error::SingularMatrix("R + B'PB not invertible".into()))?;
        let p_next = q + a.transpose() * &p * a - a.transpose() * &p * b * &gain;
        let diff = (&p_next - &p).abs().max();
        p = p_next;
        if diff < 1e-13 {
            let btp = b.transpose() * &p;
            let gram = r + &btp * b;
            let gain = gram
                .lu()
                .solve(&(&btp * a))
                .ok_or_else(|| Error::SingularMatrix("R + B'PB not invertible".into()))?;
            return Ok(-gain);
        }
    }
    Err(Error::SingularMatrix(
        "discrete Riccati iteration did not converge".into(),
    ))
}

/// FNV-1a 64-bit hash, used for config/certificate identifiers and file checksums.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Infinity norm of the elementwise difference, used by test oracles and checks.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

/// Euclidean norm helper for vectors.
pub fn norm2(v: &DVector<f64>) -> f64 {
    v.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cyclic Jacobi eigenvalue iteration: an independent oracle for the
    /// nalgebra-backed solver above.
    fn jacobi_eigenvalues(mat: &DMatrix<f64>) -> Vec<f64> {
        let n = mat.nrows();
        let mut a = mat.clone();
        for _ in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)] * a[(p, q)];
                }
            }
            if off.sqrt() < 1e-14 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    let mut rot = DMatrix::identity(n, n);
                    rot[(p, p)] = c;
                    rot[(q, q)] = c;
                    rot[(p, q)] = s;
                    rot[(q, p)] = -s;
                    a = rot.transpose() * a * rot;
                }
            }
        }
        let mut vals: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        vals.sort_by(|x, y| x.total_cmp(y));
        vals
    }

    fn lcg_matrix(seed: u64, n: usize) -> DMatrix<f64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
        };
        let raw = DMatrix::from_fn(n, n, |_, _| next());
        let rawt = raw.transpose();
        (raw + rawt) * 0.5
    }

    #[test]
    fn sym_eig_matches_jacobi_oracle() {
        for seed in 0..20 {
            for &n in &[2usize, 4, 7] {
                let m = lcg_matrix(seed * 31 + n as u64, n);
                let ours = sym_eig(&m);
                let oracle = jacobi_eigenvalues(&m);
                for (a, b) in ours.values.iter().zip(oracle.iter()) {
                    assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
                }
                // Eigenpairs satisfy A v = lambda v.
                for i in 0..n {
                    let v = ours.vectors.column(i).clone_owned();
                    let res = (&m * &v - ours.values[i] * &v).norm();
                    assert!(res < 1e-9, "residual {res}");
                }
            }
        }
    }

    #[test]
    fn spd_inverse_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.5]);
        let inv = spd_inverse(&m, 1e12).unwrap();
        let eye = &m * &inv;
        assert!(max_abs_diff(&eye, &DMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn spd_inverse_rejects_ill_conditioned() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-15]);
        assert!(spd_inverse(&m, 1e12).is_err());
    }

    #[test]
    fn riccati_gain_stabilises_linearisation() {
        // Unstable scalar pair (1.1, 1): K must place |1.1 + k| < 1.
        let a = DMatrix::from_row_slice(1, 1, &[1.1]);
        let b = DMatrix::from_row_slice(1, 1, &[1.0]);
        let q = DMatrix::identity(1, 1);
        let r = DMatrix::identity(1, 1);
        let k = discrete_riccati_gain(&a, &b, &q, &r).unwrap();
        let closed = 1.1 + k[(0, 0)];
        assert!(closed.abs() < 1.0, "closed-loop pole {closed}");
    }

    #[test]
    fn pseudo_inverse_of_column() {
        let b = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let pinv = pseudo_inverse(&b).unwrap();
        assert_eq!(pinv.nrows(), 1);
        assert!((pinv[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(pinv[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn fnv_is_stable() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
    }
}
