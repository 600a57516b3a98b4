//! Small dense kernels: cyclic Jacobi for symmetric matrices, complex LU
//! determinants, and complex least-squares residuals.

use num_complex::Complex64;

const JACOBI_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric `m x m` matrix (row-major).
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues sorted descending
/// and eigenvectors stored as the columns of a row-major `m x m` matrix. Each
/// eigenvector is signed so that its first largest-magnitude component is
/// nonnegative.
pub fn symmetric_eigen(a: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), m * m, "matrix must be m x m");
    let mut a = a.to_vec();
    let mut v = vec![0.0; m * m];
    for k in 0..m {
        v[k * m + k] = 1.0;
    }
    let scale = a.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_SWEEPS {
        let off: f64 = (0..m)
            .flat_map(|p| (p + 1..m).map(move |q| (p, q)))
            .map(|(p, q)| a[p * m + q] * a[p * m + q])
            .sum();
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                // rotation angle that annihilates a[p][q]
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
                for k in 0..m {
                    let vkp = v[k * m + p];
                    let vkq = v[k * m + q];
                    v[k * m + p] = c * vkp - s * vkq;
                    v[k * m + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| a[j * m + j].total_cmp(&a[i * m + i]));
    let values: Vec<f64> = order.iter().map(|&k| a[k * m + k]).collect();
    let mut vectors = vec![0.0; m * m];
    for (dst, &src) in order.iter().enumerate() {
        let mut best = 0;
        for k in 0..m {
            if v[k * m + src].abs() > v[best * m + src].abs() + 1e-12 {
                best = k;
            }
        }
        let sign = if v[best * m + src] < 0.0 { -1.0 } else { 1.0 };
        for k in 0..m {
            vectors[k * m + dst] = sign * v[k * m + src];
        }
    }
    (values, vectors)
}

/// Determinant of a complex `n x n` matrix (row-major) by LU with partial
/// pivoting.
pub fn complex_det(a: &[Complex64], n: usize) -> Complex64 {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let mut a = a.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
            .expect("nonempty range");
        let pv = a[pivot * n + col];
        if pv.norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        det *= pv;
        for row in col + 1..n {
            let f = a[row * n + col] / pv;
            if f.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let upper = a[col * n + k];
                a[row * n + k] -= f * upper;
            }
        }
    }
    det
}

/// Euclidean norms of the columns of a row-major `rows x cols` matrix.
pub fn column_norms(a: &[Complex64], rows: usize, cols: usize) -> Vec<f64> {
    (0..cols)
        .map(|k| (0..rows).map(|i| a[i * cols + k].norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

/// Orthonormal basis of the span of the columns (modified Gram-Schmidt with
/// one reorthogonalization pass). Also returns the diagonal of `R`, which
/// measures how far each column sticks out of the span of its predecessors.
pub fn orthonormal_columns(
    a: &[Complex64],
    rows: usize,
    cols: usize,
) -> (Vec<Vec<Complex64>>, Vec<f64>) {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    let mut diag = Vec::with_capacity(cols);
    for k in 0..cols {
        let mut v: Vec<Complex64> = (0..rows).map(|i| a[i * cols + k]).collect();
        project_out(&mut v, &basis);
        let nv = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        diag.push(nv);
        if nv > 0.0 {
            v.iter_mut().for_each(|x| *x /= nv);
            basis.push(v);
        }
    }
    (basis, diag)
}

fn project_out(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for q in basis {
            let d: Complex64 = q.iter().zip(v.iter()).map(|(qi, vi)| qi.conj() * vi).sum();
            v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= d * qi);
        }
    }
}

/// `min_c |A c - b|_2` for a row-major complex `rows x cols` matrix `A`.
pub fn least_squares_residual(a: &[Complex64], rows: usize, cols: usize, b: &[Complex64]) -> f64 {
    let (basis, _) = orthonormal_columns(a, rows, cols);
    let mut r = b.to_vec();
    project_out(&mut r, &basis);
    r.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn jacobi_diagonal_input() {
        let (vals, vecs) = symmetric_eigen(&[1.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 2.0], 3);
        assert_eq!(vals, vec![3.0, 2.0, 1.0]);
        // permutation matrix columns e2, e3, e1
        assert_eq!(vecs[1 * 3 + 0], 1.0);
        assert_eq!(vecs[2 * 3 + 1], 1.0);
        assert_eq!(vecs[0 * 3 + 2], 1.0);
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let a = [4.0, 1.0, -2.0, 1.0, 2.0, 0.5, -2.0, 0.5, 3.0];
        let (vals, v) = symmetric_eigen(&a, 3);
        for i in 0..3 {
            for j in 0..3 {
                let rec: f64 = (0..3).map(|k| v[i * 3 + k] * vals[k] * v[j * 3 + k]).sum();
                assert!((rec - a[i * 3 + j]).abs() < 1e-13);
            }
        }
        assert!((vals.iter().sum::<f64>() - 9.0).abs() < 1e-13);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn jacobi_sign_convention() {
        let a = [2.0, -1.0, -1.0, 2.0];
        let (_, v) = symmetric_eigen(&a, 2);
        for col in 0..2 {
            let (mut best, mut bv) = (0, 0.0f64);
            for k in 0..2 {
                if v[k * 2 + col].abs() > bv.abs() + 1e-12 {
                    best = k;
                    bv = v[k * 2 + col];
                }
            }
            assert!(v[best * 2 + col] >= 0.0);
        }
    }

    #[test]
    fn determinant_small_cases() {
        let a = [c(2.0), c(1.0), c(1.0), c(3.0)];
        assert!((complex_det(&a, 2) - c(5.0)).norm() < 1e-14);
        let sing = [c(1.0), c(2.0), c(2.0), c(4.0)];
        assert!(complex_det(&sing, 2).norm() < 1e-14);
        let perm = [c(0.0), c(1.0), c(1.0), c(0.0)];
        assert!((complex_det(&perm, 2) + c(1.0)).norm() < 1e-15);
        let i = Complex64::i();
        let z = [i, c(0.0), c(0.0), i];
        assert!((complex_det(&z, 2) + c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn least_squares_known_residual() {
        // fit a constant to (0, 0, 3): residual sqrt(6)
        let a = [c(1.0), c(1.0), c(1.0)];
        let b = [c(0.0), c(0.0), c(3.0)];
        let r = least_squares_residual(&a, 3, 1, &b);
        assert!((r - 6f64.sqrt()).abs() < 1e-14);
        // square nonsingular system is exactly solvable
        let a2 = [c(1.0), c(2.0), c(3.0), c(-1.0)];
        let b2 = [c(1.0), c(1.0)];
        assert!(least_squares_residual(&a2, 2, 2, &b2) < 1e-14);
    }
}
