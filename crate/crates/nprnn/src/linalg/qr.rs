use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Householder QR factorization of a square matrix: `m = Q R` with Q
/// orthogonal and R upper triangular. The diagonal of R is sign-normalized
/// to be nonnegative, which makes the factorization unique for full-rank
/// input (and the Q of a Gaussian sample Haar-distributed).
pub fn qr_householder(m: &Matrix) -> Result<(Matrix, Matrix)> {
    if !m.is_square() {
        return Err(Error::contract(format!(
            "qr_householder requires a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut r = m.clone();
    // acc accumulates H_{n-2} ... H_0; Q is its transpose.
    let mut acc = Matrix::identity(n);

    for k in 0..n.saturating_sub(1) {
        // Householder vector for column k, rows k..n
        let mut v: Vec<f64> = (k..n).map(|i| r.get(i, k)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;

        // R <- H R
        for j in k..n {
            let mut c = 0.0;
            for (idx, i) in (k..n).enumerate() {
                c += v[idx] * r.get(i, j);
            }
            c *= beta;
            for (idx, i) in (k..n).enumerate() {
                r.set(i, j, r.get(i, j) - c * v[idx]);
            }
        }
        // acc <- H acc
        for j in 0..n {
            let mut c = 0.0;
            for (idx, i) in (k..n).enumerate() {
                c += v[idx] * acc.get(i, j);
            }
            c *= beta;
            for (idx, i) in (k..n).enumerate() {
                acc.set(i, j, acc.get(i, j) - c * v[idx]);
            }
        }
        // column k is now (.., alpha, 0, .., 0) exactly
        r.set(k, k, alpha);
        for i in k + 1..n {
            r.set(i, k, 0.0);
        }
    }

    let mut q = acc.transpose();

    // nonnegative diagonal of R; flips absorbed into the matching Q column
    for i in 0..n {
        if r.get(i, i) < 0.0 {
            for j in i..n {
                r.set(i, j, -r.get(i, j));
            }
            for row in 0..n {
                q.set(row, i, -q.get(row, i));
            }
        }
    }
    Ok((q, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, Rng};

    /// Determinant by LU with partial pivoting: independent of the QR path.
    fn det_lu(m: &Matrix) -> f64 {
        let n = m.rows();
        let mut a = m.clone();
        let mut det = 1.0;
        for k in 0..n {
            let mut piv = k;
            for i in k + 1..n {
                if a.get(i, k).abs() > a.get(piv, k).abs() {
                    piv = i;
                }
            }
            if a.get(piv, k) == 0.0 {
                return 0.0;
            }
            if piv != k {
                for j in 0..n {
                    let tmp = a.get(k, j);
                    a.set(k, j, a.get(piv, j));
                    a.set(piv, j, tmp);
                }
                det = -det;
            }
            det *= a.get(k, k);
            for i in k + 1..n {
                let f = a.get(i, k) / a.get(k, k);
                for j in k..n {
                    a.set(i, j, a.get(i, j) - f * a.get(k, j));
                }
            }
        }
        det
    }

    #[test]
    fn identity_factors_as_identity() {
        let (q, r) = qr_householder(&Matrix::identity(4)).unwrap();
        assert!(q.max_abs_diff(&Matrix::identity(4)) < 1e-14);
        assert!(r.max_abs_diff(&Matrix::identity(4)) < 1e-14);
    }

    #[test]
    fn gaussian_10x10_orthogonality_and_reconstruction() {
        let mut rng = Rng::new(13);
        let m = gaussian_matrix(10, 10, 0.0, 1.0, &mut rng).unwrap();
        let (q, r) = qr_householder(&m).unwrap();
        let qtq = q.transpose().matmul(&q).unwrap();
        assert!(
            qtq.max_abs_diff(&Matrix::identity(10)) < 1e-10,
            "Q^T Q deviates from identity by {}",
            qtq.max_abs_diff(&Matrix::identity(10))
        );
        let qr = q.matmul(&r).unwrap();
        assert!(qr.max_abs_diff(&m) < 1e-9, "QR != m");
        for i in 0..10 {
            assert!(r.get(i, i) >= 0.0, "R diagonal not sign-normalized");
            for j in 0..i {
                assert_eq!(r.get(i, j), 0.0, "R not upper triangular");
            }
        }
    }

    #[test]
    fn q_has_unit_determinant_magnitude() {
        let mut rng = Rng::new(99);
        for _ in 0..5 {
            let m = gaussian_matrix(8, 8, 0.0, 1.0, &mut rng).unwrap();
            let (q, _) = qr_householder(&m).unwrap();
            let d = det_lu(&q);
            assert!(
                (d.abs() - 1.0).abs() < 1e-9,
                "|det Q| = {} should be 1",
                d.abs()
            );
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            qr_householder(&Matrix::zeros(2, 3)),
            Err(crate::Error::Contract(_))
        ));
    }
}
