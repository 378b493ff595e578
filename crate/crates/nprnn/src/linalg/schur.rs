//! Eigenvalues of general (possibly non-symmetric) real matrices:
//! Householder reduction to upper Hessenberg form followed by the
//! double-shift QR iteration on the real Schur form.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A complex number, as much of one as eigenvalue reporting needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Householder similarity reduction to upper Hessenberg form.
pub fn hessenberg(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::contract(format!(
            "hessenberg requires a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<f64> = (k + 1..n).map(|i| h.get(i, k)).collect();
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

        // left: rows k+1..n of columns k..n
        for j in k..n {
            let mut c = 0.0;
            for (idx, i) in (k + 1..n).enumerate() {
                c += v[idx] * h.get(i, j);
            }
            c *= beta;
            for (idx, i) in (k + 1..n).enumerate() {
                h.set(i, j, h.get(i, j) - c * v[idx]);
            }
        }
        // right: columns k+1..n of all rows
        for i in 0..n {
            let mut c = 0.0;
            for (idx, j) in (k + 1..n).enumerate() {
                c += h.get(i, j) * v[idx];
            }
            c *= beta;
            for (idx, j) in (k + 1..n).enumerate() {
                h.set(i, j, h.get(i, j) - c * v[idx]);
            }
        }
        h.set(k + 1, k, alpha);
        for i in k + 2..n {
            h.set(i, k, 0.0);
        }
    }
    Ok(h)
}

fn sign_of(magnitude: f64, sign_source: f64) -> f64 {
    if sign_source >= 0.0 {
        magnitude.abs()
    } else {
        -magnitude.abs()
    }
}

/// All eigenvalues of a general square matrix, as complex conjugate pairs
/// where applicable. `max_iter` bounds the total number of QR steps.
pub fn eigenvalues_general(m: &Matrix, max_iter: usize) -> Result<Vec<Complex>> {
    if !m.is_square() {
        return Err(Error::contract(format!(
            "eigenvalues_general requires a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Err(Error::contract("eigenvalues_general on empty matrix"));
    }
    let mut h = hessenberg(m)?;
    let mut out: Vec<Complex> = Vec::with_capacity(n);

    let mut anorm = 0.0_f64;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += h.get(i, j).abs();
        }
    }
    if anorm == 0.0 {
        return Ok(vec![Complex { re: 0.0, im: 0.0 }; n]);
    }

    let mut total_steps = 0usize;
    let mut exshift = 0.0_f64; // accumulated exceptional shifts
    let mut nn = n as isize - 1;

    let best_so_far = |out: &Vec<Complex>, h: &Matrix, nn: isize, exshift: f64| -> f64 {
        let mut best = out.iter().map(|c| c.magnitude()).fold(0.0_f64, f64::max);
        for i in 0..=nn.max(0) as usize {
            best = best.max((h.get(i, i) + exshift).abs());
        }
        best
    };

    while nn >= 0 {
        let mut its = 0usize;
        loop {
            let nnu = nn as usize;
            // look for a negligible subdiagonal element
            let mut l = nnu;
            while l >= 1 {
                let mut s = h.get(l - 1, l - 1).abs() + h.get(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if h.get(l, l - 1).abs() <= f64::EPSILON * s {
                    h.set(l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }

            let x = h.get(nnu, nnu);
            if l == nnu {
                // one real root
                out.push(Complex {
                    re: x + exshift,
                    im: 0.0,
                });
                nn -= 1;
                break;
            }
            let y = h.get(nnu - 1, nnu - 1);
            let w = h.get(nnu, nnu - 1) * h.get(nnu - 1, nnu);
            if l == nnu - 1 {
                // a 2x2 block has converged
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                let x = x + exshift;
                if q >= 0.0 {
                    let z = p + sign_of(z, p);
                    let first = x + z;
                    let second = if z != 0.0 { x - w / z } else { first };
                    out.push(Complex { re: first, im: 0.0 });
                    out.push(Complex {
                        re: second,
                        im: 0.0,
                    });
                } else {
                    out.push(Complex { re: x + p, im: z });
                    out.push(Complex { re: x + p, im: -z });
                }
                nn -= 2;
                break;
            }

            // no convergence yet: double-shift QR step on rows l..=nn
            if total_steps >= max_iter || its >= 30 {
                return Err(Error::NoConvergence {
                    best_estimate: best_so_far(&out, &h, nn, exshift),
                });
            }
            let (mut x, mut y, mut w) = (x, y, w);
            if its == 10 || its == 20 {
                // exceptional shift to break symmetry-induced stalls
                exshift += x;
                for i in 0..=nnu {
                    h.set(i, i, h.get(i, i) - x);
                }
                let s = h.get(nnu, nnu - 1).abs() + h.get(nnu - 1, nnu - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total_steps += 1;

            // find two consecutive small subdiagonals where the bulge can start
            let (mut p, mut q, mut r);
            let mut mm = nnu - 2;
            loop {
                let z = h.get(mm, mm);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h.get(mm + 1, mm) + h.get(mm, mm + 1);
                q = h.get(mm + 1, mm + 1) - z - rr - ss;
                r = h.get(mm + 2, mm + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if mm == l {
                    break;
                }
                let u = h.get(mm, mm - 1).abs() * (q.abs() + r.abs());
                let v = p.abs()
                    * (h.get(mm - 1, mm - 1).abs() + z.abs() + h.get(mm + 1, mm + 1).abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                mm -= 1;
            }
            for i in mm + 2..=nnu {
                h.set(i, i - 2, 0.0);
                if i != mm + 2 {
                    h.set(i, i - 3, 0.0);
                }
            }

            // bulge chase
            for k in mm..nnu {
                if k != mm {
                    p = h.get(k, k - 1);
                    q = h.get(k + 1, k - 1);
                    r = if k != nnu - 1 { h.get(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign_of((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == mm {
                    if l != mm {
                        h.set(k, k - 1, -h.get(k, k - 1));
                    }
                } else {
                    h.set(k, k - 1, -s * x);
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nnu {
                    let mut pj = h.get(k, j) + q * h.get(k + 1, j);
                    if k != nnu - 1 {
                        pj += r * h.get(k + 2, j);
                        h.set(k + 2, j, h.get(k + 2, j) - pj * z);
                    }
                    h.set(k + 1, j, h.get(k + 1, j) - pj * y);
                    h.set(k, j, h.get(k, j) - pj * x);
                }
                let mmin = nnu.min(k + 3);
                for i in l..=mmin {
                    let mut pi = x * h.get(i, k) + y * h.get(i, k + 1);
                    if k != nnu - 1 {
                        pi += z * h.get(i, k + 2);
                        h.set(i, k + 2, h.get(i, k + 2) - pi * r);
                    }
                    h.set(i, k + 1, h.get(i, k + 1) - pi * q);
                    h.set(i, k, h.get(i, k) - pi);
                }
            }
        }
    }
    Ok(out)
}

/// Largest eigenvalue magnitude of a general square matrix.
///
/// On iteration-budget exhaustion the error carries the best estimate seen.
/// `tol` is accepted for interface symmetry with the symmetric solver; the
/// deflation criterion itself works at machine precision, which is tighter
/// than any tolerance the callers use.
pub fn spectral_radius(m: &Matrix, _tol: f64, max_iter: usize) -> Result<f64> {
    let eigs = eigenvalues_general(m, max_iter)?;
    Ok(eigs
        .iter()
        .map(|c| c.magnitude())
        .fold(0.0_f64, f64::max))
}

/// Default QR-step budget used by callers that do not care to tune it.
pub fn default_max_iter(n: usize) -> usize {
    (10 * n * n).max(200)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh_symmetric, gaussian_matrix, Rng};

    fn sorted_magnitudes(eigs: &[Complex]) -> Vec<f64> {
        let mut m: Vec<f64> = eigs.iter().map(|c| c.magnitude()).collect();
        m.sort_by(|a, b| b.partial_cmp(a).unwrap());
        m
    }

    #[test]
    fn identity_spectral_radius_is_one() {
        let r = spectral_radius(&Matrix::identity(5), 1e-8, 1000).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_scaling_with_imaginary_spectrum() {
        // eigenvalues are +-2i
        let m = Matrix::from_rows(&[&[0.0, -2.0], &[2.0, 0.0]]);
        let eigs = eigenvalues_general(&m, 1000).unwrap();
        assert_eq!(eigs.len(), 2);
        assert!(eigs.iter().any(|c| c.im > 1.9));
        for c in &eigs {
            assert!(c.re.abs() < 1e-12);
            assert!((c.magnitude() - 2.0).abs() < 1e-10);
        }
        let r = spectral_radius(&m, 1e-8, 1000).unwrap();
        assert!((r - 2.0).abs() < 1e-10);
    }

    #[test]
    fn companion_matrix_known_roots() {
        // p(x) = (x - 1)(x + 0.5)(x^2 - 0.6x + 0.25)
        //      = x^4 - 1.1 x^3 + 0.05 x^2 + 0.175 x - 0.125
        // roots: 1, -0.5, 0.3 +- 0.4i  (magnitudes 1, 0.5, 0.5, 0.5)
        let m = Matrix::from_rows(&[
            &[1.1, -0.05, -0.175, 0.125],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        let eigs = eigenvalues_general(&m, 2000).unwrap();
        let mags = sorted_magnitudes(&eigs);
        assert!((mags[0] - 1.0).abs() < 1e-8, "mags {mags:?}");
        for &v in &mags[1..] {
            assert!((v - 0.5).abs() < 1e-8, "mags {mags:?}");
        }
        let pair = eigs.iter().find(|c| c.im.abs() > 1e-8).unwrap();
        assert!((pair.re - 0.3).abs() < 1e-8);
        assert!((pair.im.abs() - 0.4).abs() < 1e-8);
    }

    #[test]
    fn agrees_with_jacobi_on_symmetric_input() {
        let mut rng = Rng::new(31);
        for n in [2usize, 6, 20] {
            let g = gaussian_matrix(n, n, 0.0, 1.0, &mut rng).unwrap();
            let mut s = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    s.set(i, j, 0.5 * (g.get(i, j) + g.get(j, i)));
                }
            }
            let (vals, _) = eigh_symmetric(&s, 1e-10).unwrap();
            let jac_rho = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let qr_rho = spectral_radius(&s, 1e-8, default_max_iter(n)).unwrap();
            assert!(
                (jac_rho - qr_rho).abs() < 1e-8,
                "n={n}: jacobi {jac_rho} vs qr {qr_rho}"
            );

            let eigs = eigenvalues_general(&s, default_max_iter(n)).unwrap();
            let mut qr_vals: Vec<f64> = eigs.iter().map(|c| c.re).collect();
            qr_vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (a, b) in vals.iter().zip(&qr_vals) {
                assert!((a - b).abs() < 1e-8, "n={n}: {vals:?} vs {qr_vals:?}");
            }
        }
    }

    #[test]
    fn spectral_radius_bounded_by_max_row_sum() {
        let mut rng = Rng::new(8);
        for _ in 0..5 {
            let g = gaussian_matrix(10, 10, 0.0, 1.0, &mut rng).unwrap();
            let rho = spectral_radius(&g, 1e-8, default_max_iter(10)).unwrap();
            let row_sum_norm = (0..10)
                .map(|i| g.row(i).iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0_f64, f64::max);
            assert!(
                rho <= row_sum_norm + 1e-9,
                "rho {rho} exceeds induced-norm bound {row_sum_norm}"
            );
        }
    }

    #[test]
    fn upper_triangular_eigenvalues_are_diagonal() {
        let m = Matrix::from_rows(&[
            &[3.0, 1.0, 2.0],
            &[0.0, -1.5, 0.5],
            &[0.0, 0.0, 0.25],
        ]);
        let eigs = eigenvalues_general(&m, 1000).unwrap();
        let mags = sorted_magnitudes(&eigs);
        assert!((mags[0] - 3.0).abs() < 1e-10);
        assert!((mags[1] - 1.5).abs() < 1e-10);
        assert!((mags[2] - 0.25).abs() < 1e-10);
    }

    #[test]
    fn one_by_one_matrix() {
        let m = Matrix::from_rows(&[&[-4.25]]);
        let eigs = eigenvalues_general(&m, 10).unwrap();
        assert_eq!(eigs.len(), 1);
        assert_eq!(eigs[0].re, -4.25);
        assert_eq!(eigs[0].im, 0.0);
    }

    #[test]
    fn hessenberg_preserves_trace_and_shape() {
        let mut rng = Rng::new(55);
        let m = gaussian_matrix(12, 12, 0.0, 1.0, &mut rng).unwrap();
        let h = hessenberg(&m).unwrap();
        let tr_m: f64 = (0..12).map(|i| m.get(i, i)).sum();
        let tr_h: f64 = (0..12).map(|i| h.get(i, i)).sum();
        assert!((tr_m - tr_h).abs() < 1e-10, "similarity must keep trace");
        for i in 0..12usize {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(h.get(i, j), 0.0, "below-subdiagonal entry not zero");
            }
        }
    }
}
