//! Minimal dense linear algebra: matrix arithmetic, a seeded deterministic
//! RNG, symmetric eigendecomposition, Householder QR, and general spectral
//! radius. Everything is plain `f64`, row-major, and pure — callers own the
//! RNG state and pass it explicitly.

mod jacobi;
mod matrix;
mod qr;
mod rng;
mod schur;

pub use jacobi::eigh_symmetric;
pub use matrix::{axpy, dot, norm2, Matrix};
pub use qr::qr_householder;
pub use rng::Rng;
pub use schur::{default_max_iter, eigenvalues_general, hessenberg, spectral_radius, Complex};

use crate::error::{Error, Result};

/// Matrix with entries drawn i.i.d. from `Normal(mean, variance)` via
/// Box–Muller; a pure function of `(rows, cols, mean, variance, seed)`.
pub fn gaussian_matrix(
    rows: usize,
    cols: usize,
    mean: f64,
    variance: f64,
    rng: &mut Rng,
) -> Result<Matrix> {
    if variance <= 0.0 {
        return Err(Error::contract(format!(
            "gaussian_matrix requires positive variance, got {variance}"
        )));
    }
    let std = variance.sqrt();
    let mut m = Matrix::zeros(rows, cols);
    for v in m.data_mut() {
        *v = mean + std * rng.normal();
    }
    debug_assert!(m.all_finite());
    Ok(m)
}
