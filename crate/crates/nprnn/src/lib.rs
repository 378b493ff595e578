//! A small laboratory for simple recurrent networks (sRNN) and recurrent
//! weight initialization.
//!
//! The crate implements, from the ground up:
//!
//! - [`linalg`] — dense 64-bit matrices, a deterministic seeded RNG,
//!   symmetric eigendecomposition (cyclic Jacobi), Householder QR, and
//!   general eigenvalue magnitudes via Hessenberg + double-shift QR;
//! - [`init`] — eight recurrent weight initialization schemes, including
//!   the normalized positive-definite ("np") construction that pins the
//!   largest eigenvalue to one, plus the scaled Gaussian/Glorot
//!   non-recurrent initializers;
//! - [`net`] — the sRNN forward pass, MSE / cross-entropy losses, exact
//!   backpropagation through time, per-step Jacobian-norm diagnostics, and
//!   a finite-difference gradient oracle;
//! - [`dynamics`] — regime classification of recurrent spectra and
//!   autonomous hidden-state simulation;
//! - [`optim`] — SGD with global-norm gradient clipping, RMSprop, and
//!   stepwise learning-rate cooling;
//! - [`tasks`] — the addition and multiplication long-range benchmarks,
//!   an MNIST IDX loader with scanline serialization, and Monte Carlo
//!   baselines;
//! - [`harness`] — declarative experiment configs, the training loop,
//!   metrics/checkpoint emission, and the `nprnn` command-line front end.
//!
//! Every sampler and training run is a deterministic function of its seed.
//! See the `examples/` directory for one runnable program per capability.

pub mod dynamics;
mod error;
pub mod harness;
pub mod init;
pub mod linalg;
pub mod net;
pub mod optim;
pub mod tasks;

pub use error::{Error, Result};
