//! Monte Carlo baselines for the constant predictors, against their closed
//! forms. The always-predict-1 baseline on addition has MSE Var(X+Y) = 1/6;
//! the always-predict-0.25 baseline on multiplication has
//! E[(XY − 1/4)²] = 1/9 − 1/8 + 1/16 = 7/144.

use nprnn::linalg::Rng;
use nprnn::tasks::{baseline_mse, Task};

fn main() -> Result<(), nprnn::Error> {
    let n = 100_000;
    let add = baseline_mse(Task::Addition, 1.0, n, &mut Rng::new(11))?;
    let mul = baseline_mse(Task::Multiplication, 0.25, n, &mut Rng::new(13))?;
    println!("constant-1    on addition       ({n} samples): MSE {add:.5}  (closed form {:.5})", 1.0 / 6.0);
    println!("constant-0.25 on multiplication ({n} samples): MSE {mul:.5}  (closed form {:.5})", 7.0 / 144.0);
    Ok(())
}
