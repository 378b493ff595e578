//! The four autonomous regimes, watched directly: identity holds its state
//! forever, 0.01·I collapses to the origin, the normalized positive-definite
//! matrix relaxes onto its top eigendirection, and 1.5·I blows up.

use nprnn::dynamics::simulate_autonomous;
use nprnn::init::{identity_init, np_recurrent_init};
use nprnn::linalg::{Matrix, Rng};
use nprnn::net::Activation;

fn show(label: &str, w: &Matrix, h0: &[f64]) -> Result<(), nprnn::Error> {
    let record = simulate_autonomous(w, h0, 40, Activation::ReLU, 1e6, 1e-12)?;
    print!("{label:<14}");
    for t in [0usize, 1, 2, 5, 10, 20, 40] {
        match record.norms.get(t) {
            Some(n) => print!(" {n:>9.3e}"),
            None => print!(" {:>9}", "-"),
        }
    }
    match record.terminated_at {
        Some(term) => println!("   stopped at t={} ({:?})", term.step, term.kind),
        None => println!("   ran to completion"),
    }
    Ok(())
}

fn main() -> Result<(), nprnn::Error> {
    let n = 50;
    let mut rng = Rng::new(3);
    let h0: Vec<f64> = (0..n).map(|_| 0.2 + 0.8 * rng.uniform()).collect();

    print!("{:<14}", "weight");
    for t in [0, 1, 2, 5, 10, 20, 40] {
        print!(" {:>9}", format!("|h_{t}|"));
    }
    println!();

    show("identity", &identity_init(n, 1.0)?, &h0)?;
    show("0.01·identity", &identity_init(n, 0.01)?, &h0)?;
    show("np", &np_recurrent_init(n, &mut Rng::new(5))?, &h0)?;
    show("1.5·identity", &identity_init(n, 1.5)?, &h0)?;
    Ok(())
}
