//! Finite-difference audit of the BPTT gradients: random 8-unit nets over
//! twelve timesteps, every activation/loss pairing, central differences per
//! coordinate.

use nprnn::harness::gradient_oracle;

fn main() -> Result<(), nprnn::Error> {
    let report = gradient_oracle(3, 10)?;
    for line in &report {
        println!(
            "{:<18} worst relative error {:.3e} across {} nets (tolerance {:.0e}) {}",
            line.label,
            line.worst_rel_error,
            line.nets,
            line.tolerance,
            if line.passed() { "ok" } else { "FAIL" }
        );
    }
    Ok(())
}
