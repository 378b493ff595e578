//! Spectral fingerprints of all eight initialization schemes at n = 100:
//! eigenvalue range, symmetry/definiteness flags, and the dynamical regime
//! each spectrum implies for the autonomous hidden state.

use nprnn::init::{build_network, spectrum_report, InitScheme};
use nprnn::linalg::Rng;
use nprnn::net::OutputKind;

fn main() -> Result<(), nprnn::Error> {
    let n = 100;
    let schemes = [
        ("srnn", InitScheme::srnn()),
        ("irnn", InitScheme::irnn()),
        ("irnn-small", InitScheme::irnn_small()),
        ("nrnn", InitScheme::nrnn()),
        ("np", InitScheme::np()),
        ("np-tanh", InitScheme::np_tanh()),
        ("ornn", InitScheme::ornn()),
        ("grnn", InitScheme::grnn()),
    ];

    println!(
        "{:<12} {:>10} {:>10} {:>5} {:>4} {:<22}",
        "scheme", "max|eig|", "min|eig|", "sym", "pd", "regime"
    );
    for (alias, scheme) in schemes {
        let params = build_network(scheme, 2, n, 1, OutputKind::Linear, &mut Rng::new(7))?;
        let report = spectrum_report(&params.w_hh)?;
        println!(
            "{:<12} {:>10.6} {:>10.6} {:>5} {:>4} {:<22}",
            alias,
            report.max_eig,
            report.eigenvalue_magnitudes.last().unwrap(),
            if report.is_symmetric { "yes" } else { "no" },
            if report.is_positive_definite { "yes" } else { "no" },
            report.regime.tag()
        );
    }
    Ok(())
}
