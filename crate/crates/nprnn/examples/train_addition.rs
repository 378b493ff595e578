//! Desk-size addition benchmark: train the normalized positive-definite
//! initialization against the raw-Gaussian one on the same short-horizon
//! data and compare. A few seconds per run; the configs under `configs/`
//! hold the full-length versions.

use nprnn::harness::{train, ExperimentConfig};
use nprnn::init::InitScheme;
use nprnn::optim::OptKind;
use nprnn::tasks::Task;

fn run(label: &str, scheme: InitScheme) -> Result<(), nprnn::Error> {
    let config = ExperimentConfig {
        task: Task::Addition,
        t_len: 30,
        n_train: 6_000,
        n_test: 600,
        scheme,
        hidden: 100,
        optimizer: OptKind::Sgd,
        lr0: 1e-3,
        clip: Some(10.0),
        rms_decay: 0.9,
        rms_eps: 1e-8,
        cooling: vec![],
        batch_size: 1,
        epochs: 5,
        eval_every: 1,
        seed: 7,
        downscale: 1,
        output_dir: std::env::temp_dir().join(format!("nprnn-example-addition-{label}")),
    };
    println!("== {label} ==");
    let out = train(&config)?;
    for row in &out.metrics {
        println!(
            "epoch {}  test MSE {:.5}  accuracy (|err| < 0.04) {:.3}",
            row.epoch, row.test_loss, row.test_accuracy
        );
    }
    println!();
    Ok(())
}

fn main() -> Result<(), nprnn::Error> {
    run("np", InitScheme::np())?;
    run("grnn", InitScheme::grnn())?;
    Ok(())
}
