//! Sequential MNIST at desk scale: 14×14 mean-pooled digits fed one pixel
//! at a time (T = 196), RMSprop, a small subset, one epoch. Needs the IDX
//! files — run `scripts/fetch-mnist.sh` first or point MNIST_DIR at them.

use nprnn::harness::{mnist_dir, train, ExperimentConfig};
use nprnn::init::InitScheme;
use nprnn::optim::OptKind;
use nprnn::tasks::Task;

fn main() -> Result<(), nprnn::Error> {
    let dir = mnist_dir();
    if !dir.join("train-images-idx3-ubyte").exists() {
        eprintln!(
            "MNIST IDX files not found under {} — run scripts/fetch-mnist.sh \
             or set MNIST_DIR, then retry",
            dir.display()
        );
        return Ok(());
    }
    let config = ExperimentConfig {
        task: Task::SequentialMnist,
        t_len: 196,
        n_train: 2_000,
        n_test: 500,
        scheme: InitScheme::np(),
        hidden: 100,
        optimizer: OptKind::RmsProp,
        lr0: 1e-4,
        clip: Some(10.0),
        rms_decay: 0.9,
        rms_eps: 1e-8,
        cooling: vec![],
        batch_size: 16,
        epochs: 2,
        eval_every: 1,
        seed: 7,
        downscale: 2,
        output_dir: std::env::temp_dir().join("nprnn-example-mnist"),
    };
    let out = train(&config)?;
    for row in &out.metrics {
        println!(
            "epoch {}  test cross-entropy {:.4}  top-1 accuracy {:.3} (chance 0.100)",
            row.epoch, row.test_loss, row.test_accuracy
        );
    }
    Ok(())
}
