//! The experiment runner: dataset preparation, the epoch loop, metrics and
//! checkpoint emission. One run is a pure function of its config — the
//! master seed fans out into fixed per-purpose streams (train data, test
//! data, weights, shuffling), batches reduce in sample order, and every
//! artifact except the wall-clock column is byte-reproducible.

use crate::error::{Error, Result};
use crate::harness::config::{mnist_dir, ExperimentConfig};
use crate::init::build_network;
use crate::linalg::Rng;
use crate::net::{
    backward_into, forward, loss, save_checkpoint, Gradients, InputSeq, LossKind, OutputKind,
    RnnParams, Target,
};
use crate::optim::{lr_at, Optimizer};
use crate::tasks::{
    gen_addition, gen_multiplication, is_correct, load_mnist_idx, sample_image, sequentialize,
    Task,
};
use rayon::prelude::*;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// A dataset lowered to what the net consumes: flat time-major input rows
/// plus a target per sample.
pub struct PreparedDataset {
    pub n_in: usize,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Target>,
}

impl PreparedDataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input(&self, i: usize) -> InputSeq<'_> {
        InputSeq::new(&self.inputs[i], self.n_in)
    }
}

/// One metrics line. `train_loss` is the running mean over the epoch's
/// optimizer steps; test columns come from a full pass over the test set.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_loss: f64,
    pub test_accuracy: f64,
    pub lr: f64,
    pub wall_seconds: f64,
    pub grad_norm_mean: f64,
}

pub const METRICS_HEADER: &str =
    "epoch,train_loss,test_loss,test_accuracy,lr,wall_seconds,grad_norm_mean";

impl MetricsRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.epoch,
            self.train_loss,
            self.test_loss,
            self.test_accuracy,
            self.lr,
            self.wall_seconds,
            self.grad_norm_mean
        )
    }
}

/// Where a run stopped early because the loss left the reals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbortInfo {
    pub epoch: usize,
    pub step: usize,
}

/// Everything a finished (or aborted) run leaves behind.
pub struct RunArtifacts {
    pub metrics: Vec<MetricsRow>,
    pub params: RnnParams,
    pub final_accuracy: f64,
    pub best_accuracy: f64,
    pub aborted: Option<AbortInfo>,
    pub metrics_path: PathBuf,
    pub checkpoint_path: PathBuf,
}

fn loss_kind_for(task: Task) -> (LossKind, OutputKind, usize) {
    match task {
        Task::Addition | Task::Multiplication => (LossKind::Mse, OutputKind::Linear, 1),
        Task::SequentialMnist => (LossKind::CrossEntropy, OutputKind::Softmax, 10),
    }
}

/// Builds the train/test pair for a config. Regression data is generated
/// from per-stream seeds; MNIST is loaded from the IDX directory, taking
/// the first `n_train`/`n_test` samples of each split and mean-pooling
/// when `downscale > 1`.
pub fn prepare_datasets(
    config: &ExperimentConfig,
    seed_train: u64,
    seed_test: u64,
) -> Result<(PreparedDataset, PreparedDataset)> {
    match config.task {
        Task::Addition | Task::Multiplication => {
            let gen = match config.task {
                Task::Addition => gen_addition,
                _ => gen_multiplication,
            };
            let train = gen(config.t_len, config.n_train, &mut Rng::new(seed_train))?;
            let test = gen(config.t_len, config.n_test, &mut Rng::new(seed_test))?;
            let lower = |samples: Vec<crate::tasks::RegressionSample>| PreparedDataset {
                n_in: 2,
                inputs: samples.iter().map(|s| s.input_rows()).collect(),
                targets: samples.iter().map(|s| Target::Scalar(s.target)).collect(),
            };
            Ok((lower(train), lower(test)))
        }
        Task::SequentialMnist => {
            let dir = mnist_dir();
            let train = load_mnist_split(&dir, "train", config.n_train, config.downscale)?;
            let test = load_mnist_split(&dir, "t10k", config.n_test, config.downscale)?;
            Ok((train, test))
        }
    }
}

/// First `n` samples of the MNIST test split, for checkpoint scoring.
pub fn load_mnist_test(n: usize, downscale: usize) -> Result<PreparedDataset> {
    load_mnist_split(&mnist_dir(), "t10k", n, downscale)
}

fn load_mnist_split(
    dir: &Path,
    split: &str,
    n: usize,
    downscale: usize,
) -> Result<PreparedDataset> {
    let images = dir.join(format!("{split}-images-idx3-ubyte"));
    let labels = dir.join(format!("{split}-labels-idx1-ubyte"));
    if !images.exists() || !labels.exists() {
        return Err(Error::Io(format!(
            "MNIST files not found under {} — run scripts/fetch-mnist.sh or set MNIST_DIR",
            dir.display()
        )));
    }
    let samples = load_mnist_idx(&images, &labels)?;
    if samples.len() < n {
        return Err(Error::contract(format!(
            "{split} split holds {} samples, requested {n}",
            samples.len()
        )));
    }
    let mut inputs = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for s in &samples[..n] {
        let seq = if downscale > 1 {
            sequentialize(&sample_image(s)?, downscale)?
        } else {
            s.pixels.clone()
        };
        inputs.push(seq);
        targets.push(Target::Label(s.label as usize));
    }
    Ok(PreparedDataset {
        n_in: 1,
        inputs,
        targets,
    })
}

/// Mean loss and accuracy of `params` over a prepared dataset. Regression
/// accuracy is the |error| < 0.04 criterion, classification accuracy is
/// top-1. Samples whose forward pass overflows count as incorrect with a
/// NaN loss contribution — a diverged net scores, it does not crash.
pub fn evaluate(params: &RnnParams, data: &PreparedDataset) -> Result<(f64, f64)> {
    let (rows, loss_sum, correct) = evaluate_rows(params, data)?;
    let _ = rows;
    Ok((loss_sum / data.len() as f64, correct as f64 / data.len() as f64))
}

/// Per-sample record behind `evaluate`; `prediction`/`target` hold the
/// scalar prediction for regression and the class indices for MNIST.
pub struct PredictionRow {
    pub prediction: f64,
    pub target: f64,
    pub correct: bool,
}

pub fn evaluate_rows(
    params: &RnnParams,
    data: &PreparedDataset,
) -> Result<(Vec<PredictionRow>, f64, usize)> {
    if data.is_empty() {
        return Err(Error::contract("evaluate on an empty dataset"));
    }
    let (kind, expected_output, _) = match data.targets[0] {
        Target::Scalar(_) => (LossKind::Mse, OutputKind::Linear, 1),
        Target::Label(_) => (LossKind::CrossEntropy, OutputKind::Softmax, 10),
    };
    if params.output != expected_output || params.n_in() != data.n_in {
        return Err(Error::contract(
            "checkpoint shape does not match the dataset",
        ));
    }
    let h0 = vec![0.0; params.hidden()];
    let per_sample: Vec<(f64, f64, f64, bool)> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let target = data.targets[i];
            match forward(params, data.input(i), &h0) {
                Ok(trace) => {
                    let l = loss(&trace, target, kind).unwrap_or(f64::NAN);
                    match target {
                        Target::Scalar(z) => {
                            let y = trace.prediction();
                            (l, y, z, is_correct(y, z))
                        }
                        Target::Label(z) => {
                            let y = trace.predicted_label();
                            (l, y as f64, z as f64, y == z)
                        }
                    }
                }
                Err(_) => {
                    let z = match target {
                        Target::Scalar(z) => z,
                        Target::Label(z) => z as f64,
                    };
                    (f64::NAN, f64::NAN, z, false)
                }
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(per_sample.len());
    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    for (l, prediction, target, ok) in per_sample {
        loss_sum += l;
        correct += ok as usize;
        rows.push(PredictionRow {
            prediction,
            target,
            correct: ok,
        });
    }
    Ok((rows, loss_sum, correct))
}

/// Runs one experiment end to end and writes `metrics.csv`,
/// `checkpoint.bin` (plus one checkpoint per cooling point),
/// `predictions.csv`, and `run.meta` into the config's output directory.
///
/// A non-finite training loss aborts the run with a diagnostic metrics row
/// and a populated `aborted` field — exploding gradients are an outcome,
/// not a crash.
pub fn train(config: &ExperimentConfig) -> Result<RunArtifacts> {
    config.validate()?;
    let start = Instant::now();

    // fixed fan-out of the master seed
    let mut master = Rng::new(config.seed);
    let seed_train = master.next_u64();
    let seed_test = master.next_u64();
    let seed_init = master.next_u64();
    let seed_shuffle = master.next_u64();

    let (train_data, test_data) = prepare_datasets(config, seed_train, seed_test)?;
    let (kind, output, c) = loss_kind_for(config.task);
    let mut params = build_network(
        config.scheme,
        train_data.n_in,
        config.hidden,
        c,
        output,
        &mut Rng::new(seed_init),
    )?;
    let mut optimizer = Optimizer::new(
        config.optimizer,
        config.lr0,
        config.clip,
        config.rms_decay,
        config.rms_eps,
    )?;
    let schedule = config.schedule()?;
    let mut shuffle_rng = Rng::new(seed_shuffle);
    let h0 = vec![0.0; config.hidden];

    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| Error::io(&config.output_dir, e))?;
    let metrics_path = config.output_dir.join("metrics.csv");
    let checkpoint_path = config.output_dir.join("checkpoint.bin");

    let mut metrics: Vec<MetricsRow> = Vec::new();
    let mut aborted = None;
    let mut indices: Vec<usize> = (0..train_data.len()).collect();

    'epochs: for epoch in 0..config.epochs {
        let lr = lr_at(&schedule, config.lr0, epoch)?;
        if config.cooling.iter().any(|&(e, _)| e == epoch) {
            // phase boundary: snapshot so later phases can resume from here
            save_checkpoint(&params, &config.output_dir.join(format!("checkpoint_epoch{epoch}.bin")))?;
        }
        shuffle_rng.shuffle(&mut indices);

        let mut epoch_loss = 0.0;
        let mut epoch_norm = 0.0;
        let mut steps = 0usize;
        for (step, batch) in indices.chunks(config.batch_size).enumerate() {
            let (batch_loss, grads) = batch_gradient(&params, &train_data, batch, kind, &h0);
            let scale = 1.0 / batch.len() as f64;
            let mut grads = grads;
            grads.scale(scale);
            let batch_loss = batch_loss * scale;
            if !batch_loss.is_finite() || !grads.all_finite() {
                // diagnostic row, then stop: divergence is recorded evidence
                aborted = Some(AbortInfo { epoch, step });
                let (test_loss, test_accuracy) =
                    evaluate(&params, &test_data).unwrap_or((f64::NAN, 0.0));
                metrics.push(MetricsRow {
                    epoch,
                    train_loss: f64::NAN,
                    test_loss,
                    test_accuracy,
                    lr,
                    wall_seconds: start.elapsed().as_secs_f64(),
                    grad_norm_mean: f64::NAN,
                });
                break 'epochs;
            }
            epoch_loss += batch_loss;
            epoch_norm += optimizer.step(&mut params, grads, lr);
            steps += 1;
        }

        let last = epoch + 1 == config.epochs;
        if epoch % config.eval_every == 0 || last {
            let (test_loss, test_accuracy) = evaluate(&params, &test_data)?;
            metrics.push(MetricsRow {
                epoch,
                train_loss: epoch_loss / steps as f64,
                test_loss,
                test_accuracy,
                lr,
                wall_seconds: start.elapsed().as_secs_f64(),
                grad_norm_mean: epoch_norm / steps as f64,
            });
        }
    }

    save_checkpoint(&params, &checkpoint_path)?;
    write_metrics(&metrics, &metrics_path)?;

    // final evaluation drives the predictions export
    let (rows, _, correct) = evaluate_rows(&params, &test_data)
        .map(|(r, l, c2)| (r, l, c2))
        .unwrap_or_else(|_| (Vec::new(), f64::NAN, 0));
    let predictions_path = config.output_dir.join("predictions.csv");
    write_predictions(&rows, &predictions_path)?;
    let final_accuracy = if rows.is_empty() {
        metrics.last().map(|r| r.test_accuracy).unwrap_or(0.0)
    } else {
        correct as f64 / rows.len() as f64
    };
    let best_accuracy = metrics
        .iter()
        .map(|r| r.test_accuracy)
        .fold(0.0_f64, f64::max);

    write_metadata(config, &metrics, aborted, final_accuracy, best_accuracy, seed_train, seed_test, seed_init, seed_shuffle)?;

    Ok(RunArtifacts {
        metrics,
        params,
        final_accuracy,
        best_accuracy,
        aborted,
        metrics_path,
        checkpoint_path,
    })
}

/// Summed (not yet averaged) loss and gradient over one batch. Two or more
/// samples fan out across threads; the reduction always sums in sample
/// order, so batch results are independent of scheduling.
fn batch_gradient(
    params: &RnnParams,
    data: &PreparedDataset,
    batch: &[usize],
    kind: LossKind,
    h0: &[f64],
) -> (f64, Gradients) {
    let sample = |i: usize| -> (f64, Option<Gradients>) {
        match forward(params, data.input(i), h0) {
            Ok(trace) => {
                let l = loss(&trace, data.targets[i], kind).unwrap_or(f64::NAN);
                if !l.is_finite() {
                    return (f64::NAN, None);
                }
                let mut g = Gradients::zeros_like(params);
                match backward_into(params, &trace, data.targets[i], kind, &mut g) {
                    Ok(()) => (l, Some(g)),
                    Err(_) => (f64::NAN, None),
                }
            }
            Err(_) => (f64::NAN, None),
        }
    };

    let per_sample: Vec<(f64, Option<Gradients>)> = if batch.len() >= 2 {
        batch.par_iter().map(|&i| sample(i)).collect()
    } else {
        batch.iter().map(|&i| sample(i)).collect()
    };

    let mut total = Gradients::zeros_like(params);
    let mut loss_sum = 0.0;
    for (l, g) in per_sample {
        loss_sum += l;
        match g {
            Some(g) => total.add_assign(&g),
            None => return (f64::NAN, total),
        }
    }
    (loss_sum, total)
}

fn write_metrics(metrics: &[MetricsRow], path: &Path) -> Result<()> {
    let mut text = String::from(METRICS_HEADER);
    text.push('\n');
    for row in metrics {
        text.push_str(&row.csv_line());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_predictions(rows: &[PredictionRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(w, "index,prediction,target,correct")?;
        for (i, r) in rows.iter().enumerate() {
            writeln!(
                w,
                "{i},{},{},{}",
                r.prediction,
                r.target,
                if r.correct { 1 } else { 0 }
            )?;
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

#[allow(clippy::too_many_arguments)]
fn write_metadata(
    config: &ExperimentConfig,
    metrics: &[MetricsRow],
    aborted: Option<AbortInfo>,
    final_accuracy: f64,
    best_accuracy: f64,
    seed_train: u64,
    seed_test: u64,
    seed_init: u64,
    seed_shuffle: u64,
) -> Result<()> {
    let path = config.output_dir.join("run.meta");
    let mut text = String::new();
    text.push_str("# resolved experiment configuration\n");
    text.push_str(&config.render());
    text.push_str("# provenance\n");
    text.push_str(&format!("library_version = {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str("prng = xoshiro256++ seeded via splitmix64\n");
    text.push_str("gaussian_sampler = box-muller with one cached draw\n");
    text.push_str("pixel_normalization = divide by 255\n");
    text.push_str(&format!("seed_train_data = {seed_train}\n"));
    text.push_str(&format!("seed_test_data = {seed_test}\n"));
    text.push_str(&format!("seed_weights = {seed_init}\n"));
    text.push_str(&format!("seed_shuffle = {seed_shuffle}\n"));
    if config.task == Task::SequentialMnist {
        text.push_str(&format!("mnist_dir = {}\n", mnist_dir().display()));
    }
    text.push_str("# outcome\n");
    text.push_str(&format!("epochs_recorded = {}\n", metrics.len()));
    text.push_str(&format!("final_test_accuracy = {final_accuracy}\n"));
    text.push_str(&format!("best_test_accuracy = {best_accuracy}\n"));
    match aborted {
        Some(a) => text.push_str(&format!(
            "aborted = non-finite loss at epoch {} step {}\n",
            a.epoch, a.step
        )),
        None => text.push_str("aborted = no\n"),
    }
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}
