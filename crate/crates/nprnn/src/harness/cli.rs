//! The `nprnn` command-line front end. Thin by design: every subcommand
//! parses flags, calls into the library, and prints.

use crate::dynamics::simulate_autonomous;
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::gradcheck::gradient_oracle;
use crate::harness::train::{evaluate, load_mnist_test, train, PreparedDataset};
use crate::init::{identity_init, spectrum_report, InitScheme, SchemeKind};
use crate::linalg::{Matrix, Rng};
use crate::net::{load_checkpoint, Activation, Target};
use crate::tasks::{export_regression_csv, gen_addition, gen_multiplication, Task};
use std::path::{Path, PathBuf};

const USAGE: &str = "\
usage: nprnn <subcommand> [flags]

subcommands:
  gen-data    --task addition|multiplication --t N --n N --seed S --out FILE
              write generated samples as CSV (T, mask positions, signal, target)
  train       --config FILE
              run an experiment described by a key = value config file
  eval        --checkpoint FILE --task NAME --n N [--t N] [--seed S] [--downscale K]
              score a checkpoint on a freshly drawn (or MNIST test) dataset
  spectrum    --scheme NAME --n N [--seed S] | --checkpoint FILE
              eigenvalue magnitudes, definiteness flags, and dynamical regime
  dynamics    --scheme NAME|--scale X --n N [--seed S] [--h0-seed S] [--steps N]
              [--activation relu|tanh] [--ceiling X] [--floor X] [--out FILE]
              autonomous trajectory CSV: step,norm,terminated
  grad-check  [--seed S] [--nets N]
              finite-difference audit of BPTT on random small nets
";

/// Runs the CLI against `args` (program name excluded). Returns the process
/// exit code: 0 on success, 1 on a failed check, 2 on usage errors.
pub fn run_cli(args: &[String]) -> i32 {
    match dispatch(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!();
            eprintln!("{USAGE}");
            2
        }
    }
}

fn dispatch(args: &[String]) -> Result<i32> {
    let Some(sub) = args.first() else {
        return Err(Error::Parse("missing subcommand".into()));
    };
    let flags = Flags::parse(&args[1..])?;
    match sub.as_str() {
        "gen-data" => gen_data(flags),
        "train" => cmd_train(flags),
        "eval" => cmd_eval(flags),
        "spectrum" => cmd_spectrum(flags),
        "dynamics" => cmd_dynamics(flags),
        "grad-check" => cmd_grad_check(flags),
        other => Err(Error::Parse(format!("unknown subcommand `{other}`"))),
    }
}

struct Flags {
    entries: Vec<(String, String)>,
}

impl Flags {
    fn parse(args: &[String]) -> Result<Flags> {
        let mut entries = Vec::new();
        let mut it = args.iter();
        while let Some(token) = it.next() {
            let key = token
                .strip_prefix("--")
                .ok_or_else(|| Error::Parse(format!("expected a --flag, got `{token}`")))?;
            let value = it
                .next()
                .ok_or_else(|| Error::Parse(format!("flag --{key} is missing its value")))?;
            entries.push((key.to_string(), value.to_string()));
        }
        Ok(Flags { entries })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Parse(format!("missing required flag --{key}")))
    }

    fn parse_num<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Parse(format!("bad value for --{key}: `{v}`"))),
        }
    }

    fn require_num<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.require(key)?;
        v.parse()
            .map_err(|_| Error::Parse(format!("bad value for --{key}: `{v}`")))
    }

    fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.entries {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Parse(format!("unknown flag --{k}")));
            }
        }
        Ok(())
    }
}

fn gen_data(flags: Flags) -> Result<i32> {
    flags.reject_unknown(&["task", "t", "n", "seed", "out"])?;
    let task = Task::from_tag(flags.require("task")?)?;
    let t_len: usize = flags.require_num("t")?;
    let n: usize = flags.require_num("n")?;
    let seed: u64 = flags.parse_num("seed", 1)?;
    let out = PathBuf::from(flags.require("out")?);
    let mut rng = Rng::new(seed);
    let samples = match task {
        Task::Addition => gen_addition(t_len, n, &mut rng)?,
        Task::Multiplication => gen_multiplication(t_len, n, &mut rng)?,
        Task::SequentialMnist => {
            return Err(Error::Parse(
                "gen-data draws synthetic tasks; MNIST comes from IDX files".into(),
            ))
        }
    };
    export_regression_csv(&samples, &out)?;
    println!(
        "wrote {n} {} samples (T = {t_len}, seed {seed}) to {}",
        task.tag(),
        out.display()
    );
    Ok(0)
}

fn cmd_train(flags: Flags) -> Result<i32> {
    flags.reject_unknown(&["config"])?;
    let path = PathBuf::from(flags.require("config")?);
    let config = ExperimentConfig::parse_file(&path)?;
    let out = train(&config)?;
    for row in &out.metrics {
        println!(
            "epoch {:>3}  train_loss {:.6}  test_loss {:.6}  test_acc {:.4}  lr {:e}",
            row.epoch, row.train_loss, row.test_loss, row.test_accuracy, row.lr
        );
    }
    match out.aborted {
        Some(a) => println!(
            "aborted: non-finite loss at epoch {} step {} (see run.meta)",
            a.epoch, a.step
        ),
        None => println!(
            "done: final accuracy {:.4}, best accuracy {:.4}",
            out.final_accuracy, out.best_accuracy
        ),
    }
    println!("artifacts in {}", config.output_dir.display());
    Ok(0)
}

fn cmd_eval(flags: Flags) -> Result<i32> {
    flags.reject_unknown(&["checkpoint", "task", "t", "n", "seed", "downscale"])?;
    let params = load_checkpoint(Path::new(flags.require("checkpoint")?))?;
    let task = Task::from_tag(flags.require("task")?)?;
    let n: usize = flags.require_num("n")?;
    let seed: u64 = flags.parse_num("seed", 1)?;
    let data = match task {
        Task::Addition | Task::Multiplication => {
            let t_len: usize = flags.require_num("t")?;
            let gen = match task {
                Task::Addition => gen_addition,
                _ => gen_multiplication,
            };
            let samples = gen(t_len, n, &mut Rng::new(seed))?;
            PreparedDataset {
                n_in: 2,
                inputs: samples.iter().map(|s| s.input_rows()).collect(),
                targets: samples.iter().map(|s| Target::Scalar(s.target)).collect(),
            }
        }
        Task::SequentialMnist => {
            let downscale: usize = flags.parse_num("downscale", 1)?;
            load_mnist_test(n, downscale)?
        }
    };
    let (loss, accuracy) = evaluate(&params, &data)?;
    println!("samples = {n}");
    println!("loss = {loss}");
    println!("accuracy = {accuracy}");
    Ok(0)
}

fn scheme_matrix(flags: &Flags) -> Result<(String, Matrix)> {
    if let Some(scale) = flags.get("scale") {
        let scale: f64 = scale
            .parse()
            .map_err(|_| Error::Parse(format!("bad value for --scale: `{scale}`")))?;
        let n: usize = flags.require_num("n")?;
        let w = identity_init(n, scale)?;
        return Ok((format!("scaled-identity:{scale}"), w));
    }
    let scheme = InitScheme::parse(flags.require("scheme")?)?;
    let n: usize = flags.require_num("n")?;
    let seed: u64 = flags.parse_num("seed", 1)?;
    let mut rng = Rng::new(seed);
    let w = match scheme.kind {
        SchemeKind::Identity => identity_init(n, 1.0)?,
        SchemeKind::ScaledIdentity(s) => identity_init(n, s)?,
        SchemeKind::NormalizedPositiveDefinite => crate::init::np_recurrent_init(n, &mut rng)?,
        SchemeKind::NormalizedGaussian => crate::init::normalized_gaussian_init(n, &mut rng)?,
        SchemeKind::Orthogonal => crate::init::orthogonal_init(n, &mut rng)?,
        SchemeKind::Gaussian | SchemeKind::PlainGaussian => {
            crate::init::gaussian_recurrent_init(n, &mut rng)?
        }
    };
    Ok((scheme.name(), w))
}

fn cmd_spectrum(flags: Flags) -> Result<i32> {
    flags.reject_unknown(&["scheme", "n", "seed", "scale", "checkpoint"])?;
    let (name, w) = if let Some(ck) = flags.get("checkpoint") {
        let params = load_checkpoint(Path::new(ck))?;
        (format!("checkpoint:{ck}"), params.w_hh)
    } else {
        scheme_matrix(&flags)?
    };
    let report = spectrum_report(&w)?;
    println!("source = {name}");
    println!("n = {}", w.rows());
    println!("max_eig = {}", report.max_eig);
    println!(
        "min_eig_magnitude = {}",
        report.eigenvalue_magnitudes.last().unwrap()
    );
    println!("is_symmetric = {}", report.is_symmetric);
    println!("is_positive_definite = {}", report.is_positive_definite);
    println!("regime = {}", report.regime.tag());
    let head: Vec<String> = report
        .eigenvalue_magnitudes
        .iter()
        .take(8)
        .map(|v| format!("{v:.6}"))
        .collect();
    println!("leading_magnitudes = {}", head.join(","));
    Ok(0)
}

fn cmd_dynamics(flags: Flags) -> Result<i32> {
    flags.reject_unknown(&[
        "scheme", "scale", "n", "seed", "h0-seed", "steps", "activation", "ceiling", "floor",
        "out",
    ])?;
    let (name, w) = scheme_matrix(&flags)?;
    let steps: usize = flags.parse_num("steps", 100)?;
    let ceiling: f64 = flags.parse_num("ceiling", 1e6)?;
    let floor: f64 = flags.parse_num("floor", 1e-12)?;
    let activation = match flags.get("activation") {
        None => Activation::ReLU,
        Some(tag) => Activation::from_tag(tag)?,
    };
    let h0_seed: u64 = flags.parse_num("h0-seed", 7)?;
    let mut h0_rng = Rng::new(h0_seed);
    let h0: Vec<f64> = (0..w.rows()).map(|_| h0_rng.uniform()).collect();

    let record = simulate_autonomous(&w, &h0, steps, activation, ceiling, floor)?;
    let mut csv = String::from("step,norm,terminated\n");
    for (t, norm) in record.norms.iter().enumerate() {
        let terminated = record
            .terminated_at
            .map(|term| term.step == t)
            .unwrap_or(false);
        csv.push_str(&format!("{t},{norm},{}\n", terminated as u8));
    }
    match flags.get("out") {
        Some(path) => {
            let path = PathBuf::from(path);
            std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
            eprintln!("wrote {} trajectory to {}", name, path.display());
        }
        None => print!("{csv}"),
    }
    Ok(0)
}

fn cmd_grad_check(flags: Flags) -> Result<i32> {
    flags.reject_unknown(&["seed", "nets"])?;
    let seed: u64 = flags.parse_num("seed", 3)?;
    let nets: usize = flags.parse_num("nets", 20)?;
    let report = gradient_oracle(seed, nets)?;
    let mut all_passed = true;
    for line in &report {
        println!(
            "{}: max relative error {:.3e} over {} nets (tolerance {:.0e}) -> {}",
            line.label,
            line.worst_rel_error,
            line.nets,
            line.tolerance,
            if line.passed() { "ok" } else { "FAIL" }
        );
        all_passed &= line.passed();
    }
    Ok(if all_passed { 0 } else { 1 })
}
