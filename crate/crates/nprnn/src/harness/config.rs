//! Flat `key = value` experiment configuration.
//!
//! Recognized keys: `task`, `T`, `n_train`, `n_test`, `scheme`,
//! `activation`, `hidden`, `optimizer`, `lr0`, `clip`, `rms_decay`,
//! `rms_eps`, `cooling` (comma list of `epoch:divisor`), `batch_size`,
//! `epochs`, `eval_every`, `seed`, `downscale`, `output_dir`. Anything else
//! is an error. Lines starting with `#` and blank lines are skipped.

use crate::error::{Error, Result};
use crate::init::InitScheme;
use crate::net::Activation;
use crate::optim::{LrSchedule, OptKind, DEFAULT_RMS_DECAY, DEFAULT_RMS_EPS};
use crate::tasks::Task;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    /// Sequence length for the regression tasks; for sequential MNIST the
    /// horizon is `(28 / downscale)²` and this field is derived.
    pub t_len: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub scheme: InitScheme,
    pub hidden: usize,
    pub optimizer: OptKind,
    pub lr0: f64,
    pub clip: Option<f64>,
    pub rms_decay: f64,
    pub rms_eps: f64,
    /// `(epoch, divisor)` cooling points, strictly increasing.
    pub cooling: Vec<(usize, f64)>,
    pub batch_size: usize,
    pub epochs: usize,
    pub eval_every: usize,
    pub seed: u64,
    /// Mean-pool factor for MNIST (1 = off).
    pub downscale: usize,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn schedule(&self) -> Result<LrSchedule> {
        LrSchedule::new(self.epochs, self.cooling.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::contract("hidden must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::contract("batch_size must be >= 1"));
        }
        if self.epochs == 0 {
            return Err(Error::contract("epochs must be >= 1"));
        }
        if self.eval_every == 0 {
            return Err(Error::contract("eval_every must be >= 1"));
        }
        if self.n_train == 0 || self.n_test == 0 {
            return Err(Error::contract("n_train and n_test must be >= 1"));
        }
        match self.task {
            Task::Addition | Task::Multiplication => {
                if self.t_len < 2 {
                    return Err(Error::contract("regression tasks require T >= 2"));
                }
            }
            Task::SequentialMnist => {
                if self.downscale == 0 || 28 % self.downscale != 0 {
                    return Err(Error::contract(format!(
                        "downscale {} must divide 28",
                        self.downscale
                    )));
                }
            }
        }
        if !(self.lr0 > 0.0) {
            return Err(Error::contract("lr0 must be positive"));
        }
        self.schedule()?;
        Ok(())
    }

    /// Horizon the network actually sees.
    pub fn effective_t(&self) -> usize {
        match self.task {
            Task::SequentialMnist => {
                let side = 28 / self.downscale;
                side * side
            }
            _ => self.t_len,
        }
    }

    pub fn parse_str(text: &str, origin: &str) -> Result<ExperimentConfig> {
        let mut task = None;
        let mut t_len = None;
        let mut n_train = None;
        let mut n_test = None;
        let mut scheme: Option<InitScheme> = None;
        let mut activation: Option<Activation> = None;
        let mut hidden = 100usize;
        let mut optimizer = OptKind::Sgd;
        let mut lr0 = None;
        let mut clip = None;
        let mut rms_decay = DEFAULT_RMS_DECAY;
        let mut rms_eps = DEFAULT_RMS_EPS;
        let mut cooling = Vec::new();
        let mut batch_size = 1usize;
        let mut epochs = None;
        let mut eval_every = 1usize;
        let mut seed = 1u64;
        let mut downscale = 1usize;
        let mut output_dir = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("{origin}:{}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| {
                Error::Parse(format!(
                    "{origin}:{}: bad {what} `{value}`",
                    lineno + 1
                ))
            };
            match key {
                "task" => task = Some(Task::from_tag(value)?),
                "T" => t_len = Some(value.parse().map_err(|_| bad("T"))?),
                "n_train" => n_train = Some(value.parse().map_err(|_| bad("n_train"))?),
                "n_test" => n_test = Some(value.parse().map_err(|_| bad("n_test"))?),
                "scheme" => scheme = Some(InitScheme::parse(value)?),
                "activation" => activation = Some(Activation::from_tag(value)?),
                "hidden" => hidden = value.parse().map_err(|_| bad("hidden"))?,
                "optimizer" => optimizer = OptKind::from_tag(value)?,
                "lr0" => lr0 = Some(value.parse().map_err(|_| bad("lr0"))?),
                "clip" => clip = Some(value.parse().map_err(|_| bad("clip"))?),
                "rms_decay" => rms_decay = value.parse().map_err(|_| bad("rms_decay"))?,
                "rms_eps" => rms_eps = value.parse().map_err(|_| bad("rms_eps"))?,
                "cooling" => cooling = parse_cooling(value, origin, lineno + 1)?,
                "batch_size" => batch_size = value.parse().map_err(|_| bad("batch_size"))?,
                "epochs" => epochs = Some(value.parse().map_err(|_| bad("epochs"))?),
                "eval_every" => eval_every = value.parse().map_err(|_| bad("eval_every"))?,
                "seed" => seed = value.parse().map_err(|_| bad("seed"))?,
                "downscale" => downscale = value.parse().map_err(|_| bad("downscale"))?,
                "output_dir" => output_dir = Some(PathBuf::from(value)),
                other => {
                    return Err(Error::Parse(format!(
                        "{origin}:{}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }

        let task = task.ok_or_else(|| Error::Parse(format!("{origin}: missing `task`")))?;
        let mut scheme =
            scheme.ok_or_else(|| Error::Parse(format!("{origin}: missing `scheme`")))?;
        if let Some(act) = activation {
            scheme.activation = act;
        }
        let config = ExperimentConfig {
            task,
            t_len: match task {
                Task::SequentialMnist => {
                    let side = 28 / downscale.max(1);
                    side * side
                }
                _ => t_len
                    .ok_or_else(|| Error::Parse(format!("{origin}: missing `T`")))?,
            },
            n_train: n_train
                .ok_or_else(|| Error::Parse(format!("{origin}: missing `n_train`")))?,
            n_test: n_test
                .ok_or_else(|| Error::Parse(format!("{origin}: missing `n_test`")))?,
            scheme,
            hidden,
            optimizer,
            lr0: lr0.ok_or_else(|| Error::Parse(format!("{origin}: missing `lr0`")))?,
            clip,
            rms_decay,
            rms_eps,
            cooling,
            batch_size,
            epochs: epochs
                .ok_or_else(|| Error::Parse(format!("{origin}: missing `epochs`")))?,
            eval_every,
            seed,
            downscale,
            output_dir: output_dir.unwrap_or_else(|| PathBuf::from("runs/latest")),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn parse_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExperimentConfig::parse_str(&text, &path.display().to_string())
    }

    /// The config echoed back in the file format, every key explicit; used
    /// verbatim in run metadata.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("task", self.task.tag().to_string());
        push("T", self.t_len.to_string());
        push("n_train", self.n_train.to_string());
        push("n_test", self.n_test.to_string());
        push("scheme", self.scheme.name());
        push("activation", self.scheme.activation.tag().to_string());
        push("hidden", self.hidden.to_string());
        push("optimizer", self.optimizer.tag().to_string());
        push("lr0", self.lr0.to_string());
        if let Some(c) = self.clip {
            push("clip", c.to_string());
        }
        push("rms_decay", self.rms_decay.to_string());
        push("rms_eps", self.rms_eps.to_string());
        if !self.cooling.is_empty() {
            let cool: Vec<String> = self
                .cooling
                .iter()
                .map(|(e, d)| format!("{e}:{d}"))
                .collect();
            push("cooling", cool.join(","));
        }
        push("batch_size", self.batch_size.to_string());
        push("epochs", self.epochs.to_string());
        push("eval_every", self.eval_every.to_string());
        push("seed", self.seed.to_string());
        push("downscale", self.downscale.to_string());
        push("output_dir", self.output_dir.display().to_string());
        out
    }
}

fn parse_cooling(value: &str, origin: &str, lineno: usize) -> Result<Vec<(usize, f64)>> {
    let mut points = Vec::new();
    for item in value.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (e, d) = item.split_once(':').ok_or_else(|| {
            Error::Parse(format!(
                "{origin}:{lineno}: cooling entries look like `epoch:divisor`, got `{item}`"
            ))
        })?;
        let epoch = e.trim().parse().map_err(|_| {
            Error::Parse(format!("{origin}:{lineno}: bad cooling epoch `{e}`"))
        })?;
        let divisor = d.trim().parse().map_err(|_| {
            Error::Parse(format!("{origin}:{lineno}: bad cooling divisor `{d}`"))
        })?;
        points.push((epoch, divisor));
    }
    Ok(points)
}

/// MNIST IDX directory: `MNIST_DIR` env var when set, `data/mnist`
/// otherwise. Canonical filenames are assumed inside.
pub fn mnist_dir() -> PathBuf {
    std::env::var_os("MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data/mnist"))
}
