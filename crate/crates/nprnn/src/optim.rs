//! Training machinery: SGD with global-norm gradient clipping, RMSprop,
//! and stepwise learning-rate cooling.

use crate::error::{Error, Result};
use crate::net::{Gradients, RnnParams};

pub const DEFAULT_RMS_DECAY: f64 = 0.9;
pub const DEFAULT_RMS_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptKind {
    Sgd,
    RmsProp,
}

impl OptKind {
    pub fn tag(self) -> &'static str {
        match self {
            OptKind::Sgd => "sgd",
            OptKind::RmsProp => "rmsprop",
        }
    }

    pub fn from_tag(tag: &str) -> Result<OptKind> {
        match tag {
            "sgd" => Ok(OptKind::Sgd),
            "rmsprop" => Ok(OptKind::RmsProp),
            other => Err(Error::Parse(format!("unknown optimizer `{other}`"))),
        }
    }
}

/// Optimizer state: the algorithm choice, base learning rate, optional
/// global-norm clip ceiling, and the RMSprop accumulators when applicable.
#[derive(Debug, Clone)]
pub struct Optimizer {
    pub kind: OptKind,
    pub lr0: f64,
    pub clip: Option<f64>,
    pub rms_decay: f64,
    pub rms_eps: f64,
    rms_cache: Option<Gradients>,
}

impl Optimizer {
    pub fn new(
        kind: OptKind,
        lr0: f64,
        clip: Option<f64>,
        rms_decay: f64,
        rms_eps: f64,
    ) -> Result<Optimizer> {
        if !(lr0 > 0.0) {
            return Err(Error::contract(format!("lr0 must be positive, got {lr0}")));
        }
        if let Some(c) = clip {
            if !(c > 0.0) {
                return Err(Error::contract(format!(
                    "clip ceiling must be positive, got {c}"
                )));
            }
        }
        if !(rms_decay > 0.0 && rms_decay < 1.0) {
            return Err(Error::contract(format!(
                "rms_decay must lie in (0, 1), got {rms_decay}"
            )));
        }
        Ok(Optimizer {
            kind,
            lr0,
            clip,
            rms_decay,
            rms_eps,
            rms_cache: None,
        })
    }

    pub fn sgd(lr0: f64, clip: Option<f64>) -> Result<Optimizer> {
        Optimizer::new(OptKind::Sgd, lr0, clip, DEFAULT_RMS_DECAY, DEFAULT_RMS_EPS)
    }

    pub fn rmsprop(lr0: f64, clip: Option<f64>) -> Result<Optimizer> {
        Optimizer::new(
            OptKind::RmsProp,
            lr0,
            clip,
            DEFAULT_RMS_DECAY,
            DEFAULT_RMS_EPS,
        )
    }

    /// Clips (when configured) and applies one update at learning rate `lr`.
    /// Returns the pre-clip global gradient norm.
    pub fn step(&mut self, params: &mut RnnParams, g: Gradients, lr: f64) -> f64 {
        let norm = g.squared_norm().sqrt();
        let g = match self.clip {
            Some(ceiling) => clip_gradients(g, ceiling),
            None => g,
        };
        match self.kind {
            OptKind::Sgd => sgd_step(params, &g, lr),
            OptKind::RmsProp => {
                if self.rms_cache.is_none() {
                    self.rms_cache = Some(Gradients::zeros_like(params));
                }
                rmsprop_step(
                    params,
                    &g,
                    self.rms_cache.as_mut().unwrap(),
                    lr,
                    self.rms_decay,
                    self.rms_eps,
                );
            }
        }
        norm
    }
}

/// Global-norm clipping: if the L2 norm over all five arrays exceeds
/// `ceiling`, rescale uniformly down to it; otherwise pass through.
pub fn clip_gradients(mut g: Gradients, ceiling: f64) -> Gradients {
    assert!(ceiling > 0.0, "clip ceiling must be positive");
    let norm = g.squared_norm().sqrt();
    if norm > ceiling {
        g.scale(ceiling / norm);
    }
    g
}

/// Plain gradient descent: `θ ← θ − lr · g`.
pub fn sgd_step(params: &mut RnnParams, g: &Gradients, lr: f64) {
    let pairs = [
        (params.w_hx.data_mut(), g.w_hx.data()),
        (params.w_hh.data_mut(), g.w_hh.data()),
        (params.w_yh.data_mut(), g.w_yh.data()),
    ];
    for (p, gv) in pairs {
        for (pi, &gi) in p.iter_mut().zip(gv) {
            *pi -= lr * gi;
        }
    }
    for (pi, &gi) in params.b_h.iter_mut().zip(&g.b_h) {
        *pi -= lr * gi;
    }
    for (pi, &gi) in params.b_y.iter_mut().zip(&g.b_y) {
        *pi -= lr * gi;
    }
}

/// RMSprop: `cache ← decay·cache + (1−decay)·g²`, then
/// `θ ← θ − lr · g / (√cache + eps)` elementwise.
pub fn rmsprop_step(
    params: &mut RnnParams,
    g: &Gradients,
    cache: &mut Gradients,
    lr: f64,
    decay: f64,
    eps: f64,
) {
    fn update(p: &mut [f64], g: &[f64], cache: &mut [f64], lr: f64, decay: f64, eps: f64) {
        for ((pi, &gi), ci) in p.iter_mut().zip(g).zip(cache.iter_mut()) {
            *ci = decay * *ci + (1.0 - decay) * gi * gi;
            *pi -= lr * gi / (ci.sqrt() + eps);
        }
    }
    update(
        params.w_hx.data_mut(),
        g.w_hx.data(),
        cache.w_hx.data_mut(),
        lr,
        decay,
        eps,
    );
    update(
        params.w_hh.data_mut(),
        g.w_hh.data(),
        cache.w_hh.data_mut(),
        lr,
        decay,
        eps,
    );
    update(
        params.w_yh.data_mut(),
        g.w_yh.data(),
        cache.w_yh.data_mut(),
        lr,
        decay,
        eps,
    );
    update(&mut params.b_h, &g.b_h, &mut cache.b_h, lr, decay, eps);
    update(&mut params.b_y, &g.b_y, &mut cache.b_y, lr, decay, eps);
}

/// Stepwise learning-rate schedule: at each `(epoch, divisor)` cooling
/// point the rate drops by that divisor for the rest of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct LrSchedule {
    pub total_epochs: usize,
    pub cooling_points: Vec<(usize, f64)>,
}

impl LrSchedule {
    pub fn new(total_epochs: usize, cooling_points: Vec<(usize, f64)>) -> Result<LrSchedule> {
        if total_epochs == 0 {
            return Err(Error::contract("schedule requires total_epochs >= 1"));
        }
        for w in cooling_points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::contract(
                    "cooling points must be strictly increasing in epoch",
                ));
            }
        }
        for &(_, d) in &cooling_points {
            if !(d > 1.0) {
                return Err(Error::contract(format!(
                    "cooling divisors must exceed 1, got {d}"
                )));
            }
        }
        Ok(LrSchedule {
            total_epochs,
            cooling_points,
        })
    }

    pub fn constant(total_epochs: usize) -> Result<LrSchedule> {
        LrSchedule::new(total_epochs, Vec::new())
    }

    /// "Cooled twice by a factor of 10 in equal intervals": divisor-10
    /// drops at ⌊E/3⌋ and ⌊2E/3⌋.
    pub fn cooled_twice(total_epochs: usize) -> Result<LrSchedule> {
        let first = total_epochs / 3;
        let second = 2 * total_epochs / 3;
        if first == 0 || second <= first {
            return Err(Error::contract(format!(
                "{total_epochs} epochs is too short to cool twice"
            )));
        }
        LrSchedule::new(total_epochs, vec![(first, 10.0), (second, 10.0)])
    }
}

/// Learning rate in effect at `epoch`: `lr0` divided by the product of the
/// divisors whose cooling epoch is ≤ `epoch`.
pub fn lr_at(schedule: &LrSchedule, lr0: f64, epoch: usize) -> Result<f64> {
    if epoch >= schedule.total_epochs {
        return Err(Error::contract(format!(
            "epoch {epoch} out of range for a {}-epoch schedule",
            schedule.total_epochs
        )));
    }
    let mut lr = lr0;
    for &(at, divisor) in &schedule.cooling_points {
        if at <= epoch {
            lr /= divisor;
        }
    }
    Ok(lr)
}
