//! Batched finite-difference audit of the BPTT implementation: small random
//! nets in all four activation/loss pairings, checked coordinate by
//! coordinate against central differences.

use crate::error::Result;
use crate::init::{gaussian_recurrent_init, input_weight_init, output_weight_init};
use crate::linalg::Rng;
use crate::net::{
    forward, grad_check, Activation, InputSeq, LossKind, OutputKind, RnnParams, Target,
};

const HIDDEN: usize = 8;
const N_IN: usize = 2;
const T_LEN: usize = 12;
const CLASSES: usize = 4;
const EPS: f64 = 1e-5;
/// ReLU draws with any |s_t| below this margin are re-drawn: a central
/// difference of width EPS must not step across a kink.
const KINK_MARGIN: f64 = 1e-4;

/// One line of the oracle report.
#[derive(Debug, Clone)]
pub struct OracleLine {
    pub label: &'static str,
    pub worst_rel_error: f64,
    pub tolerance: f64,
    pub nets: usize,
}

impl OracleLine {
    pub fn passed(&self) -> bool {
        self.worst_rel_error < self.tolerance
    }
}

fn draw_net(
    activation: Activation,
    output: OutputKind,
    c: usize,
    rng: &mut Rng,
) -> Result<RnnParams> {
    Ok(RnnParams {
        w_hx: input_weight_init(HIDDEN, N_IN, rng)?,
        w_hh: gaussian_recurrent_init(HIDDEN, rng)?,
        w_yh: output_weight_init(c, HIDDEN, rng)?,
        b_h: (0..HIDDEN).map(|_| 0.1 * rng.normal()).collect(),
        b_y: (0..c).map(|_| 0.1 * rng.normal()).collect(),
        activation,
        output,
    })
}

/// Runs `nets_per_config` accepted draws for each of the four
/// configurations and reports the worst relative error per configuration.
/// Smooth (tanh) configurations are held to 1e-6, ReLU ones to 1e-5, with
/// ReLU draws resampled while any pre-activation sits within the kink
/// margin.
pub fn gradient_oracle(seed: u64, nets_per_config: usize) -> Result<Vec<OracleLine>> {
    let mut rng = Rng::new(seed);
    let configs: [(&'static str, Activation, OutputKind, LossKind, f64); 4] = [
        (
            "relu+mse",
            Activation::ReLU,
            OutputKind::Linear,
            LossKind::Mse,
            1e-5,
        ),
        (
            "tanh+mse",
            Activation::Tanh,
            OutputKind::Linear,
            LossKind::Mse,
            1e-6,
        ),
        (
            "relu+crossentropy",
            Activation::ReLU,
            OutputKind::Softmax,
            LossKind::CrossEntropy,
            1e-5,
        ),
        (
            "tanh+crossentropy",
            Activation::Tanh,
            OutputKind::Softmax,
            LossKind::CrossEntropy,
            1e-6,
        ),
    ];

    let mut report = Vec::with_capacity(configs.len());
    for (label, activation, output, kind, tolerance) in configs {
        let c = if output == OutputKind::Softmax {
            CLASSES
        } else {
            1
        };
        let mut worst = 0.0_f64;
        let mut accepted = 0usize;
        let mut attempts = 0usize;
        while accepted < nets_per_config {
            attempts += 1;
            assert!(
                attempts < nets_per_config * 200,
                "kink-margin resampling failed to accept enough draws"
            );
            let params = draw_net(activation, output, c, &mut rng)?;
            let x: Vec<f64> = (0..T_LEN * N_IN).map(|_| rng.uniform()).collect();
            let target = match output {
                OutputKind::Linear => Target::Scalar(2.0 * rng.uniform()),
                OutputKind::Softmax => Target::Label(rng.uniform_usize(c)),
            };
            if activation == Activation::ReLU {
                let h0 = vec![0.0; HIDDEN];
                let trace = forward(&params, InputSeq::new(&x, N_IN), &h0)?;
                let near_kink = (1..=T_LEN)
                    .any(|t| trace.pre_act_at(t).iter().any(|s| s.abs() < KINK_MARGIN));
                if near_kink {
                    continue;
                }
            }
            let err = grad_check(&params, InputSeq::new(&x, N_IN), target, kind, EPS)?;
            worst = worst.max(err);
            accepted += 1;
        }
        report.push(OracleLine {
            label,
            worst_rel_error: worst,
            tolerance,
            nets: accepted,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_passes_on_a_handful_of_nets() {
        let report = gradient_oracle(3, 3).unwrap();
        assert_eq!(report.len(), 4);
        for line in &report {
            assert!(
                line.passed(),
                "{}: {} over tolerance {}",
                line.label,
                line.worst_rel_error,
                line.tolerance
            );
        }
    }
}
