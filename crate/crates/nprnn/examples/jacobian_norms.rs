//! Per-step Jacobian 2-norms of the input-free recurrence. The identity
//! initialization sits exactly at 1 (gradients neither grow nor decay), the
//! 0.01 variant crushes them, and the normalized positive-definite matrix
//! starts at 1 and stays bounded by it.

use nprnn::init::{identity_init, np_recurrent_init};
use nprnn::linalg::{Matrix, Rng};
use nprnn::net::{forward, jacobian_norms, Activation, InputSeq, OutputKind, RnnParams};

fn net_with(w_hh: Matrix) -> RnnParams {
    let m = w_hh.rows();
    RnnParams {
        w_hx: Matrix::zeros(m, 1),
        w_hh,
        w_yh: Matrix::zeros(1, m),
        b_h: vec![0.0; m],
        b_y: vec![0.0],
        activation: Activation::ReLU,
        output: OutputKind::Linear,
    }
}

fn main() -> Result<(), nprnn::Error> {
    let m = 100;
    let t_len = 20;
    let zeros = vec![0.0; t_len]; // zero input sequence
    let mut rng = Rng::new(11);
    let h0: Vec<f64> = (0..m).map(|_| 0.1 + 0.9 * rng.uniform()).collect();

    println!("spectral norm of diag(f'(s_t))·W_hh, zero input, positive h0\n");
    for (label, w) in [
        ("identity", identity_init(m, 1.0)?),
        ("0.01·identity", identity_init(m, 0.01)?),
        ("np", np_recurrent_init(m, &mut Rng::new(4))?),
    ] {
        let params = net_with(w);
        let trace = forward(&params, InputSeq::new(&zeros, 1), &h0)?;
        let norms = jacobian_norms(&params, &trace);
        let head: Vec<String> = norms.iter().take(6).map(|n| format!("{n:.6}")).collect();
        let max = norms.iter().fold(0.0_f64, |a, &b| a.max(b));
        println!("{label:<14} first steps: {}  max over {t_len}: {max:.6}", head.join(" "));
    }
    Ok(())
}
