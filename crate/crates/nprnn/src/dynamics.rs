//! Dynamical-systems view of the hidden state: classify a recurrent weight
//! spectrum into one of four regimes, simulate the input-free recurrence
//! `h_t = f(W h_{t-1})`, and map states into the eigenbasis of a symmetric
//! recurrent matrix.

use crate::error::{Error, Result};
use crate::linalg::{eigh_symmetric, norm2, Matrix};
use crate::net::Activation;

/// Qualitative behavior of the autonomous hidden-state system, read off the
/// eigenvalue magnitudes of the recurrent weight matrix.
///
/// - `NeutrallyStable`: every |λ| ≈ 1; every state is a fixed point, so the
///   dynamics neither decay nor explode and react strongly to input.
/// - `GlobalStableOrigin`: all |λ| < 1; everything contracts to zero.
/// - `StableManifold`: top |λ| ≈ 1 with the rest below one; trajectories
///   collapse onto the leading eigendirection instead of dying or blowing up.
/// - `Divergent`: some |λ| > 1; the input-free trajectory grows without
///   bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeClass {
    NeutrallyStable,
    GlobalStableOrigin,
    StableManifold,
    Divergent,
}

impl RegimeClass {
    pub fn tag(self) -> &'static str {
        match self {
            RegimeClass::NeutrallyStable => "neutrally-stable",
            RegimeClass::GlobalStableOrigin => "global-stable-origin",
            RegimeClass::StableManifold => "stable-manifold",
            RegimeClass::Divergent => "divergent",
        }
    }
}

/// Classifies a descending list of eigenvalue magnitudes.
///
/// Rules, with `tol` as the unit band half-width (default 1e-6):
/// divergent if `λ_max > 1 + tol`; neutrally stable if all magnitudes lie in
/// `[1 − tol, 1 + tol]`; stable manifold if `λ_max` is in the unit band while
/// some magnitude falls below it; global stable origin if `λ_max < 1 − tol`.
pub fn classify_regime(eigen_magnitudes: &[f64], tol: f64) -> Result<RegimeClass> {
    if eigen_magnitudes.is_empty() {
        return Err(Error::contract("classify_regime on empty spectrum"));
    }
    if tol <= 0.0 {
        return Err(Error::contract("classify_regime requires tol > 0"));
    }
    if eigen_magnitudes.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::contract(
            "classify_regime requires magnitudes sorted descending",
        ));
    }
    let top = eigen_magnitudes[0];
    let bottom = *eigen_magnitudes.last().unwrap();
    Ok(if top > 1.0 + tol {
        RegimeClass::Divergent
    } else if top < 1.0 - tol {
        RegimeClass::GlobalStableOrigin
    } else if bottom >= 1.0 - tol {
        RegimeClass::NeutrallyStable
    } else {
        RegimeClass::StableManifold
    })
}

/// Why a trajectory stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationKind {
    /// `‖h_t‖` exceeded the divergence ceiling.
    Diverged,
    /// `‖h_t‖` fell below the extinction floor.
    Extinguished,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Termination {
    pub step: usize,
    pub kind: TerminationKind,
}

/// Input-free trajectory: states (including `h_0`), their Euclidean norms,
/// and the early-termination record if one of the thresholds was crossed.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub states: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    pub terminated_at: Option<Termination>,
}

/// Iterates `h_t = f(W h_{t-1})` with zero input and zero bias for at most
/// `steps` steps, stopping early when the norm crosses `ceiling` (recorded
/// as divergence) or drops under `floor` (recorded as extinction).
/// Overflow is an outcome here, never an error.
pub fn simulate_autonomous(
    w: &Matrix,
    h0: &[f64],
    steps: usize,
    activation: Activation,
    ceiling: f64,
    floor: f64,
) -> Result<TrajectoryRecord> {
    if !w.is_square() || w.rows() != h0.len() {
        return Err(Error::contract(format!(
            "simulate_autonomous: {}x{} weight against state of length {}",
            w.rows(),
            w.cols(),
            h0.len()
        )));
    }
    if steps == 0 {
        return Err(Error::contract("simulate_autonomous requires steps >= 1"));
    }
    if !(ceiling > floor && floor > 0.0) {
        return Err(Error::contract(
            "simulate_autonomous requires ceiling > floor > 0",
        ));
    }

    let mut states = Vec::with_capacity(steps + 1);
    let mut norms = Vec::with_capacity(steps + 1);
    states.push(h0.to_vec());
    norms.push(norm2(h0));
    let mut terminated_at = None;

    let mut h = h0.to_vec();
    let mut next = vec![0.0; h.len()];
    for t in 1..=steps {
        w.matvec_into(&h, &mut next);
        for v in &mut next {
            *v = activation.apply(*v);
        }
        std::mem::swap(&mut h, &mut next);
        let n = norm2(&h);
        states.push(h.clone());
        norms.push(n);
        if !n.is_finite() || n > ceiling {
            terminated_at = Some(Termination {
                step: t,
                kind: TerminationKind::Diverged,
            });
            break;
        }
        if n < floor {
            terminated_at = Some(Termination {
                step: t,
                kind: TerminationKind::Extinguished,
            });
            break;
        }
    }

    Ok(TrajectoryRecord {
        states,
        norms,
        terminated_at,
    })
}

/// Coordinates of `h` in the eigenbasis of a symmetric `w`: returns `P^T h`
/// where the columns of `P` are the eigenvectors. Restricted to symmetric
/// input so the inverse is the transpose.
pub fn eigenbasis_transform(w: &Matrix, h: &[f64]) -> Result<Vec<f64>> {
    if !w.is_symmetric(1e-10) {
        return Err(Error::contract(
            "eigenbasis_transform requires a symmetric matrix",
        ));
    }
    if w.rows() != h.len() {
        return Err(Error::contract(format!(
            "eigenbasis_transform: {}x{} weight against state of length {}",
            w.rows(),
            w.cols(),
            h.len()
        )));
    }
    let (_, p) = eigh_symmetric(w, 1e-10)?;
    let mut out = vec![0.0; h.len()];
    p.tr_matvec_into(h, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Rng;

    #[test]
    fn regime_taxonomy_matches_the_four_cases() {
        let tol = 1e-6;
        assert_eq!(
            classify_regime(&[1.0, 1.0, 1.0], tol).unwrap(),
            RegimeClass::NeutrallyStable
        );
        assert_eq!(
            classify_regime(&[1.0, 0.7, 0.3], tol).unwrap(),
            RegimeClass::StableManifold
        );
        assert_eq!(
            classify_regime(&[1.2, 0.5], tol).unwrap(),
            RegimeClass::Divergent
        );
        assert_eq!(
            classify_regime(&[0.01, 0.01], tol).unwrap(),
            RegimeClass::GlobalStableOrigin
        );
    }

    #[test]
    fn regime_rejects_unsorted_and_empty() {
        assert!(matches!(
            classify_regime(&[0.5, 1.0], 1e-6),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            classify_regime(&[], 1e-6),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn identity_trajectory_is_exactly_constant() {
        let w = Matrix::identity(2);
        let rec =
            simulate_autonomous(&w, &[0.5, 0.3], 50, Activation::ReLU, 1e6, 1e-12).unwrap();
        assert!(rec.terminated_at.is_none());
        assert_eq!(rec.states.len(), 51);
        for s in &rec.states {
            assert_eq!(s, &vec![0.5, 0.3]);
        }
    }

    #[test]
    fn shrinking_identity_goes_extinct_quickly() {
        let mut w = Matrix::identity(3);
        w.scale(0.01);
        let rec = simulate_autonomous(
            &w,
            &[0.9, 0.4, 0.7],
            100,
            Activation::ReLU,
            1e6,
            1e-12,
        )
        .unwrap();
        let term = rec.terminated_at.expect("must go extinct");
        assert_eq!(term.kind, TerminationKind::Extinguished);
        assert!(term.step <= 7, "0.01^t decay crosses 1e-12 by step 7");
    }

    #[test]
    fn growing_identity_diverges_on_schedule() {
        let mut w = Matrix::identity(2);
        w.scale(1.5);
        let h0 = [1.0, 1.0];
        let rec = simulate_autonomous(&w, &h0, 100, Activation::ReLU, 1e6, 1e-12).unwrap();
        let term = rec.terminated_at.expect("must diverge");
        assert_eq!(term.kind, TerminationKind::Diverged);
        let bound = ((1e6_f64 / norm2(&h0)).ln() / 1.5_f64.ln()).ceil() as usize;
        assert!(
            term.step <= bound + 1,
            "diverged at step {} vs geometric bound {bound}",
            term.step
        );
    }

    #[test]
    fn norms_column_matches_states() {
        let mut rng = Rng::new(4);
        let w = crate::linalg::gaussian_matrix(5, 5, 0.0, 0.04, &mut rng).unwrap();
        let h0: Vec<f64> = (0..5).map(|_| rng.uniform()).collect();
        let rec = simulate_autonomous(&w, &h0, 20, Activation::Tanh, 1e6, 1e-12).unwrap();
        for (s, n) in rec.states.iter().zip(&rec.norms) {
            assert!((norm2(s) - n).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenbasis_transform_is_isometric_roundtrip() {
        let mut rng = Rng::new(17);
        let g = crate::linalg::gaussian_matrix(6, 6, 0.0, 1.0, &mut rng).unwrap();
        let mut w = Matrix::zeros(6, 6);
        for i in 0..6 {
            for j in 0..6 {
                w.set(i, j, 0.5 * (g.get(i, j) + g.get(j, i)));
            }
        }
        let h: Vec<f64> = (0..6).map(|_| rng.normal()).collect();
        let hp = eigenbasis_transform(&w, &h).unwrap();
        // P (P^T h) = h
        let (_, p) = eigh_symmetric(&w, 1e-10).unwrap();
        let back = p.matvec(&hp);
        for (a, b) in back.iter().zip(&h) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((norm2(&hp) - norm2(&h)).abs() < 1e-10);
    }

    #[test]
    fn eigenbasis_transform_rejects_asymmetric() {
        let w = Matrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            eigenbasis_transform(&w, &[1.0, 2.0]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn simulate_rejects_bad_thresholds_and_zero_steps() {
        let w = Matrix::identity(2);
        assert!(matches!(
            simulate_autonomous(&w, &[1.0, 1.0], 0, Activation::ReLU, 1e6, 1e-12),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            simulate_autonomous(&w, &[1.0, 1.0], 5, Activation::ReLU, 1e-12, 1e6),
            Err(Error::Contract(_))
        ));
    }
}
