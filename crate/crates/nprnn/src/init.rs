//! Weight initialization. The recurrent matrix comes from one of seven
//! constructions (identity, scaled identity, normalized positive-definite,
//! spectral-radius-normalized Gaussian, orthogonal, Gaussian with variance
//! 1/n, and a plain-Gaussian alias kept as its own tag for reporting); the
//! input weights are variance-1/m Gaussians boosted by the `alpha` factor,
//! the output weights are Glorot-scaled, and biases start at zero.

use crate::dynamics::{classify_regime, RegimeClass};
use crate::error::{Error, Result};
use crate::linalg::{
    default_max_iter, eigenvalues_general, eigh_symmetric, gaussian_matrix, qr_householder,
    spectral_radius, Matrix, Rng,
};
use crate::net::{Activation, OutputKind, RnnParams};

/// Recipe for the recurrent weight matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeKind {
    /// The identity matrix.
    Identity,
    /// `scale · I`; 0.01 is the conventional small-identity variant.
    ScaledIdentity(f64),
    /// Symmetric positive-definite with top eigenvalue exactly one and the
    /// rest in (0, 1).
    NormalizedPositiveDefinite,
    /// Gaussian draw rescaled so its spectral radius is one; generically has
    /// complex eigenvalue pairs, hence oscillatory autonomous dynamics.
    NormalizedGaussian,
    /// Orthogonal factor of a Gaussian draw.
    Orthogonal,
    /// Gaussian entries with variance 1/n.
    Gaussian,
    /// Same distribution as `Gaussian`; separate tag so baseline runs are
    /// reported under their own name.
    PlainGaussian,
}

/// Initialization scheme: the recurrent recipe plus the hidden nonlinearity
/// it is paired with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitScheme {
    pub kind: SchemeKind,
    pub activation: Activation,
}

impl InitScheme {
    pub fn new(kind: SchemeKind, activation: Activation) -> Result<InitScheme> {
        if let SchemeKind::ScaledIdentity(s) = kind {
            if !(s > 0.0) {
                return Err(Error::contract(format!(
                    "ScaledIdentity requires scale > 0, got {s}"
                )));
            }
        }
        Ok(InitScheme { kind, activation })
    }

    /// Identity recurrence with ReLU units.
    pub fn irnn() -> InitScheme {
        InitScheme {
            kind: SchemeKind::Identity,
            activation: Activation::ReLU,
        }
    }

    /// 0.01-scaled identity with ReLU units.
    pub fn irnn_small() -> InitScheme {
        InitScheme {
            kind: SchemeKind::ScaledIdentity(0.01),
            activation: Activation::ReLU,
        }
    }

    /// Normalized positive-definite recurrence with ReLU units.
    pub fn np() -> InitScheme {
        InitScheme {
            kind: SchemeKind::NormalizedPositiveDefinite,
            activation: Activation::ReLU,
        }
    }

    /// Normalized positive-definite recurrence with tanh units.
    pub fn np_tanh() -> InitScheme {
        InitScheme {
            kind: SchemeKind::NormalizedPositiveDefinite,
            activation: Activation::Tanh,
        }
    }

    /// Spectral-radius-normalized Gaussian with ReLU units.
    pub fn nrnn() -> InitScheme {
        InitScheme {
            kind: SchemeKind::NormalizedGaussian,
            activation: Activation::ReLU,
        }
    }

    /// Orthogonal recurrence with ReLU units.
    pub fn ornn() -> InitScheme {
        InitScheme {
            kind: SchemeKind::Orthogonal,
            activation: Activation::ReLU,
        }
    }

    /// Gaussian recurrence with ReLU units.
    pub fn grnn() -> InitScheme {
        InitScheme {
            kind: SchemeKind::Gaussian,
            activation: Activation::ReLU,
        }
    }

    /// Plain-Gaussian baseline with ReLU units.
    pub fn srnn() -> InitScheme {
        InitScheme {
            kind: SchemeKind::PlainGaussian,
            activation: Activation::ReLU,
        }
    }

    /// Canonical name used by the CLI, config files, and reports.
    pub fn name(&self) -> String {
        let kind = match self.kind {
            SchemeKind::Identity => "identity".to_string(),
            SchemeKind::ScaledIdentity(s) => {
                if s == 0.01 {
                    "scaled-identity".to_string()
                } else {
                    format!("scaled-identity:{s}")
                }
            }
            SchemeKind::NormalizedPositiveDefinite => "np".to_string(),
            SchemeKind::NormalizedGaussian => "ngauss".to_string(),
            SchemeKind::Orthogonal => "ortho".to_string(),
            SchemeKind::Gaussian => "gauss".to_string(),
            SchemeKind::PlainGaussian => "plain-gauss".to_string(),
        };
        match (self.kind, self.activation) {
            (SchemeKind::NormalizedPositiveDefinite, Activation::Tanh) => "np-tanh".to_string(),
            (_, Activation::Tanh) => format!("{kind}+tanh"),
            _ => kind,
        }
    }

    /// Parses a scheme name. Accepts the canonical names and the usual
    /// model aliases (irnn, np-tanh, nrnn, ornn, grnn, srnn);
    /// `scaled-identity:<s>` selects a custom scale.
    pub fn parse(name: &str) -> Result<InitScheme> {
        let lower = name.trim().to_ascii_lowercase();
        let scheme = match lower.as_str() {
            "identity" | "irnn" => InitScheme::irnn(),
            "scaled-identity" | "irnn-small" => InitScheme::irnn_small(),
            "np" | "np-rnn" => InitScheme::np(),
            "np-tanh" | "np-tanhrnn" => InitScheme::np_tanh(),
            "ngauss" | "nrnn" | "normalized-gaussian" => InitScheme::nrnn(),
            "ortho" | "ornn" | "orthogonal" => InitScheme::ornn(),
            "gauss" | "grnn" | "gaussian" => InitScheme::grnn(),
            "plain-gauss" | "srnn" => InitScheme::srnn(),
            other => {
                if let Some(s) = other.strip_prefix("scaled-identity:") {
                    let scale: f64 = s.parse().map_err(|_| {
                        Error::Parse(format!("bad scaled-identity scale `{s}`"))
                    })?;
                    return InitScheme::new(SchemeKind::ScaledIdentity(scale), Activation::ReLU);
                }
                return Err(Error::Parse(format!("unknown init scheme `{name}`")));
            }
        };
        Ok(scheme)
    }
}

/// Normalized positive-definite recurrent matrix: from a standard-normal
/// `R`, form `A = R^T R / n`, measure `e = max λ(A + I)`, return
/// `(I + A) / e`. Symmetric by construction, positive definite, largest
/// eigenvalue one, every other eigenvalue strictly inside (0, 1).
pub fn np_recurrent_init(n: usize, rng: &mut Rng) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::contract("np_recurrent_init requires n >= 1"));
    }
    let r = gaussian_matrix(n, n, 0.0, 1.0, rng)?;
    // A = R^T R / n, filled symmetrically so W is symmetric to the bit
    let mut a = Matrix::zeros(n, n);
    let rt = r.transpose();
    for i in 0..n {
        for j in i..n {
            let v = crate::linalg::dot(rt.row(i), rt.row(j)) / n as f64;
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    let mut a_plus_i = a.clone();
    for i in 0..n {
        a_plus_i.set(i, i, a_plus_i.get(i, i) + 1.0);
    }
    let (vals, _) = eigh_symmetric(&a_plus_i, 1e-10)?;
    let e = vals[0];
    let mut w = a_plus_i;
    // true division: x/x is exactly 1, x·(1/x) need not be
    for v in w.data_mut() {
        *v /= e;
    }
    Ok(w)
}

/// `scale · I`.
pub fn identity_init(n: usize, scale: f64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::contract("identity_init requires n >= 1"));
    }
    let mut m = Matrix::identity(n);
    if scale != 1.0 {
        m.scale(scale);
    }
    Ok(m)
}

/// Orthogonal matrix: the Q factor of a standard-normal draw, with the
/// R-diagonal sign normalization making it unique per seed.
pub fn orthogonal_init(n: usize, rng: &mut Rng) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::contract("orthogonal_init requires n >= 1"));
    }
    let g = gaussian_matrix(n, n, 0.0, 1.0, rng)?;
    let (q, _) = qr_householder(&g)?;
    Ok(q)
}

/// Gaussian recurrent matrix with entries `Normal(0, 1/n)`, matching the
/// input-weight variance convention.
pub fn gaussian_recurrent_init(n: usize, rng: &mut Rng) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::contract("gaussian_recurrent_init requires n >= 1"));
    }
    gaussian_matrix(n, n, 0.0, 1.0 / n as f64, rng)
}

/// Gaussian draw rescaled by its spectral radius, so the result has
/// spectral radius one (within the iteration tolerance).
pub fn normalized_gaussian_init(n: usize, rng: &mut Rng) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::contract("normalized_gaussian_init requires n >= 1"));
    }
    let mut g = gaussian_recurrent_init(n, rng)?;
    let rho = spectral_radius(&g, 1e-8, default_max_iter(n))?;
    if rho == 0.0 {
        return Err(Error::contract(
            "degenerate zero draw cannot be spectrally normalized",
        ));
    }
    g.scale(1.0 / rho);
    Ok(g)
}

/// Input scaling factor `√2 · exp(1.2 / (max(n, 6) − 2.4))`: boosts the
/// input weights so perturbations survive the contraction of the early
/// recurrence steps.
pub fn alpha(n: usize) -> f64 {
    let n_eff = n.max(6) as f64;
    std::f64::consts::SQRT_2 * (1.2 / (n_eff - 2.4)).exp()
}

/// Input weight matrix: `m × n_in` with entries `alpha(m) · Normal(0, 1/m)`.
pub fn input_weight_init(m: usize, n_in: usize, rng: &mut Rng) -> Result<Matrix> {
    if m == 0 || n_in == 0 {
        return Err(Error::contract("input_weight_init requires m, n_in >= 1"));
    }
    let mut w = gaussian_matrix(m, n_in, 0.0, 1.0 / m as f64, rng)?;
    w.scale(alpha(m));
    Ok(w)
}

/// Output weight matrix: `c × m` Glorot draw, `Normal(0, 2/(m + c))` with
/// fan-in `m` and fan-out `c`.
pub fn output_weight_init(c: usize, m: usize, rng: &mut Rng) -> Result<Matrix> {
    if c == 0 || m == 0 {
        return Err(Error::contract("output_weight_init requires c, m >= 1"));
    }
    gaussian_matrix(c, m, 0.0, 2.0 / (m + c) as f64, rng)
}

/// Assembles a full parameter set: recurrent matrix per the scheme, scaled
/// Gaussian input weights, Glorot output weights, zero biases. Draw order
/// is fixed (W_hh, then W_hx, then W_yh) so results are a pure function of
/// the seed.
pub fn build_network(
    scheme: InitScheme,
    n_in: usize,
    m: usize,
    c: usize,
    output: OutputKind,
    rng: &mut Rng,
) -> Result<RnnParams> {
    if n_in == 0 || m == 0 || c == 0 {
        return Err(Error::contract("build_network requires all dims >= 1"));
    }
    let w_hh = match scheme.kind {
        SchemeKind::Identity => identity_init(m, 1.0)?,
        SchemeKind::ScaledIdentity(s) => {
            InitScheme::new(scheme.kind, scheme.activation)?;
            identity_init(m, s)?
        }
        SchemeKind::NormalizedPositiveDefinite => np_recurrent_init(m, rng)?,
        SchemeKind::NormalizedGaussian => normalized_gaussian_init(m, rng)?,
        SchemeKind::Orthogonal => orthogonal_init(m, rng)?,
        SchemeKind::Gaussian | SchemeKind::PlainGaussian => gaussian_recurrent_init(m, rng)?,
    };
    let params = RnnParams {
        w_hx: input_weight_init(m, n_in, rng)?,
        w_hh,
        w_yh: output_weight_init(c, m, rng)?,
        b_h: vec![0.0; m],
        b_y: vec![0.0; c],
        activation: scheme.activation,
        output,
    };
    params.validate()?;
    Ok(params)
}

/// Spectral summary of a recurrent weight matrix.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Eigenvalue magnitudes, descending.
    pub eigenvalue_magnitudes: Vec<f64>,
    pub is_symmetric: bool,
    pub is_positive_definite: bool,
    pub max_eig: f64,
    pub regime: RegimeClass,
}

/// Measures a recurrent matrix: eigenvalue magnitudes through the symmetric
/// path when possible (Jacobi) and the general path otherwise (Schur QR),
/// plus the regime label at the default 1e-6 band.
pub fn spectrum_report(w: &Matrix) -> Result<SpectrumReport> {
    if !w.is_square() {
        return Err(Error::contract(format!(
            "spectrum_report requires a square matrix, got {}x{}",
            w.rows(),
            w.cols()
        )));
    }
    let symmetric = w.is_symmetric(1e-10);
    let (mut magnitudes, positive_definite) = if symmetric {
        let (vals, _) = eigh_symmetric(w, 1e-10)?;
        let pd = vals.iter().all(|&v| v > 0.0);
        (vals.iter().map(|v| v.abs()).collect::<Vec<f64>>(), pd)
    } else {
        let eigs = eigenvalues_general(w, default_max_iter(w.rows()))?;
        (eigs.iter().map(|c| c.magnitude()).collect(), false)
    };
    magnitudes.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let regime = classify_regime(&magnitudes, 1e-6)?;
    Ok(SpectrumReport {
        max_eig: magnitudes[0],
        eigenvalue_magnitudes: magnitudes,
        is_symmetric: symmetric,
        is_positive_definite: positive_definite,
        regime,
    })
}
