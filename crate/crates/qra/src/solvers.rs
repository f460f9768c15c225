//! Ridge-regression readout solver and the alternating-least-squares engine
//! for the four-equation encode/decode protocol.
//!
//! A readout maps the reservoir feature matrix V to targets y through
//! W = (V^T V + lambda I)^-1 V^T y. The ALS engine re-solves the four readout
//! blocks (encoder and decoder on each of the two reservoirs) once per
//! iteration in closed form.
//!
//! Two measurement semantics coexist when shots are configured. A plain
//! projection ([`reservoir_project`]) solves and applies on one measured
//! realization, so it reproduces its targets even from noisy features
//! whenever D >= Nc. The ALS engine instead draws fresh binomial noise for
//! every evaluation of a feature matrix: weights fit on one realization are
//! applied to an independent one, which is what produces the
//! iteration-independent noise floor.

use nalgebra::DMatrix;
use rand::Rng;

use crate::codec::{decode_g, encode_f, Key, Plaintext};
use crate::error::{Error, Result};
use crate::reservoir::{measure_features, run_sequence, FeatureMatrix, NoiseProfile, ReservoirConfig};
use crate::state::SimMode;

/// Solved readout weights together with the regularization they were
/// obtained under.
#[derive(Clone, Debug)]
pub struct ReadoutWeights {
    w: DMatrix<f64>,
    lambda: f64,
}

impl ReadoutWeights {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn feature_dim(&self) -> usize {
        self.w.nrows()
    }
}

/// Per-iteration loss and per-path MSE values of one ALS run.
#[derive(Clone, Debug, PartialEq)]
pub struct AlsTrace {
    pub loss: Vec<f64>,
    pub mse_path1: Vec<f64>,
    pub mse_path2: Vec<f64>,
}

impl AlsTrace {
    pub fn len(&self) -> usize {
        self.loss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loss.is_empty()
    }

    pub fn final_loss(&self) -> f64 {
        *self.loss.last().expect("trace has at least one iteration")
    }
}

/// Four keys of the protocol: distributed keys A and B, secret keys alpha
/// and beta.
#[derive(Clone, Debug)]
pub struct KeySet {
    pub a: Key,
    pub b: Key,
    pub alpha: Key,
    pub beta: Key,
}

impl KeySet {
    /// Draw all four keys in the fixed order A, B, alpha, beta.
    pub fn generate<R: Rng>(length_nc: usize, num_qubits: usize, rng: &mut R) -> Self {
        let a = crate::codec::generate_key(length_nc, num_qubits, rng);
        let b = crate::codec::generate_key(length_nc, num_qubits, rng);
        let alpha = crate::codec::generate_key(length_nc, num_qubits, rng);
        let beta = crate::codec::generate_key(length_nc, num_qubits, rng);
        Self { a, b, alpha, beta }
    }
}

/// Solve W = (V^T V + lambda I)^-1 V^T y.
///
/// For lambda = 0 a rank-revealing SVD pseudo-inverse is used. For
/// lambda > 0 the normal equations are solved by Cholesky on whichever Gram
/// matrix is smaller (V^T V or V V^T, which give the identical solution),
/// falling back to an SVD-based solve if the factorization fails.
pub fn ridge_solve(
    features: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    lambda: f64,
) -> Result<ReadoutWeights> {
    let n = features.nrows();
    let d = features.ncols();
    if n == 0 || d == 0 {
        return Err(Error::Config("ridge system must have at least one row and column".into()));
    }
    if targets.nrows() != n {
        return Err(Error::Data(format!(
            "targets have {} rows but features have {n}",
            targets.nrows()
        )));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Config(format!("lambda must be finite and >= 0, got {lambda}")));
    }

    if lambda == 0.0 {
        return Ok(ReadoutWeights { w: svd_ridge(features, targets, 0.0), lambda });
    }

    let w = if d <= n {
        let gram = features.transpose() * features + DMatrix::identity(d, d) * lambda;
        match nalgebra::linalg::Cholesky::new(gram) {
            Some(chol) => chol.solve(&(features.transpose() * targets)),
            None => svd_ridge(features, targets, lambda),
        }
    } else {
        let gram = features * features.transpose() + DMatrix::identity(n, n) * lambda;
        match nalgebra::linalg::Cholesky::new(gram) {
            Some(chol) => features.transpose() * chol.solve(targets),
            None => svd_ridge(features, targets, lambda),
        }
    };
    Ok(ReadoutWeights { w, lambda })
}

/// Ridge solution through the SVD of V; with lambda = 0 this is the
/// minimum-norm least-squares solution with small singular values dropped.
fn svd_ridge(features: &DMatrix<f64>, targets: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let svd = nalgebra::linalg::SVD::new(features.clone(), true, true);
    let u = svd.u.as_ref().expect("svd with u requested");
    let v_t = svd.v_t.as_ref().expect("svd with v_t requested");
    let sigma = &svd.singular_values;
    let cutoff = sigma.iter().cloned().fold(0.0f64, f64::max) * 1e-13;

    let mut projected = u.transpose() * targets;
    for (r, &s) in sigma.iter().enumerate() {
        let factor = if lambda == 0.0 {
            if s > cutoff {
                1.0 / s
            } else {
                0.0
            }
        } else {
            s / (s * s + lambda)
        };
        for c in 0..projected.ncols() {
            projected[(r, c)] *= factor;
        }
    }
    v_t.transpose() * projected
}

/// Compute the reservoir projection R(x) = V(x) W for the given targets:
/// runs the sequence, measures the features once, and both fits and applies W
/// on that realization.
pub fn reservoir_project<R: Rng>(
    input: &[f64],
    profile: &NoiseProfile,
    config: &ReservoirConfig,
    targets: &DMatrix<f64>,
    lambda: f64,
    rng: &mut R,
) -> Result<(DMatrix<f64>, ReadoutWeights)> {
    let exact = run_sequence(input, profile, config)?;
    solve_and_project(&exact, config, targets, lambda, rng)
}

/// The measured solve-then-apply step of [`reservoir_project`], reusing an
/// already computed exact feature matrix. One realization serves both the fit
/// and the application.
pub fn solve_and_project<R: Rng>(
    exact: &FeatureMatrix,
    config: &ReservoirConfig,
    targets: &DMatrix<f64>,
    lambda: f64,
    rng: &mut R,
) -> Result<(DMatrix<f64>, ReadoutWeights)> {
    let realization = measure_features(exact, config, rng)?;
    let weights = ridge_solve(realization.as_matrix(), targets, lambda)?;
    let projection = realization.as_matrix() * &weights.w;
    Ok((projection, weights))
}

/// Solve-then-apply where the application re-measures the features: weights
/// fit on one realization act on an independent one, as when a trained
/// readout is reused on a fresh physical run. In ideal mode this equals
/// [`solve_and_project`].
pub fn solve_and_project_resampled<R: Rng>(
    exact: &FeatureMatrix,
    config: &ReservoirConfig,
    targets: &DMatrix<f64>,
    lambda: f64,
    rng: &mut R,
) -> Result<(DMatrix<f64>, ReadoutWeights)> {
    let solve_realization = measure_features(exact, config, rng)?;
    let weights = ridge_solve(solve_realization.as_matrix(), targets, lambda)?;
    let apply_realization = measure_features(exact, config, rng)?;
    let projection = apply_realization.as_matrix() * &weights.w;
    Ok((projection, weights))
}

/// Projection semantics inside ALS loops. Statevector features are cheap and
/// re-measured whenever the trained readout is applied, so every application
/// sees fresh shot noise. Density-matrix features are measured once per
/// evaluation and the readout is fit and applied on that single realization,
/// matching the practice of not re-running the costly open-system simulation
/// within one update; reconstruction errors there are set by the ridge
/// residual instead of by fresh sampling noise.
pub fn als_project<R: Rng>(
    exact: &FeatureMatrix,
    config: &ReservoirConfig,
    targets: &DMatrix<f64>,
    lambda: f64,
    rng: &mut R,
) -> Result<(DMatrix<f64>, ReadoutWeights)> {
    match config.mode {
        SimMode::Pure => solve_and_project_resampled(exact, config, targets, lambda, rng),
        SimMode::Mixed => solve_and_project(exact, config, targets, lambda, rng),
    }
}

/// Mean squared error between two equally shaped matrices.
pub fn mse(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    let diff = a - b;
    diff.iter().map(|v| v * v).sum::<f64>() / (a.nrows() * a.ncols()) as f64
}

pub(crate) fn column(values: &[f64]) -> DMatrix<f64> {
    DMatrix::from_column_slice(values.len(), 1, values)
}

/// Solve the four-equation protocol for one known plaintext by alternating
/// least squares.
///
/// Per iteration the four readout blocks are updated in the order
/// W_enc_a, W_dec_b, W_enc_b, W_dec_a. Path 1 encodes F(A, C) through
/// reservoir a and decodes G(beta, gamma) through reservoir b; Path 2 is the
/// mirror image. The recorded loss is the mean of the two path MSEs. Every
/// projection re-measures its features (fresh shot noise per evaluation), so
/// under measurement noise the loss settles at a floor instead of exactly
/// fitting one noisy matrix.
pub fn als_single_c<R: Rng>(
    plaintext: &Plaintext,
    keys: &KeySet,
    profile_a: &NoiseProfile,
    profile_b: &NoiseProfile,
    config: &ReservoirConfig,
    lambda: f64,
    n_iter: usize,
    rng: &mut R,
) -> Result<AlsTrace> {
    if n_iter == 0 {
        return Err(Error::Config("n_iter must be >= 1".into()));
    }
    let c_col = column(plaintext.values());
    let e_a = encode_f(&keys.a, plaintext)?;
    let e_b = encode_f(&keys.b, plaintext)?;
    let ea_col = column(&e_a);
    let eb_col = column(&e_b);

    // The encoder inputs never change, so their exact feature matrices are
    // loop invariants; measurement noise is still drawn fresh per use.
    let va_exact = run_sequence(&e_a, profile_a, config)?;
    let vb_exact = run_sequence(&e_b, profile_b, config)?;

    let mut trace = AlsTrace {
        loss: Vec::with_capacity(n_iter),
        mse_path1: Vec::with_capacity(n_iter),
        mse_path2: Vec::with_capacity(n_iter),
    };

    for _ in 0..n_iter {
        // Path 1: update W_enc_a, then W_dec_b.
        let (gamma, _) = als_project(&va_exact, config, &ea_col, lambda, rng)?;
        let d = decode_g(&keys.beta, gamma.as_slice())?;
        let vdec_b = run_sequence(&d, profile_b, config)?;
        let (c_hat_1, _) = als_project(&vdec_b, config, &c_col, lambda, rng)?;
        let mse1 = mse(&c_hat_1, &c_col);

        // Path 2: update W_enc_b, then W_dec_a.
        let (gamma_prime, _) = als_project(&vb_exact, config, &eb_col, lambda, rng)?;
        let d_prime = decode_g(&keys.alpha, gamma_prime.as_slice())?;
        let vdec_a = run_sequence(&d_prime, profile_a, config)?;
        let (c_hat_2, _) = als_project(&vdec_a, config, &c_col, lambda, rng)?;
        let mse2 = mse(&c_hat_2, &c_col);

        trace.mse_path1.push(mse1);
        trace.mse_path2.push(mse2);
        trace.loss.push(0.5 * (mse1 + mse2));
    }
    Ok(trace)
}
