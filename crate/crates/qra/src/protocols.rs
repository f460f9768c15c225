//! Protocol variants built on the reservoir and the solvers.
//!
//! * [`encrypt`] / [`two_phase_train`] / [`two_phase_decrypt`]: the standard
//!   two-phase protocol. Phase 1 trains one ridge readout per plaintext
//!   position from shared training pairs; Phase 2 decrypts unseen ciphertexts
//!   with the frozen weights and never touches the true plaintext.
//! * [`blind_single_c`]: the Single-C variant whose decoder bootstraps its
//!   regression targets from cross-path estimates instead of the plaintext.
//! * [`blind_two_phase`]: the multi-sample variant that combines per-position
//!   regression with cross-path target refinement.
//! * [`compute_d_aug`]: the augmented feature dimension that governs the
//!   two-phase capacity limit.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::codec::{decode_g, encode_f, Ciphertext, Key, Plaintext};
use crate::error::{Error, Result};
use crate::reservoir::{
    feature_dim, measure_features, run_sequence, NoiseProfile, ReservoirConfig,
};
use crate::solvers::{als_project, column, mse, ridge_solve, solve_and_project, AlsTrace, KeySet};

/// Augmented feature dimension D_aug = Nq(Nq+1)/2 + 1 + K.
pub fn compute_d_aug(num_qubits: usize, poly_degree: usize) -> usize {
    feature_dim(num_qubits) + poly_degree
}

/// Reservoir features of a decoded sequence, extended with element-wise
/// powers d^1 .. d^K of the decoded values. Shape Nc x D_aug.
#[derive(Clone, Debug)]
pub struct AugmentedFeatures {
    data: DMatrix<f64>,
}

impl AugmentedFeatures {
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn row(&self, position: usize) -> DVector<f64> {
        self.data.row(position).transpose()
    }
}

/// One readout weight vector per plaintext position, usable for decryption
/// only once frozen.
#[derive(Clone, Debug)]
pub struct PerPositionDecoder {
    weights: Vec<DVector<f64>>,
    poly_degree: usize,
    frozen: bool,
}

impl PerPositionDecoder {
    pub fn from_weights(weights: Vec<DVector<f64>>, poly_degree: usize) -> Self {
        Self { weights, poly_degree, frozen: false }
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn num_positions(&self) -> usize {
        self.weights.len()
    }

    pub fn poly_degree(&self) -> usize {
        self.poly_degree
    }

    pub fn d_aug(&self) -> usize {
        self.weights.first().map_or(0, |w| w.len())
    }
}

/// Keys of one directional encode/decode path: the sender's encode key and
/// the receiver's secret decode key.
#[derive(Clone, Debug)]
pub struct PathKeys {
    pub encode: Key,
    pub secret: Key,
}

/// Encrypt one plaintext: project the encoded sequence through the sender's
/// reservoir with the encoded sequence itself as the readout target.
pub fn encrypt<R: Rng>(
    plaintext: &Plaintext,
    encode_key: &Key,
    enc_profile: &NoiseProfile,
    config: &ReservoirConfig,
    lambda: f64,
    rng: &mut R,
) -> Result<Ciphertext> {
    let encoded = encode_f(encode_key, plaintext)?;
    let targets = column(&encoded);
    let exact = run_sequence(&encoded, enc_profile, config)?;
    let (projection, _) = solve_and_project(&exact, config, &targets, lambda, rng)?;
    Ok(Ciphertext::from_values(projection.as_slice().to_vec()))
}

/// Decode a ciphertext and build its augmented feature matrix on the
/// receiver's reservoir.
fn receiver_features<R: Rng>(
    ciphertext: &Ciphertext,
    secret: &Key,
    dec_profile: &NoiseProfile,
    config: &ReservoirConfig,
    poly_degree: usize,
    rng: &mut R,
) -> Result<(AugmentedFeatures, Vec<f64>)> {
    if poly_degree == 0 {
        return Err(Error::Config("polynomial degree must be >= 1".into()));
    }
    let decoded = decode_g(secret, ciphertext.values())?;
    let exact = run_sequence(&decoded, dec_profile, config)?;
    let measured = measure_features(&exact, config, rng)?;

    let nc = decoded.len();
    let d = measured.ncols();
    let mut data = DMatrix::zeros(nc, d + poly_degree);
    data.view_mut((0, 0), (nc, d)).copy_from(measured.as_matrix());
    for (i, &value) in decoded.iter().enumerate() {
        let mut power = 1.0;
        for k in 0..poly_degree {
            power *= value;
            data[(i, d + k)] = power;
        }
    }
    Ok((AugmentedFeatures { data }, decoded))
}

/// Phase 1: encrypt every training plaintext, decode it, and fit one ridge
/// readout per position against the true plaintext values. Returns the
/// frozen decoder.
pub fn two_phase_train<R: Rng>(
    training: &[Plaintext],
    keys: &PathKeys,
    enc_profile: &NoiseProfile,
    dec_profile: &NoiseProfile,
    config: &ReservoirConfig,
    poly_degree: usize,
    lambda: f64,
    rng: &mut R,
) -> Result<PerPositionDecoder> {
    if training.is_empty() {
        return Err(Error::Config("two-phase training needs at least one plaintext".into()));
    }
    let nc = training[0].len();
    if training.iter().any(|c| c.len() != nc) {
        return Err(Error::Config("training plaintexts must share one length".into()));
    }

    let mut phis = Vec::with_capacity(training.len());
    for plaintext in training {
        let gamma = encrypt(plaintext, &keys.encode, enc_profile, config, lambda, rng)?;
        let (phi, _) = receiver_features(&gamma, &keys.secret, dec_profile, config, poly_degree, rng)?;
        phis.push(phi);
    }

    let d_aug = phis[0].ncols();
    let m = training.len();
    let mut weights = Vec::with_capacity(nc);
    for i in 0..nc {
        let mut design = DMatrix::zeros(m, d_aug);
        let mut targets = DMatrix::zeros(m, 1);
        for (j, phi) in phis.iter().enumerate() {
            design.row_mut(j).copy_from(&phi.as_matrix().row(i));
            targets[(j, 0)] = training[j].values()[i];
        }
        let solved = ridge_solve(&design, &targets, lambda)?;
        weights.push(DVector::from_column_slice(solved.matrix().as_slice()));
    }

    let mut decoder = PerPositionDecoder::from_weights(weights, poly_degree);
    decoder.freeze();
    Ok(decoder)
}

/// Phase 2: recover a plaintext estimate from a ciphertext with the frozen
/// per-position weights. The true plaintext is not an input.
pub fn two_phase_decrypt<R: Rng>(
    ciphertext: &Ciphertext,
    secret: &Key,
    decoder: &PerPositionDecoder,
    dec_profile: &NoiseProfile,
    config: &ReservoirConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !decoder.is_frozen() {
        return Err(Error::State("decoder must be frozen before decryption".into()));
    }
    if ciphertext.len() != decoder.num_positions() {
        return Err(Error::Data(format!(
            "ciphertext length {} does not match decoder with {} positions",
            ciphertext.len(),
            decoder.num_positions()
        )));
    }
    let (phi, _) = receiver_features(
        ciphertext,
        secret,
        dec_profile,
        config,
        decoder.poly_degree,
        rng,
    )?;
    Ok((0..decoder.num_positions())
        .map(|i| phi.row(i).dot(&decoder.weights[i]))
        .collect())
}

/// Encrypt-then-decrypt a set of held-out plaintexts and return the mean MSE.
pub fn two_phase_evaluate<R: Rng>(
    decoder: &PerPositionDecoder,
    tests: &[Plaintext],
    keys: &PathKeys,
    enc_profile: &NoiseProfile,
    dec_profile: &NoiseProfile,
    config: &ReservoirConfig,
    lambda: f64,
    rng: &mut R,
) -> Result<f64> {
    if tests.is_empty() {
        return Err(Error::Config("evaluation needs at least one test plaintext".into()));
    }
    let mut total = 0.0;
    for plaintext in tests {
        let gamma = encrypt(plaintext, &keys.encode, enc_profile, config, lambda, rng)?;
        let estimate = two_phase_decrypt(&gamma, &keys.secret, decoder, dec_profile, config, rng)?;
        total += mse(&column(&estimate), &column(plaintext.values()));
    }
    Ok(total / tests.len() as f64)
}

/// Outcome of a blind run: the evaluation trace plus the decoder's final
/// reconstruction.
#[derive(Clone, Debug)]
pub struct BlindRun {
    pub trace: AlsTrace,
    pub final_estimate: Vec<f64>,
}

/// Single-C blind decoder: the ALS where the decoder-side regression targets
/// are cross-path estimates instead of the plaintext. The encoder side still
/// encodes the true plaintext; the returned MSEs compare the reconstructions
/// against it for evaluation only.
pub fn blind_single_c<R: Rng>(
    plaintext: &Plaintext,
    keys: &KeySet,
    profile_a: &NoiseProfile,
    profile_b: &NoiseProfile,
    config: &ReservoirConfig,
    lambda: f64,
    n_iter: usize,
    rng: &mut R,
) -> Result<BlindRun> {
    let e_a = encode_f(&keys.a, plaintext)?;
    let e_b = encode_f(&keys.b, plaintext)?;
    let reconstructions = cross_path_reconstructions(
        &e_a, &e_b, &keys.alpha, &keys.beta, profile_a, profile_b, config, lambda, n_iter, rng,
    )?;

    let c_col = column(plaintext.values());
    let mut trace = AlsTrace {
        loss: Vec::with_capacity(n_iter),
        mse_path1: Vec::with_capacity(n_iter),
        mse_path2: Vec::with_capacity(n_iter),
    };
    for (rec1, rec2) in &reconstructions {
        let mse1 = mse(rec1, &c_col);
        let mse2 = mse(rec2, &c_col);
        trace.mse_path1.push(mse1);
        trace.mse_path2.push(mse2);
        trace.loss.push(0.5 * (mse1 + mse2));
    }
    let final_estimate = reconstructions
        .last()
        .map(|(_, rec2)| rec2.as_slice().to_vec())
        .expect("n_iter >= 1 produces at least one reconstruction");
    Ok(BlindRun { trace, final_estimate })
}

/// The decoder-side machine of the blind Single-C variant. It sees only the
/// encoded sequences and the secret keys; the plaintext is not an input, so
/// the decoder cannot read it even by accident.
///
/// Per iteration: gamma is projected from the encoded sequence, W_dec_b is
/// solved against the running estimate (initialized to gamma itself), the
/// Path 1 reconstruction becomes the target for W_dec_a, and the Path 2
/// reconstruction becomes the next estimate.
fn cross_path_reconstructions<R: Rng>(
    e_a: &[f64],
    e_b: &[f64],
    alpha: &Key,
    beta: &Key,
    profile_a: &NoiseProfile,
    profile_b: &NoiseProfile,
    config: &ReservoirConfig,
    lambda: f64,
    n_iter: usize,
    rng: &mut R,
) -> Result<Vec<(DMatrix<f64>, DMatrix<f64>)>> {
    if n_iter == 0 {
        return Err(Error::Config("n_iter must be >= 1".into()));
    }
    let ea_col = column(e_a);
    let eb_col = column(e_b);
    let va_exact = run_sequence(e_a, profile_a, config)?;
    let vb_exact = run_sequence(e_b, profile_b, config)?;

    let mut estimate: Option<DMatrix<f64>> = None;
    let mut reconstructions = Vec::with_capacity(n_iter);
    for _ in 0..n_iter {
        let (gamma, _) = als_project(&va_exact, config, &ea_col, lambda, rng)?;
        let target = estimate.take().unwrap_or_else(|| gamma.clone());

        let d = decode_g(beta, gamma.as_slice())?;
        let vdec_b = run_sequence(&d, profile_b, config)?;
        let (rec1, _) = als_project(&vdec_b, config, &target, lambda, rng)?;

        let (gamma_prime, _) = als_project(&vb_exact, config, &eb_col, lambda, rng)?;
        let d_prime = decode_g(alpha, gamma_prime.as_slice())?;
        let vdec_a = run_sequence(&d_prime, profile_a, config)?;
        let (rec2, _) = als_project(&vdec_a, config, &rec1, lambda, rng)?;

        estimate = Some(rec2.clone());
        reconstructions.push((rec1, rec2));
    }
    Ok(reconstructions)
}

/// Two-phase blind decoder: per-position regression over M samples whose
/// targets are initialized to the raw decoded values and refined by
/// alternating the two paths. Returns the evaluation trace against the true
/// plaintexts, which are never fed back into the regressions.
#[allow(clippy::too_many_arguments)]
pub fn blind_two_phase<R: Rng>(
    training: &[Plaintext],
    keys: &KeySet,
    profile_a: &NoiseProfile,
    profile_b: &NoiseProfile,
    config: &ReservoirConfig,
    poly_degree: usize,
    lambda: f64,
    n_iter: usize,
    rng: &mut R,
) -> Result<BlindRun> {
    if training.is_empty() {
        return Err(Error::Config("blind two-phase needs at least one training plaintext".into()));
    }
    if n_iter == 0 {
        return Err(Error::Config("n_iter must be >= 1".into()));
    }
    let nc = training[0].len();
    if training.iter().any(|c| c.len() != nc) {
        return Err(Error::Config("training plaintexts must share one length".into()));
    }
    let m = training.len();

    // Encrypt every sample through both paths and measure the augmented
    // features once; the iteration refines only weights and targets.
    let mut phi_path1 = Vec::with_capacity(m);
    let mut phi_path2 = Vec::with_capacity(m);
    let mut estimate = DMatrix::zeros(m, nc);
    for (j, plaintext) in training.iter().enumerate() {
        let gamma1 = encrypt(plaintext, &keys.a, profile_a, config, lambda, rng)?;
        let (phi1, decoded1) =
            receiver_features(&gamma1, &keys.beta, profile_b, config, poly_degree, rng)?;
        let gamma2 = encrypt(plaintext, &keys.b, profile_b, config, lambda, rng)?;
        let (phi2, _) =
            receiver_features(&gamma2, &keys.alpha, profile_a, config, poly_degree, rng)?;
        phi_path1.push(phi1);
        phi_path2.push(phi2);
        for i in 0..nc {
            estimate[(j, i)] = decoded1[i];
        }
    }

    let truth = DMatrix::from_fn(m, nc, |j, i| training[j].values()[i]);
    let d_aug = phi_path1[0].ncols();
    let design = |phis: &[AugmentedFeatures], i: usize| {
        let mut x = DMatrix::zeros(m, d_aug);
        for (j, phi) in phis.iter().enumerate() {
            x.row_mut(j).copy_from(&phi.as_matrix().row(i));
        }
        x
    };
    let designs1: Vec<DMatrix<f64>> = (0..nc).map(|i| design(&phi_path1, i)).collect();
    let designs2: Vec<DMatrix<f64>> = (0..nc).map(|i| design(&phi_path2, i)).collect();

    let mut trace = AlsTrace {
        loss: Vec::with_capacity(n_iter),
        mse_path1: Vec::with_capacity(n_iter),
        mse_path2: Vec::with_capacity(n_iter),
    };
    let mut rec1 = DMatrix::zeros(m, nc);
    for _ in 0..n_iter {
        for i in 0..nc {
            let targets = DMatrix::from_fn(m, 1, |j, _| estimate[(j, i)]);
            let w = ridge_solve(&designs1[i], &targets, lambda)?;
            let fitted = &designs1[i] * w.matrix();
            for j in 0..m {
                rec1[(j, i)] = fitted[(j, 0)];
            }
        }
        let mse1 = mse(&rec1, &truth);
        for i in 0..nc {
            let targets = DMatrix::from_fn(m, 1, |j, _| rec1[(j, i)]);
            let w = ridge_solve(&designs2[i], &targets, lambda)?;
            let fitted = &designs2[i] * w.matrix();
            for j in 0..m {
                estimate[(j, i)] = fitted[(j, 0)];
            }
        }
        let mse2 = mse(&estimate, &truth);
        trace.mse_path1.push(mse1);
        trace.mse_path2.push(mse2);
        trace.loss.push(0.5 * (mse1 + mse2));
    }

    let final_estimate = estimate.row(0).iter().cloned().collect();
    Ok(BlindRun { trace, final_estimate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::SimMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn plaintexts(count: usize, nc: usize, rng: &mut ChaCha8Rng) -> Vec<Plaintext> {
        (0..count).map(|_| Plaintext::random(nc, rng).unwrap()).collect()
    }

    struct Fixture {
        keys: KeySet,
        profile_a: NoiseProfile,
        profile_b: NoiseProfile,
        config: ReservoirConfig,
        rng: ChaCha8Rng,
    }

    fn fixture(num_qubits: usize, nc: usize, seed: u64) -> Fixture {
        let mut r = rng(seed);
        let keys = KeySet::generate(nc, num_qubits, &mut r);
        let profile_a = NoiseProfile::sample(num_qubits, &mut r);
        let profile_b = NoiseProfile::sample(num_qubits, &mut r);
        let config = ReservoirConfig::new(num_qubits, SimMode::Pure).unwrap();
        Fixture { keys, profile_a, profile_b, config, rng: r }
    }

    fn path1(keys: &KeySet) -> PathKeys {
        PathKeys { encode: keys.a.clone(), secret: keys.beta.clone() }
    }

    #[test]
    fn d_aug_values() {
        assert_eq!(compute_d_aug(5, 7), 23);
        assert_eq!(compute_d_aug(7, 7), 36);
        assert_eq!(compute_d_aug(10, 7), 63);
    }

    #[test]
    fn augmented_features_shape_and_powers() {
        let mut f = fixture(5, 4, 1);
        let c = Plaintext::random(4, &mut f.rng).unwrap();
        let gamma = encrypt(&c, &f.keys.a, &f.profile_a, &f.config, 1e-6, &mut f.rng).unwrap();
        let (phi, decoded) = receiver_features(
            &gamma, &f.keys.beta, &f.profile_b, &f.config, 3, &mut f.rng,
        )
        .unwrap();
        assert_eq!(phi.nrows(), 4);
        assert_eq!(phi.ncols(), compute_d_aug(5, 3));
        let d = feature_dim(5);
        for (i, &value) in decoded.iter().enumerate() {
            for k in 1..=3usize {
                let expected = value.powi(k as i32);
                assert!((phi.as_matrix()[(i, d + k - 1)] - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn poly_degree_zero_rejected() {
        let mut f = fixture(5, 3, 2);
        let c = Plaintext::random(3, &mut f.rng).unwrap();
        let gamma = encrypt(&c, &f.keys.a, &f.profile_a, &f.config, 1e-6, &mut f.rng).unwrap();
        assert!(receiver_features(&gamma, &f.keys.beta, &f.profile_b, &f.config, 0, &mut f.rng)
            .is_err());
    }

    #[test]
    fn two_phase_learns_the_inverse_map() {
        let mut f = fixture(5, 4, 3);
        let train = plaintexts(80, 4, &mut f.rng);
        let tests = plaintexts(10, 4, &mut f.rng);
        let keys = path1(&f.keys);
        let decoder = two_phase_train(
            &train, &keys, &f.profile_a, &f.profile_b, &f.config, 7, 1e-6, &mut f.rng,
        )
        .unwrap();
        assert!(decoder.is_frozen());
        assert_eq!(decoder.num_positions(), 4);
        assert_eq!(decoder.d_aug(), compute_d_aug(5, 7));

        let held_out = two_phase_evaluate(
            &decoder, &tests, &keys, &f.profile_a, &f.profile_b, &f.config, 1e-6, &mut f.rng,
        )
        .unwrap();
        assert!(held_out < 1e-2, "held-out mse {held_out}");

        let in_sample = two_phase_evaluate(
            &decoder, &train[..10], &keys, &f.profile_a, &f.profile_b, &f.config, 1e-6,
            &mut f.rng,
        )
        .unwrap();
        assert!(in_sample <= held_out * 1.5, "in-sample {in_sample} vs held-out {held_out}");
    }

    #[test]
    fn single_training_sample_generalizes_poorly() {
        let mut f = fixture(5, 4, 4);
        let train = plaintexts(60, 4, &mut f.rng);
        let tests = plaintexts(10, 4, &mut f.rng);
        let keys = path1(&f.keys);

        let tiny = two_phase_train(
            &train[..1], &keys, &f.profile_a, &f.profile_b, &f.config, 7, 1e-6, &mut f.rng,
        )
        .unwrap();
        let full = two_phase_train(
            &train, &keys, &f.profile_a, &f.profile_b, &f.config, 7, 1e-6, &mut f.rng,
        )
        .unwrap();
        let mse_tiny = two_phase_evaluate(
            &tiny, &tests, &keys, &f.profile_a, &f.profile_b, &f.config, 1e-6, &mut f.rng,
        )
        .unwrap();
        let mse_full = two_phase_evaluate(
            &full, &tests, &keys, &f.profile_a, &f.profile_b, &f.config, 1e-6, &mut f.rng,
        )
        .unwrap();
        assert!(mse_tiny > 10.0 * mse_full, "M=1 {mse_tiny} vs M=60 {mse_full}");
    }

    #[test]
    fn unfrozen_decoder_is_a_state_error() {
        let mut f = fixture(5, 3, 5);
        let c = Plaintext::random(3, &mut f.rng).unwrap();
        let gamma = encrypt(&c, &f.keys.a, &f.profile_a, &f.config, 1e-6, &mut f.rng).unwrap();
        let decoder =
            PerPositionDecoder::from_weights(vec![DVector::zeros(23); 3], 7);
        let result = two_phase_decrypt(
            &gamma, &f.keys.beta, &decoder, &f.profile_b, &f.config, &mut f.rng,
        );
        assert!(matches!(result, Err(Error::State(_))));
    }

    #[test]
    fn decrypt_output_independent_of_plaintext_corruption() {
        // Blind separation audit: the decoder sees only the ciphertext, so
        // corrupting the true plaintext after encryption changes nothing.
        let mut f = fixture(5, 4, 6);
        let train = plaintexts(40, 4, &mut f.rng);
        let keys = path1(&f.keys);
        let decoder = two_phase_train(
            &train, &keys, &f.profile_a, &f.profile_b, &f.config, 7, 1e-6, &mut f.rng,
        )
        .unwrap();

        let mut c = Plaintext::random(4, &mut f.rng).unwrap();
        let mut enc_rng = rng(777);
        let gamma = encrypt(&c, &keys.encode, &f.profile_a, &f.config, 1e-6, &mut enc_rng).unwrap();

        let mut dec_rng_a = rng(888);
        let out_a = two_phase_decrypt(
            &gamma, &keys.secret, &decoder, &f.profile_b, &f.config, &mut dec_rng_a,
        )
        .unwrap();

        c = Plaintext::from_values(vec![0.0; 4]).unwrap(); // corrupt after encryption
        let _ = &c;
        let mut dec_rng_b = rng(888);
        let out_b = two_phase_decrypt(
            &gamma, &keys.secret, &decoder, &f.profile_b, &f.config, &mut dec_rng_b,
        )
        .unwrap();
        assert_eq!(out_a, out_b);
    }

    #[test]
    fn blind_decoder_core_has_no_plaintext_input() {
        // The cross-path core receives only encoded sequences and secret
        // keys; rerunning it with the same rng reproduces the estimates.
        let mut f = fixture(5, 6, 7);
        let c = Plaintext::random(6, &mut f.rng).unwrap();
        let e_a = encode_f(&f.keys.a, &c).unwrap();
        let e_b = encode_f(&f.keys.b, &c).unwrap();
        let run = |seed: u64| {
            let mut r = rng(seed);
            cross_path_reconstructions(
                &e_a, &e_b, &f.keys.alpha, &f.keys.beta, &f.profile_a, &f.profile_b, &f.config,
                1e-6, 4, &mut r,
            )
            .unwrap()
        };
        let first = run(123);
        let second = run(123);
        for ((a1, a2), (b1, b2)) in first.iter().zip(&second) {
            assert_eq!(a1, b1);
            assert_eq!(a2, b2);
        }
    }

    #[test]
    fn blind_single_c_saturates_far_from_zero() {
        let mut f = fixture(5, 20, 8);
        let c = Plaintext::random(20, &mut f.rng).unwrap();
        let run = blind_single_c(
            &c, &f.keys, &f.profile_a, &f.profile_b, &f.config, 1e-6, 40, &mut f.rng,
        )
        .unwrap();
        let final_loss = run.trace.final_loss();
        assert!((0.05..=0.7).contains(&final_loss), "plateau at {final_loss}");
        // Plateau: iteration 5 already within 10% of the final value.
        let at5 = run.trace.loss[4];
        assert!((at5 - final_loss).abs() <= 0.1 * final_loss.max(1e-12));
    }

    #[test]
    fn blind_two_phase_paths_agree_at_convergence() {
        let mut f = fixture(5, 6, 9);
        let train = plaintexts(60, 6, &mut f.rng);
        let run = blind_two_phase(
            &train, &f.keys, &f.profile_a, &f.profile_b, &f.config, 7, 1e-6, 40, &mut f.rng,
        )
        .unwrap();
        let mse1 = *run.trace.mse_path1.last().unwrap();
        let mse2 = *run.trace.mse_path2.last().unwrap();
        assert!((mse1 - mse2).abs() < 1e-3, "paths differ: {mse1} vs {mse2}");
        assert!(run.trace.final_loss() > 1.0 / 3.0, "should not beat the baseline");
    }
}
