//! The four-layer noise-modulated reservoir circuit.
//!
//! Each time step feeds one scalar input through an encoding layer (RX),
//! an entanglement layer (RZZ on disjoint pairs), a rotation layer (RY driven
//! purely by the noise parameters), and an output layer (RZ). In mixed mode
//! every gate is followed by a reset channel whose probability equals the
//! same noise parameter that modulated the gate angle; in pure mode the noise
//! parameters affect only the gate rotations. Features are all single- and
//! two-qubit Pauli-Z expectation values plus a trailing bias column.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::state::{Axis, GateAngle, QuantumState, SimMode, MAX_QUBITS};

/// Per-gate reset probabilities, grouped by circuit layer.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseProfile {
    /// Encoding-layer probabilities, one per qubit.
    pub p_enc: Vec<f64>,
    /// Entanglement-layer probabilities, one per qubit pair.
    pub p_ent: Vec<f64>,
    /// Rotation-layer probabilities, one per qubit.
    pub p_rot: Vec<f64>,
    /// Output-layer probabilities, one per qubit.
    pub p_out: Vec<f64>,
}

impl NoiseProfile {
    /// Draw every entry i.i.d. uniform on [0, 1).
    pub fn sample<R: Rng>(num_qubits: usize, rng: &mut R) -> Self {
        let draw = |rng: &mut R, n: usize| (0..n).map(|_| rng.random::<f64>()).collect();
        Self {
            p_enc: draw(rng, num_qubits),
            p_ent: draw(rng, num_qubits / 2),
            p_rot: draw(rng, num_qubits),
            p_out: draw(rng, num_qubits),
        }
    }

    /// All-zero profile: no angle modulation, no reset.
    pub fn zeros(num_qubits: usize) -> Self {
        Self::constant(num_qubits, 0.0)
    }

    /// Every entry set to the same probability.
    pub fn constant(num_qubits: usize, p: f64) -> Self {
        Self {
            p_enc: vec![p; num_qubits],
            p_ent: vec![p; num_qubits / 2],
            p_rot: vec![p; num_qubits],
            p_out: vec![p; num_qubits],
        }
    }

    /// Total parameter count: Nq + floor(Nq/2) + Nq + Nq.
    pub fn len(&self) -> usize {
        self.p_enc.len() + self.p_ent.len() + self.p_rot.len() + self.p_out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let shape_ok = self.p_enc.len() == num_qubits
            && self.p_ent.len() == num_qubits / 2
            && self.p_rot.len() == num_qubits
            && self.p_out.len() == num_qubits;
        if !shape_ok {
            return Err(Error::Config(format!(
                "noise profile sized for a different qubit count (expected {} parameters, got {})",
                num_qubits + num_qubits / 2 + 2 * num_qubits,
                self.len()
            )));
        }
        let groups = [&self.p_enc, &self.p_ent, &self.p_rot, &self.p_out];
        if groups.iter().any(|g| g.iter().any(|p| !(0.0..=1.0).contains(p))) {
            return Err(Error::Config("noise probabilities must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Static description of one reservoir instance.
#[derive(Clone, Debug)]
pub struct ReservoirConfig {
    pub num_qubits: usize,
    /// Input scaling factor s in theta = s * u.
    pub scaling: f64,
    pub mode: SimMode,
    /// Measurement shots; `None` means exact expectation values.
    pub shots: Option<u64>,
    /// Disjoint entangling pairs; an unpaired final qubit is allowed.
    pub entangle_pairs: Vec<(usize, usize)>,
}

impl ReservoirConfig {
    /// Standard configuration with the pair-separable topology
    /// {(0,1), (2,3), ...} and unit scaling.
    pub fn new(num_qubits: usize, mode: SimMode) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "num_qubits must be in 1..={MAX_QUBITS}, got {num_qubits}"
            )));
        }
        Ok(Self {
            num_qubits,
            scaling: 1.0,
            mode,
            shots: None,
            entangle_pairs: (0..num_qubits / 2).map(|k| (2 * k, 2 * k + 1)).collect(),
        })
    }

    pub fn with_shots(mut self, shots: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::Config("shots must be >= 1".into()));
        }
        self.shots = Some(shots);
        Ok(self)
    }

    pub fn with_scaling(mut self, scaling: f64) -> Result<Self> {
        if !scaling.is_finite() {
            return Err(Error::Config(format!("scaling must be finite, got {scaling}")));
        }
        self.scaling = scaling;
        Ok(self)
    }

    /// Feature dimension D = Nq + Nq(Nq-1)/2 + 1.
    pub fn feature_dim(&self) -> usize {
        feature_dim(self.num_qubits)
    }
}

/// D = Nq + Nq(Nq-1)/2 + 1.
pub fn feature_dim(num_qubits: usize) -> usize {
    num_qubits + num_qubits * (num_qubits - 1) / 2 + 1
}

/// Observable matrix with one row per time step.
///
/// Column layout: <Z_0> .. <Z_{Nq-1}>, then <Z_i Z_j> for i < j in
/// lexicographic order, then a constant 1.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    data: DMatrix<f64>,
}

impl FeatureMatrix {
    pub fn from_matrix(data: DMatrix<f64>) -> Self {
        Self { data }
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn row(&self, t: usize) -> Vec<f64> {
        self.data.row(t).iter().cloned().collect()
    }
}

/// Advance the reservoir by one input element.
///
/// Layer order: encoding RX_i(theta(1+p_enc[i])), entanglement
/// RZZ_ij(theta(1+p_ent[pair])), rotation RY_i(p_rot[i] * pi), output
/// RZ_i(theta(1+p_out[i])), with theta = scaling * u. In mixed mode each gate
/// is followed by the reset channel on its target qubit (qubit j for a pair).
pub fn reservoir_step(
    state: &mut QuantumState,
    u: f64,
    profile: &NoiseProfile,
    config: &ReservoirConfig,
) -> Result<()> {
    if state.num_qubits() != config.num_qubits {
        return Err(Error::Config(format!(
            "state has {} qubits but config expects {}",
            state.num_qubits(),
            config.num_qubits
        )));
    }
    profile.validate(config.num_qubits)?;
    if !u.is_finite() {
        return Err(Error::Data(format!("input element must be finite, got {u}")));
    }
    let mixed = matches!(config.mode, SimMode::Mixed);
    let theta = config.scaling * u;

    for (i, &p) in profile.p_enc.iter().enumerate() {
        state.rotate(i, Axis::X, GateAngle::new(theta * (1.0 + p))?)?;
        if mixed {
            state.apply_reset_channel(i, p)?;
        }
    }
    for (pair, &(i, j)) in config.entangle_pairs.iter().enumerate() {
        let p = profile.p_ent[pair];
        state.rzz(i, j, GateAngle::new(theta * (1.0 + p))?)?;
        if mixed {
            state.apply_reset_channel(j, p)?;
        }
    }
    for (i, &p) in profile.p_rot.iter().enumerate() {
        state.rotate(i, Axis::Y, GateAngle::new(p * std::f64::consts::PI)?)?;
        if mixed {
            state.apply_reset_channel(i, p)?;
        }
    }
    for (i, &p) in profile.p_out.iter().enumerate() {
        state.rotate(i, Axis::Z, GateAngle::new(theta * (1.0 + p))?)?;
        if mixed {
            state.apply_reset_channel(i, p)?;
        }
    }
    Ok(())
}

/// One feature row for the current state.
fn extract_features(state: &QuantumState, num_qubits: usize) -> Vec<f64> {
    let probs = state.basis_probabilities();
    let mut row = Vec::with_capacity(feature_dim(num_qubits));
    let mut single = vec![0.0; num_qubits];
    for (k, &pr) in probs.iter().enumerate() {
        for (q, acc) in single.iter_mut().enumerate() {
            if (k >> q) & 1 == 0 {
                *acc += pr;
            } else {
                *acc -= pr;
            }
        }
    }
    row.extend_from_slice(&single);
    for i in 0..num_qubits {
        for j in i + 1..num_qubits {
            let mut zz = 0.0;
            for (k, &pr) in probs.iter().enumerate() {
                let parity = ((k >> i) ^ (k >> j)) & 1;
                zz += if parity == 0 { pr } else { -pr };
            }
            row.push(zz);
        }
    }
    row.push(1.0);
    row
}

/// Run the reservoir over a full input sequence and collect the exact
/// feature matrix.
///
/// The state is initialized to |+>^(x)Nq once and carries over between time
/// steps; row t holds the features observed after feeding input element t.
pub fn run_sequence(
    input: &[f64],
    profile: &NoiseProfile,
    config: &ReservoirConfig,
) -> Result<FeatureMatrix> {
    if input.is_empty() {
        return Err(Error::Config("input sequence must have at least one element".into()));
    }
    let mut state = QuantumState::init_plus(config.num_qubits, config.mode)?;
    let d = config.feature_dim();
    let mut data = DMatrix::zeros(input.len(), d);
    for (t, &u) in input.iter().enumerate() {
        reservoir_step(&mut state, u, profile, config)?;
        let row = extract_features(&state, config.num_qubits);
        for (c, value) in row.into_iter().enumerate() {
            data[(t, c)] = value;
        }
    }
    Ok(FeatureMatrix::from_matrix(data))
}

/// Replace every non-bias entry with its binomial shot estimate.
///
/// Each observable O is sampled as n ~ Bin(n_shots, (1 + O)/2) and estimated
/// by 2n/n_shots - 1; the bias column is not a measured observable and passes
/// through untouched. Entries outside [-1, 1] by at most 1e-9 are clamped;
/// larger excursions are data errors.
pub fn apply_shot_noise<R: Rng>(
    features: &FeatureMatrix,
    n_shots: u64,
    rng: &mut R,
) -> Result<FeatureMatrix> {
    if n_shots == 0 {
        return Err(Error::Config("n_shots must be >= 1".into()));
    }
    let mut data = features.as_matrix().clone();
    let ncols = data.ncols();
    for r in 0..data.nrows() {
        for c in 0..ncols - 1 {
            let value = data[(r, c)];
            if value.abs() > 1.0 + 1e-9 {
                return Err(Error::Data(format!(
                    "observable expectation {value} outside [-1, 1]"
                )));
            }
            let p_meas = ((1.0 + value) / 2.0).clamp(0.0, 1.0);
            let counts = Binomial::new(n_shots, p_meas)
                .map_err(|e| Error::Data(format!("binomial sampling failed: {e}")))?
                .sample(rng);
            data[(r, c)] = 2.0 * counts as f64 / n_shots as f64 - 1.0;
        }
    }
    Ok(FeatureMatrix::from_matrix(data))
}

/// Exact features when no shots are configured, otherwise a fresh binomial
/// sampling of them. Every call with shots configured draws new noise.
pub fn measure_features<R: Rng>(
    exact: &FeatureMatrix,
    config: &ReservoirConfig,
    rng: &mut R,
) -> Result<FeatureMatrix> {
    match config.shots {
        None => Ok(exact.clone()),
        Some(n) => apply_shot_noise(exact, n, rng),
    }
}
