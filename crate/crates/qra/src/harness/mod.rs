//! Declarative experiment runner with deterministic seeding.
//!
//! An [`ExperimentSpec`] describes a grid of (seed, trial, Nc, M) cells; the
//! runner instantiates keys, plaintexts and noise profiles for each cell from
//! labeled RNG substreams of one master seed, dispatches to the protocol
//! implementations, and collects [`ResultRecord`]s in a canonical order, so
//! identical specs produce byte-identical CSV regardless of thread count.
//!
//! Substream derivation: the master seed is xor-combined with the FNV-1a hash
//! of a label string and passed through SplitMix64; every index is folded in
//! the same way. The labels are `keys`, `plaintexts_train`, `plaintexts_test`,
//! `noise_profile_a`, `noise_profile_b`, and `shot_noise`; the folded indices
//! are the noise condition (0 ideal, 1 shot, 2 reset+shot) followed by
//! (seed, trial, nc) — plus M for the shot stream. Key and plaintext streams
//! leave M out so that larger training sets extend smaller ones; noise
//! profiles also leave Nc out, giving each (seed, trial) one fixed profile
//! pair across the grid. Folding the condition in means different noise
//! conditions draw independent keys and profiles, and cross-condition
//! comparisons pair runs by seed index alone.

mod presets;
mod records;
mod report;
mod validate;

pub use presets::{experiment_spec, parse_spec_file, Scale, EXPERIMENT_IDS};
pub use records::{emit_csv, read_csv, ResultRecord, CSV_HEADER};
pub use report::{significance_report, ReportRow, SignificanceReport};
pub use validate::{run_validation, SuiteResult};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codec::Plaintext;
use crate::error::{Error, Result};
use crate::protocols::{
    blind_single_c, blind_two_phase, two_phase_evaluate, two_phase_train, PathKeys,
};
use crate::reservoir::{NoiseProfile, ReservoirConfig};
use crate::solvers::{als_single_c, AlsTrace, KeySet};
use crate::state::{SimMode, MAX_QUBITS};

/// Protocol selector of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Protocol {
    SingleC,
    TwoPhase,
    BlindSingleC,
    BlindTwoPhase,
}

impl Protocol {
    pub fn as_str(&self) -> &'static str {
        match self {
            Protocol::SingleC => "single_c",
            Protocol::TwoPhase => "two_phase",
            Protocol::BlindSingleC => "blind_single_c",
            Protocol::BlindTwoPhase => "blind_two_phase",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "single_c" => Ok(Protocol::SingleC),
            "two_phase" => Ok(Protocol::TwoPhase),
            "blind_single_c" => Ok(Protocol::BlindSingleC),
            "blind_two_phase" => Ok(Protocol::BlindTwoPhase),
            other => Err(Error::Config(format!("unknown protocol '{other}'"))),
        }
    }
}

/// Noise condition of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseCondition {
    Ideal,
    Shot,
    ResetShot,
}

impl NoiseCondition {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseCondition::Ideal => "ideal",
            NoiseCondition::Shot => "shot",
            NoiseCondition::ResetShot => "reset_shot",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "ideal" => Ok(NoiseCondition::Ideal),
            "shot" => Ok(NoiseCondition::Shot),
            "reset_shot" => Ok(NoiseCondition::ResetShot),
            other => Err(Error::Config(format!("unknown noise condition '{other}'"))),
        }
    }

    pub fn sim_mode(&self) -> SimMode {
        match self {
            NoiseCondition::ResetShot => SimMode::Mixed,
            _ => SimMode::Pure,
        }
    }

    fn stream_tag(&self) -> u64 {
        match self {
            NoiseCondition::Ideal => 0,
            NoiseCondition::Shot => 1,
            NoiseCondition::ResetShot => 2,
        }
    }
}

/// Declarative description of one experiment grid.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    /// Preset id 1..=24, or 0 for custom specs.
    pub id: u32,
    pub protocol: Protocol,
    pub noise: NoiseCondition,
    pub num_qubits: usize,
    pub seeds: usize,
    pub trials: usize,
    pub nc_list: Vec<usize>,
    /// Training-set sizes; required for the two-phase protocols.
    pub m_list: Option<Vec<usize>>,
    pub n_shots: Option<u64>,
    /// Polynomial degree K of the augmented features.
    pub poly_degree: usize,
    pub lambda: f64,
    pub n_iter: usize,
    pub n_test: usize,
    pub scaling: f64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 || self.num_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "num_qubits must be in 1..={MAX_QUBITS}, got {} ({} mode)",
                self.num_qubits,
                self.noise.as_str()
            )));
        }
        if self.seeds == 0 || self.trials == 0 {
            return Err(Error::Config("seeds and trials must be >= 1".into()));
        }
        if self.nc_list.is_empty() || self.nc_list.iter().any(|&nc| nc == 0) {
            return Err(Error::Config("nc_list must hold positive lengths".into()));
        }
        match self.noise {
            NoiseCondition::Ideal => {
                if self.n_shots.is_some() {
                    return Err(Error::Config("ideal noise takes no n_shots".into()));
                }
            }
            _ => {
                if self.n_shots.is_none_or(|n| n == 0) {
                    return Err(Error::Config(format!(
                        "{} noise requires n_shots >= 1",
                        self.noise.as_str()
                    )));
                }
            }
        }
        let two_phase_family =
            matches!(self.protocol, Protocol::TwoPhase | Protocol::BlindTwoPhase);
        match (&self.m_list, two_phase_family) {
            (None, true) => {
                return Err(Error::Config(format!(
                    "protocol {} requires m_list",
                    self.protocol.as_str()
                )))
            }
            (Some(_), false) => {
                return Err(Error::Config(format!(
                    "protocol {} takes no m_list",
                    self.protocol.as_str()
                )))
            }
            (Some(list), true) if list.is_empty() || list.iter().any(|&m| m == 0) => {
                return Err(Error::Config("m_list must hold positive sizes".into()))
            }
            _ => {}
        }
        if two_phase_family && self.poly_degree == 0 {
            return Err(Error::Config("poly_degree must be >= 1".into()));
        }
        if matches!(self.protocol, Protocol::TwoPhase) && self.n_test == 0 {
            return Err(Error::Config("n_test must be >= 1".into()));
        }
        if self.n_iter == 0 {
            return Err(Error::Config("n_iter must be >= 1".into()));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Config("lambda must be finite and >= 0".into()));
        }
        if !self.scaling.is_finite() {
            return Err(Error::Config("scaling must be finite".into()));
        }
        Ok(())
    }

    /// Number of records [`run_experiment`] will produce.
    pub fn expected_record_count(&self) -> usize {
        let cells = self.seeds * self.trials * self.nc_list.len();
        match self.protocol {
            Protocol::SingleC | Protocol::BlindSingleC => cells * self.n_iter,
            Protocol::TwoPhase => cells * self.m_list.as_ref().map_or(0, Vec::len),
            Protocol::BlindTwoPhase => {
                cells * self.m_list.as_ref().map_or(0, Vec::len) * self.n_iter
            }
        }
    }
}

/// Labeled, pairwise independent RNG substreams of one master seed.
#[derive(Clone, Copy, Debug)]
pub struct SeedScheme {
    master: u64,
}

impl SeedScheme {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    /// Deterministic stream for a label and index tuple.
    pub fn stream(&self, label: &str, indices: &[u64]) -> ChaCha8Rng {
        let mut state = splitmix64(self.master ^ fnv1a64(label.as_bytes()));
        for &index in indices {
            state = splitmix64(state ^ index);
        }
        ChaCha8Rng::seed_from_u64(state)
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    seed: u32,
    trial: u32,
    nc: usize,
    m: Option<usize>,
}

/// Run every cell of the experiment grid and return records in canonical
/// order. Cells execute in parallel on the current rayon pool; each cell owns
/// its RNG streams, so results do not depend on the degree of parallelism.
///
/// With `timing` enabled, every record carries the wall time of its cell;
/// this is the one knob that intentionally breaks byte-determinism.
pub fn run_experiment(
    spec: &ExperimentSpec,
    master_seed: u64,
    timing: bool,
) -> Result<Vec<ResultRecord>> {
    spec.validate()?;
    let scheme = SeedScheme::new(master_seed);

    let mut cells = Vec::new();
    for seed in 0..spec.seeds as u32 {
        for trial in 0..spec.trials as u32 {
            for &nc in &spec.nc_list {
                match &spec.m_list {
                    Some(ms) => {
                        for &m in ms {
                            cells.push(Cell { seed, trial, nc, m: Some(m) });
                        }
                    }
                    None => cells.push(Cell { seed, trial, nc, m: None }),
                }
            }
        }
    }

    let nested: Vec<Vec<ResultRecord>> = cells
        .par_iter()
        .map(|cell| run_cell(spec, &scheme, *cell, timing))
        .collect::<Result<_>>()?;

    let mut records: Vec<ResultRecord> = nested.into_iter().flatten().collect();
    records.sort_by_key(ResultRecord::sort_key);
    Ok(records)
}

fn build_config(spec: &ExperimentSpec) -> Result<ReservoirConfig> {
    let mut config = ReservoirConfig::new(spec.num_qubits, spec.noise.sim_mode())?
        .with_scaling(spec.scaling)?;
    if let Some(shots) = spec.n_shots {
        config = config.with_shots(shots)?;
    }
    Ok(config)
}

fn run_cell(
    spec: &ExperimentSpec,
    scheme: &SeedScheme,
    cell: Cell,
    timing: bool,
) -> Result<Vec<ResultRecord>> {
    let started = std::time::Instant::now();
    let tag = spec.noise.stream_tag();
    let seed = cell.seed as u64;
    let trial = cell.trial as u64;
    let nc_index = cell.nc as u64;

    let config = build_config(spec)?;
    let mut keys_rng = scheme.stream("keys", &[tag, seed, trial, nc_index]);
    let keys = KeySet::generate(cell.nc, spec.num_qubits, &mut keys_rng);
    let profile_a = {
        let mut rng = scheme.stream("noise_profile_a", &[tag, seed, trial]);
        NoiseProfile::sample(spec.num_qubits, &mut rng)
    };
    let profile_b = {
        let mut rng = scheme.stream("noise_profile_b", &[tag, seed, trial]);
        NoiseProfile::sample(spec.num_qubits, &mut rng)
    };
    let mut train_rng = scheme.stream("plaintexts_train", &[tag, seed, trial, nc_index]);
    let mut shot_rng = scheme.stream(
        "shot_noise",
        &[tag, seed, trial, nc_index, cell.m.unwrap_or(0) as u64],
    );

    let mut records = Vec::new();
    let trace_records = |records: &mut Vec<ResultRecord>, trace: &AlsTrace, m: Option<u32>| {
        for (i, loss) in trace.loss.iter().enumerate() {
            records.push(ResultRecord {
                experiment: spec.id,
                seed: cell.seed,
                trial: cell.trial,
                nc: cell.nc as u32,
                m,
                iteration: Some(i as u32 + 1),
                mse_path1: trace.mse_path1[i],
                mse_path2: trace.mse_path2[i],
                loss: *loss,
                wall_time_s: 0.0,
            });
        }
    };

    match spec.protocol {
        Protocol::SingleC => {
            let plaintext = Plaintext::random(cell.nc, &mut train_rng)?;
            let trace = als_single_c(
                &plaintext, &keys, &profile_a, &profile_b, &config, spec.lambda, spec.n_iter,
                &mut shot_rng,
            )?;
            trace_records(&mut records, &trace, None);
        }
        Protocol::BlindSingleC => {
            let plaintext = Plaintext::random(cell.nc, &mut train_rng)?;
            let run = blind_single_c(
                &plaintext, &keys, &profile_a, &profile_b, &config, spec.lambda, spec.n_iter,
                &mut shot_rng,
            )?;
            trace_records(&mut records, &run.trace, None);
        }
        Protocol::TwoPhase => {
            let m = cell.m.expect("validated: two_phase has m_list");
            let training: Vec<Plaintext> = (0..m)
                .map(|_| Plaintext::random(cell.nc, &mut train_rng))
                .collect::<Result<_>>()?;
            let mut test_rng = scheme.stream("plaintexts_test", &[tag, seed, trial, nc_index]);
            let tests: Vec<Plaintext> = (0..spec.n_test)
                .map(|_| Plaintext::random(cell.nc, &mut test_rng))
                .collect::<Result<_>>()?;

            let mut path_mse = [0.0f64; 2];
            let paths = [
                (PathKeys { encode: keys.a.clone(), secret: keys.beta.clone() }, &profile_a, &profile_b),
                (PathKeys { encode: keys.b.clone(), secret: keys.alpha.clone() }, &profile_b, &profile_a),
            ];
            for (slot, (path, enc_profile, dec_profile)) in path_mse.iter_mut().zip(&paths) {
                let decoder = two_phase_train(
                    &training,
                    path,
                    enc_profile,
                    dec_profile,
                    &config,
                    spec.poly_degree,
                    spec.lambda,
                    &mut shot_rng,
                )?;
                *slot = two_phase_evaluate(
                    &decoder,
                    &tests,
                    path,
                    enc_profile,
                    dec_profile,
                    &config,
                    spec.lambda,
                    &mut shot_rng,
                )?;
            }
            records.push(ResultRecord {
                experiment: spec.id,
                seed: cell.seed,
                trial: cell.trial,
                nc: cell.nc as u32,
                m: Some(m as u32),
                iteration: None,
                mse_path1: path_mse[0],
                mse_path2: path_mse[1],
                loss: 0.5 * (path_mse[0] + path_mse[1]),
                wall_time_s: 0.0,
            });
        }
        Protocol::BlindTwoPhase => {
            let m = cell.m.expect("validated: blind_two_phase has m_list");
            let training: Vec<Plaintext> = (0..m)
                .map(|_| Plaintext::random(cell.nc, &mut train_rng))
                .collect::<Result<_>>()?;
            let run = blind_two_phase(
                &training,
                &keys,
                &profile_a,
                &profile_b,
                &config,
                spec.poly_degree,
                spec.lambda,
                spec.n_iter,
                &mut shot_rng,
            )?;
            trace_records(&mut records, &run.trace, Some(m as u32));
        }
    }

    if timing {
        let elapsed = started.elapsed().as_secs_f64();
        for record in &mut records {
            record.wall_time_s = elapsed;
        }
    }
    Ok(records)
}

/// Plain-text summary: mean loss of the final record of every
/// (seed, trial, nc [, m]) group, aggregated per grid point.
pub fn summary_table(records: &[ResultRecord]) -> String {
    use std::collections::BTreeMap;
    let mut finals: BTreeMap<(u32, Option<u32>, u32, u32), &ResultRecord> = BTreeMap::new();
    for record in records {
        let key = (record.nc, record.m, record.seed, record.trial);
        match finals.get(&key) {
            Some(existing) if existing.iteration >= record.iteration => {}
            _ => {
                finals.insert(key, record);
            }
        }
    }
    let mut groups: BTreeMap<(u32, Option<u32>), Vec<f64>> = BTreeMap::new();
    for ((nc, m, _, _), record) in &finals {
        groups.entry((*nc, *m)).or_default().push(record.loss);
    }
    let mut out = String::from("nc        m     runs  mean_final_loss\n");
    for ((nc, m), losses) in groups {
        let mean = losses.iter().sum::<f64>() / losses.len() as f64;
        let m_text = m.map_or_else(|| "-".to_string(), |v| v.to_string());
        out.push_str(&format!("{nc:<8}  {m_text:<4}  {:<4}  {mean:.6e}\n", losses.len()));
    }
    out
}
