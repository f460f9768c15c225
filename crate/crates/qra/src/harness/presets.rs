//! The 24 preset experiment grids and the flat key-value spec file format.

use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{ExperimentSpec, NoiseCondition, Protocol};

/// Valid preset ids.
pub const EXPERIMENT_IDS: std::ops::RangeInclusive<u32> = 1..=24;

/// Grid size selector: `Full` reproduces the published grids, `Desk` trims
/// seeds and lists so a whole experiment finishes on one machine quickly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Full,
    Desk,
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text {
            "full" => Ok(Scale::Full),
            "desk" => Ok(Scale::Desk),
            other => Err(Error::Config(format!("unknown scale '{other}' (full|desk)"))),
        }
    }
}

const NC_STANDARD: [usize; 10] = [5, 8, 10, 12, 15, 18, 20, 25, 30, 35];
const NC_DENSE_TWO_PHASE: [usize; 5] = [5, 10, 15, 20, 30];
const M_TWO_PHASE: [usize; 11] = [10, 20, 30, 50, 80, 120, 160, 189, 220, 260, 300];
const M_DENSE_TWO_PHASE: [usize; 4] = [10, 30, 60, 100];

/// Default regularization: the Single-C readouts use a vanishing ridge, the
/// two-phase and blind variants use 1e-6.
pub fn default_lambda(protocol: Protocol) -> f64 {
    match protocol {
        Protocol::SingleC => 1e-10,
        _ => 1e-6,
    }
}

fn default_n_test(noise: NoiseCondition) -> usize {
    match noise {
        NoiseCondition::ResetShot => 3,
        _ => 20,
    }
}

/// Construct the preset spec for an experiment id at the requested scale.
pub fn experiment_spec(id: u32, scale: Scale) -> Result<ExperimentSpec> {
    if !EXPERIMENT_IDS.contains(&id) {
        return Err(Error::Config(format!("experiment id must be in 1..=24, got {id}")));
    }
    let protocol = match id {
        1 | 3 | 5 => Protocol::SingleC,
        2 | 4 | 6 | 13..=18 => Protocol::TwoPhase,
        7..=12 => Protocol::BlindSingleC,
        _ => Protocol::BlindTwoPhase,
    };
    let noise = match id {
        1 | 2 | 7 | 10 | 13 | 16 | 19 | 22 => NoiseCondition::Ideal,
        3 | 4 | 8 | 11 | 14 | 17 | 20 | 23 => NoiseCondition::Shot,
        _ => NoiseCondition::ResetShot,
    };
    let num_qubits = match id {
        1..=6 => 10,
        7..=9 | 13..=15 | 19..=21 => 5,
        _ => 7,
    };
    let seeds = if id == 6 { 4 } else { 16 };
    let nc_list: Vec<usize> = if id == 6 {
        NC_DENSE_TWO_PHASE.to_vec()
    } else {
        NC_STANDARD.to_vec()
    };
    let m_list = match protocol {
        Protocol::TwoPhase if id == 6 => Some(M_DENSE_TWO_PHASE.to_vec()),
        Protocol::TwoPhase => Some(M_TWO_PHASE.to_vec()),
        Protocol::BlindTwoPhase => Some(vec![150]),
        _ => None,
    };
    let n_shots = match noise {
        NoiseCondition::Ideal => None,
        _ => Some(1000),
    };

    let mut spec = ExperimentSpec {
        id,
        protocol,
        noise,
        num_qubits,
        seeds,
        trials: 3,
        nc_list,
        m_list,
        n_shots,
        poly_degree: 7,
        lambda: default_lambda(protocol),
        n_iter: 40,
        n_test: default_n_test(noise),
        scaling: 1.0,
    };

    if scale == Scale::Desk {
        spec.seeds = spec.seeds.min(4);
        spec.trials = 1;
        spec.nc_list.retain(|nc| [5, 10, 20].contains(nc));
        if let Some(ms) = &mut spec.m_list {
            if protocol == Protocol::TwoPhase {
                let keep: &[usize] = if id == 6 { &[10, 30] } else { &[30, 300] };
                ms.retain(|m| keep.contains(m));
            }
        }
    }
    spec.validate()?;
    Ok(spec)
}

/// Parse a flat `key = value` spec file. Lists are comma-separated; blank
/// lines and lines starting with `#` are skipped.
pub fn parse_spec_file(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_spec_text(&text)
}

fn parse_spec_text(text: &str) -> Result<ExperimentSpec> {
    let mut id = 0u32;
    let mut protocol = None;
    let mut noise = None;
    let mut num_qubits = None;
    let mut seeds = None;
    let mut trials = None;
    let mut nc_list = None;
    let mut m_list = None;
    let mut n_shots = None;
    let mut poly_degree = None;
    let mut lambda = None;
    let mut n_iter = None;
    let mut n_test = None;
    let mut scaling = None;

    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value', got '{line}'", line_no + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| Error::Config(format!("line {}: bad {what} '{value}'", line_no + 1));
        match key {
            "id" => id = value.parse().map_err(|_| bad("id"))?,
            "protocol" => protocol = Some(Protocol::parse(value)?),
            "noise" => noise = Some(NoiseCondition::parse(value)?),
            "num_qubits" => num_qubits = Some(value.parse().map_err(|_| bad("num_qubits"))?),
            "seeds" => seeds = Some(value.parse().map_err(|_| bad("seeds"))?),
            "trials" => trials = Some(value.parse().map_err(|_| bad("trials"))?),
            "nc_list" => nc_list = Some(parse_list(value).ok_or_else(|| bad("nc_list"))?),
            "m_list" => m_list = Some(parse_list(value).ok_or_else(|| bad("m_list"))?),
            "n_shots" => n_shots = Some(value.parse().map_err(|_| bad("n_shots"))?),
            "k" | "poly_degree" => {
                poly_degree = Some(value.parse().map_err(|_| bad("poly_degree"))?)
            }
            "lambda" => lambda = Some(value.parse().map_err(|_| bad("lambda"))?),
            "n_iter" => n_iter = Some(value.parse().map_err(|_| bad("n_iter"))?),
            "n_test" => n_test = Some(value.parse().map_err(|_| bad("n_test"))?),
            "scaling" => scaling = Some(value.parse().map_err(|_| bad("scaling"))?),
            other => {
                return Err(Error::Config(format!("line {}: unknown key '{other}'", line_no + 1)))
            }
        }
    }

    let protocol = protocol.ok_or_else(|| Error::Config("spec file misses 'protocol'".into()))?;
    let noise = noise.ok_or_else(|| Error::Config("spec file misses 'noise'".into()))?;
    let spec = ExperimentSpec {
        id,
        protocol,
        noise,
        num_qubits: num_qubits.ok_or_else(|| Error::Config("spec file misses 'num_qubits'".into()))?,
        seeds: seeds.ok_or_else(|| Error::Config("spec file misses 'seeds'".into()))?,
        trials: trials.unwrap_or(1),
        nc_list: nc_list.ok_or_else(|| Error::Config("spec file misses 'nc_list'".into()))?,
        m_list,
        n_shots: match noise {
            NoiseCondition::Ideal => n_shots,
            _ => n_shots.or(Some(1000)),
        },
        poly_degree: poly_degree.unwrap_or(7),
        lambda: lambda.unwrap_or_else(|| default_lambda(protocol)),
        n_iter: n_iter.unwrap_or(40),
        n_test: n_test.unwrap_or_else(|| default_n_test(noise)),
        scaling: scaling.unwrap_or(1.0),
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_list(value: &str) -> Option<Vec<usize>> {
    value
        .split(',')
        .map(|item| item.trim().parse().ok())
        .collect()
}
