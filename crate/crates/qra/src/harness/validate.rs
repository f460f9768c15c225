//! Invariant suites behind the `validate` CLI subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::harness::records::emit_csv;
use crate::harness::{ExperimentSpec, NoiseCondition, Protocol};
use crate::reservoir::{apply_shot_noise, run_sequence, FeatureMatrix, NoiseProfile, ReservoirConfig};
use crate::state::{mixed_state_kraus_check, Axis, GateAngle, MixedState, SimMode};
use crate::stats::{wilcoxon_signed_rank, PairedSample};

/// Outcome of one invariant suite.
#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = std::result::Result<String, String>;

/// Run all invariant suites and collect their outcomes.
pub fn run_validation() -> Vec<SuiteResult> {
    let suites: [(&'static str, fn() -> Check); 6] = [
        ("kraus_completeness", kraus_completeness),
        ("cptp_trace_preservation", cptp_trace_preservation),
        ("pure_mixed_agreement", pure_mixed_agreement),
        ("shot_noise_variance_law", shot_noise_variance_law),
        ("wilcoxon_exact_enumeration", wilcoxon_exact_enumeration),
        ("csv_byte_determinism", csv_byte_determinism),
    ];
    suites
        .into_iter()
        .map(|(name, suite)| match suite() {
            Ok(detail) => SuiteResult { name, passed: true, detail },
            Err(detail) => SuiteResult { name, passed: false, detail },
        })
        .collect()
}

/// Sum K_k^dagger K_k = I for the reset channel, numerically within 1e-15.
fn kraus_completeness() -> Check {
    let mut worst = 0.0f64;
    for step in 0..=100 {
        let p = step as f64 / 100.0;
        worst = worst.max(mixed_state_kraus_check(p));
    }
    if worst <= 1e-15 {
        Ok(format!("max |sum K^dag K - I| = {worst:.2e}"))
    } else {
        Err(format!("completeness defect {worst:.2e} exceeds 1e-15"))
    }
}

/// Trace and Hermiticity preserved within 1e-12 over 1000 random gate and
/// channel applications.
fn cptp_trace_preservation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst_trace = 0.0f64;
    let mut worst_herm = 0.0f64;
    for _ in 0..1000 {
        let num_qubits = rng.random_range(1..=3usize);
        let mut state = MixedState::plus_state(num_qubits).map_err(|e| e.to_string())?;
        for _ in 0..rng.random_range(1..=6usize) {
            let qubit = rng.random_range(0..num_qubits);
            let angle = GateAngle::new(rng.random_range(-3.0..3.0)).map_err(|e| e.to_string())?;
            match rng.random_range(0..4u8) {
                0 => state.rotate(qubit, Axis::X, angle).map_err(|e| e.to_string())?,
                1 => state.rotate(qubit, Axis::Y, angle).map_err(|e| e.to_string())?,
                2 => state.rotate(qubit, Axis::Z, angle).map_err(|e| e.to_string())?,
                _ => state
                    .apply_reset_channel(qubit, rng.random::<f64>())
                    .map_err(|e| e.to_string())?,
            }
        }
        state
            .apply_reset_channel(rng.random_range(0..num_qubits), rng.random::<f64>())
            .map_err(|e| e.to_string())?;
        worst_trace = worst_trace.max((state.trace().re - 1.0).abs() + state.trace().im.abs());
        worst_herm = worst_herm.max(state.hermiticity_error());
    }
    if worst_trace <= 1e-12 && worst_herm <= 1e-12 {
        Ok(format!("max trace defect {worst_trace:.2e}, max asymmetry {worst_herm:.2e}"))
    } else {
        Err(format!("trace defect {worst_trace:.2e} or asymmetry {worst_herm:.2e} over 1e-12"))
    }
}

/// With every reset probability zero, mixed-mode features equal pure-mode
/// features within 1e-12 on random circuits.
fn pure_mixed_agreement() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa11ce);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let num_qubits = rng.random_range(1..=3usize);
        let profile = NoiseProfile::zeros(num_qubits);
        let len = rng.random_range(1..=4usize);
        let input: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let pure_cfg =
            ReservoirConfig::new(num_qubits, SimMode::Pure).map_err(|e| e.to_string())?;
        let mixed_cfg =
            ReservoirConfig::new(num_qubits, SimMode::Mixed).map_err(|e| e.to_string())?;
        let vp = run_sequence(&input, &profile, &pure_cfg).map_err(|e| e.to_string())?;
        let vm = run_sequence(&input, &profile, &mixed_cfg).map_err(|e| e.to_string())?;
        worst = worst.max((vp.as_matrix() - vm.as_matrix()).abs().max());
    }
    if worst <= 1e-12 {
        Ok(format!("max feature deviation {worst:.2e}"))
    } else {
        Err(format!("feature deviation {worst:.2e} exceeds 1e-12"))
    }
}

/// Empirical estimator variance matches (1 - <O>^2) / n_shots within 10%.
fn shot_noise_variance_law() -> Check {
    let n_shots = 1000u64;
    let draws = 100_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b5e55);
    let mut worst_rel = 0.0f64;
    for &o in &[0.0, 0.5, -0.5, 0.9, -0.9] {
        let features =
            FeatureMatrix::from_matrix(nalgebra::DMatrix::from_row_slice(1, 2, &[o, 1.0]));
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..draws {
            let est = apply_shot_noise(&features, n_shots, &mut rng)
                .map_err(|e| e.to_string())?
                .as_matrix()[(0, 0)];
            sum += est;
            sum_sq += est * est;
        }
        let mean = sum / draws as f64;
        let var = sum_sq / draws as f64 - mean * mean;
        let expected = (1.0 - o * o) / n_shots as f64;
        worst_rel = worst_rel.max((var - expected).abs() / expected);
    }
    if worst_rel <= 0.10 {
        Ok(format!("max relative deviation {:.1}%", worst_rel * 100.0))
    } else {
        Err(format!("variance deviates by {:.1}% (> 10%)", worst_rel * 100.0))
    }
}

/// The DP-based exact Wilcoxon p equals direct enumeration over all sign
/// assignments for n <= 10.
fn wilcoxon_exact_enumeration() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x317c0);
    let mut worst = 0.0f64;
    for _ in 0..300 {
        let n = rng.random_range(2..=10usize);
        let diffs: Vec<f64> = (0..n)
            .map(|_| {
                let v: f64 = rng.random_range(-4.0..4.0);
                let q = (v * 2.0).round() / 2.0;
                if q == 0.0 {
                    0.5
                } else {
                    q
                }
            })
            .collect();
        let sample =
            PairedSample::new(diffs.clone(), vec![0.0; n]).map_err(|e| e.to_string())?;
        let ours = wilcoxon_signed_rank(&sample).map_err(|e| e.to_string())?;

        let ranks = average_ranks(&diffs);
        let w_plus: f64 = diffs
            .iter()
            .zip(&ranks)
            .filter(|(d, _)| **d > 0.0)
            .map(|(_, r)| *r)
            .sum();
        let total: f64 = ranks.iter().sum();
        let (w_lo, w_hi) = (w_plus.min(total - w_plus), w_plus.max(total - w_plus));
        let mut hits = 0u64;
        for mask in 0..(1u64 << n) {
            let t: f64 = (0..n).filter(|&k| mask >> k & 1 == 1).map(|k| ranks[k]).sum();
            if t <= w_lo + 1e-9 || t >= w_hi - 1e-9 {
                hits += 1;
            }
        }
        let brute = (hits as f64 / (1u64 << n) as f64).min(1.0);
        worst = worst.max((ours.p_value - brute).abs());
    }
    if worst == 0.0 {
        Ok("DP p-values equal brute-force enumeration exactly".into())
    } else if worst < 1e-12 {
        Ok(format!("max |p - brute| = {worst:.2e}"))
    } else {
        Err(format!("p deviates from brute force by {worst:.2e}"))
    }
}

fn average_ranks(diffs: &[f64]) -> Vec<f64> {
    let n = diffs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| diffs[x].abs().partial_cmp(&diffs[y].abs()).expect("finite"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[order[j + 1]].abs() == diffs[order[i]].abs() {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Identical spec and master seed produce byte-identical CSV across two runs
/// and two thread-pool sizes.
fn csv_byte_determinism() -> Check {
    let spec = ExperimentSpec {
        id: 0,
        protocol: Protocol::SingleC,
        noise: NoiseCondition::Shot,
        num_qubits: 3,
        seeds: 2,
        trials: 2,
        nc_list: vec![2, 4],
        m_list: None,
        n_shots: Some(200),
        poly_degree: 7,
        lambda: 1e-10,
        n_iter: 4,
        n_test: 2,
        scaling: 1.0,
    };
    let run_with_threads = |threads: usize, tag: &str| -> std::result::Result<Vec<u8>, String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        let records = pool
            .install(|| crate::harness::run_experiment(&spec, 0xd5eed, false))
            .map_err(|e| e.to_string())?;
        let path = std::env::temp_dir()
            .join(format!("qra_validate_{}_{tag}.csv", std::process::id()));
        emit_csv(&records, &path).map_err(|e| e.to_string())?;
        let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        std::fs::remove_file(&path).ok();
        Ok(bytes)
    };
    let first = run_with_threads(1, "t1a")?;
    let second = run_with_threads(1, "t1b")?;
    let third = run_with_threads(4, "t4")?;
    if first == second && first == third {
        Ok(format!("{} identical bytes across runs and pool sizes", first.len()))
    } else {
        Err("CSV bytes differ across runs or thread counts".into())
    }
}
