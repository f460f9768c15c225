//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values. Run with `cargo test --test acceptance -- --nocapture`
//! to see the report.

use std::collections::BTreeMap;

use qra::harness::{
    run_experiment, run_validation, significance_report, ExperimentSpec, NoiseCondition,
    Protocol, ResultRecord,
};

const MASTER_SEED: u64 = 42;

fn base_spec(protocol: Protocol, noise: NoiseCondition, num_qubits: usize) -> ExperimentSpec {
    ExperimentSpec {
        id: 0,
        protocol,
        noise,
        num_qubits,
        seeds: 2,
        trials: 1,
        nc_list: vec![5],
        m_list: None,
        n_shots: match noise {
            NoiseCondition::Ideal => None,
            _ => Some(1000),
        },
        poly_degree: 7,
        lambda: match protocol {
            Protocol::SingleC => 1e-10,
            _ => 1e-6,
        },
        n_iter: 40,
        n_test: 20,
        scaling: 1.0,
    }
}

/// Final loss per (seed, trial): the record with the largest (m, iteration).
fn final_per_trial(records: &[ResultRecord], nc: u32) -> BTreeMap<(u32, u32), f64> {
    let mut finals: BTreeMap<(u32, u32), &ResultRecord> = BTreeMap::new();
    for record in records.iter().filter(|r| r.nc == nc) {
        let key = (record.seed, record.trial);
        let better = match finals.get(&key) {
            Some(existing) => (record.m, record.iteration) > (existing.m, existing.iteration),
            None => true,
        };
        if better {
            finals.insert(key, record);
        }
    }
    finals.into_iter().map(|(k, r)| (k, r.loss)).collect()
}

fn mean_final_loss(records: &[ResultRecord], nc: u32) -> f64 {
    let finals = final_per_trial(records, nc);
    assert!(!finals.is_empty(), "no records at nc={nc}");
    finals.values().sum::<f64>() / finals.len() as f64
}

/// Mean loss trace across all (seed, trial) runs at one nc.
fn mean_trace(records: &[ResultRecord], nc: u32, n_iter: u32) -> Vec<f64> {
    let mut sums = vec![0.0f64; n_iter as usize];
    let mut counts = vec![0usize; n_iter as usize];
    for record in records.iter().filter(|r| r.nc == nc) {
        if let Some(iter) = record.iteration {
            sums[iter as usize - 1] += record.loss;
            counts[iter as usize - 1] += 1;
        }
    }
    sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect()
}

fn stdev(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

#[test]
fn criterion_01_single_c_ideal_precision() {
    let mut spec = base_spec(Protocol::SingleC, NoiseCondition::Ideal, 10);
    spec.nc_list = vec![5, 10];
    let records = run_experiment(&spec, MASTER_SEED, false).unwrap();

    let mut worst_first = 0.0f64;
    let mut worst_final = 0.0f64;
    for nc in [5u32, 10] {
        for seed in 0..spec.seeds as u32 {
            let run: Vec<&ResultRecord> = records
                .iter()
                .filter(|r| r.nc == nc && r.seed == seed)
                .collect();
            let first = run.iter().find(|r| r.iteration == Some(1)).unwrap().loss;
            let last = run.iter().find(|r| r.iteration == Some(40)).unwrap().loss;
            worst_first = worst_first.max(first);
            worst_final = worst_final.max(last);
        }
    }
    assert!(worst_first < 1e-10, "loss after iteration 1 reached {worst_first:.3e}");
    assert!(worst_final < 1e-12, "final loss reached {worst_final:.3e}");
    println!(
        "ACCEPTANCE 01 single_c_ideal_precision: PASS (worst iter-1 loss {worst_first:.2e}, worst final loss {worst_final:.2e})"
    );
}

#[test]
fn criterion_02_shot_noise_floor() {
    let mut spec = base_spec(Protocol::SingleC, NoiseCondition::Shot, 10);
    spec.seeds = 4;
    let records = run_experiment(&spec, MASTER_SEED, false).unwrap();

    let mean = mean_final_loss(&records, 5);
    assert!(
        (1e-4..=1e-2).contains(&mean),
        "mean final MSE {mean:.3e} outside [1e-4, 1e-2]"
    );

    // Flat after iteration 10: late-trace scatter is no worse than 10x the
    // early scatter, and the two late halves agree in level.
    let trace = mean_trace(&records, 5, 40);
    let head = stdev(&trace[0..5]);
    let tail = stdev(&trace[9..40]);
    assert!(tail < 10.0 * head.max(1e-30), "tail stdev {tail:.3e} vs head {head:.3e}");
    let mid = trace[9..24].iter().sum::<f64>() / 15.0;
    let late = trace[24..40].iter().sum::<f64>() / 16.0;
    let drift = mid / late;
    assert!((1.0 / 3.0..=3.0).contains(&drift), "late-trace drift {drift:.3}");
    println!(
        "ACCEPTANCE 02 shot_noise_floor: PASS (mean final MSE {mean:.2e}, late drift {drift:.2})"
    );
}

#[test]
fn criterion_03_reset_shot_suppression() {
    // Fast ordering check at Nq=6, then the headline comparison at Nq=10.
    let small_shot = base_spec(Protocol::SingleC, NoiseCondition::Shot, 6);
    let small_mixed = base_spec(Protocol::SingleC, NoiseCondition::ResetShot, 6);
    let shot6 = mean_final_loss(&run_experiment(&small_shot, MASTER_SEED, false).unwrap(), 5);
    let mixed6 = mean_final_loss(&run_experiment(&small_mixed, MASTER_SEED, false).unwrap(), 5);
    assert!(
        mixed6 < 0.1 * shot6,
        "Nq=6 ordering violated: reset+shot {mixed6:.3e} vs shot {shot6:.3e}"
    );

    let shot_spec = base_spec(Protocol::SingleC, NoiseCondition::Shot, 10);
    let mixed_spec = base_spec(Protocol::SingleC, NoiseCondition::ResetShot, 10);
    let shot10 = mean_final_loss(&run_experiment(&shot_spec, MASTER_SEED, false).unwrap(), 5);
    let mixed10 = mean_final_loss(&run_experiment(&mixed_spec, MASTER_SEED, false).unwrap(), 5);
    assert!(mixed10 < 1e-8, "reset+shot MSE {mixed10:.3e} not below 1e-8");
    assert!(
        mixed10 <= 1e-4 * shot10,
        "suppression below 4 orders: {mixed10:.3e} vs {shot10:.3e}"
    );
    println!(
        "ACCEPTANCE 03 reset_shot_suppression: PASS (Nq=10 reset+shot {mixed10:.2e} vs shot {shot10:.2e}; Nq=6 {mixed6:.2e} vs {shot6:.2e})"
    );
}

#[test]
fn criterion_04_two_phase_learning_curve() {
    let mut spec = base_spec(Protocol::TwoPhase, NoiseCondition::Ideal, 10);
    spec.m_list = Some(vec![30, 300]);
    let records = run_experiment(&spec, MASTER_SEED, false).unwrap();

    let mean_at = |m: u32| {
        let subset: Vec<ResultRecord> =
            records.iter().filter(|r| r.m == Some(m)).cloned().collect();
        mean_final_loss(&subset, 5)
    };
    let at_30 = mean_at(30);
    let at_300 = mean_at(300);
    assert!(
        (4e-5..=1e-3).contains(&at_300),
        "held-out MSE at M=300 is {at_300:.3e}, outside [4e-5, 1e-3]"
    );
    assert!(at_300 < at_30, "M=300 ({at_300:.3e}) not below M=30 ({at_30:.3e})");
    println!(
        "ACCEPTANCE 04 two_phase_learning_curve: PASS (M=300 {at_300:.2e} < M=30 {at_30:.2e})"
    );
}

#[test]
fn criterion_05_two_phase_noise_invariance() {
    let mut ideal = base_spec(Protocol::TwoPhase, NoiseCondition::Ideal, 10);
    ideal.seeds = 4;
    ideal.m_list = Some(vec![300]);
    let mut shot = base_spec(Protocol::TwoPhase, NoiseCondition::Shot, 10);
    shot.seeds = 4;
    shot.m_list = Some(vec![300]);

    let ideal_records = run_experiment(&ideal, MASTER_SEED, false).unwrap();
    let shot_records = run_experiment(&shot, MASTER_SEED, false).unwrap();
    let report = significance_report(&ideal_records, &shot_records, 0.05).unwrap();
    let row = report.rows.iter().find(|r| r.nc == 5).unwrap();
    assert!(
        row.p_t > 0.01,
        "ideal vs shot is significant at p_t = {:.4} (t = {:.2})",
        row.p_t,
        row.t_statistic
    );
    println!(
        "ACCEPTANCE 05 two_phase_noise_invariance: PASS (paired t p = {:.3}, Wilcoxon p = {:.3})",
        row.p_t, row.p_w
    );
}

#[test]
fn criterion_06_phase_transition() {
    let mut spec = base_spec(Protocol::TwoPhase, NoiseCondition::Ideal, 5);
    spec.nc_list = vec![15, 25];
    spec.m_list = Some(vec![300]);
    let records = run_experiment(&spec, MASTER_SEED, false).unwrap();

    let below = mean_final_loss(&records, 15);
    let above = mean_final_loss(&records, 25);
    assert!(below < 1e-3, "MSE at Nc=15 is {below:.3e}, not below 1e-3");
    assert!(above > 0.05, "MSE at Nc=25 is {above:.3e}, not above 0.05");
    println!(
        "ACCEPTANCE 06 phase_transition: PASS (Nc=15 {below:.2e}, Nc=25 {above:.2e})"
    );
}

#[test]
fn criterion_07_blind_decoder_plateau() {
    let mut spec = base_spec(Protocol::BlindSingleC, NoiseCondition::Ideal, 5);
    spec.seeds = 4;
    spec.trials = 3;
    spec.nc_list = vec![20];
    let records = run_experiment(&spec, MASTER_SEED, false).unwrap();

    let mean = mean_final_loss(&records, 20);
    assert!(
        (0.15..=0.55).contains(&mean),
        "mean final MSE {mean:.3} outside [0.15, 0.55]"
    );
    let trace = mean_trace(&records, 20, 40);
    let at5 = trace[4];
    let at40 = trace[39];
    assert!(
        (at5 - at40).abs() <= 0.10 * at40,
        "no plateau by iteration 5: {at5:.3} vs {at40:.3}"
    );
    println!(
        "ACCEPTANCE 07 blind_decoder_plateau: PASS (mean final MSE {mean:.3}, iter-5 {at5:.3} vs iter-40 {at40:.3})"
    );
}

#[test]
fn criterion_08_blind_two_phase_failure() {
    let mut spec = base_spec(Protocol::BlindTwoPhase, NoiseCondition::Ideal, 5);
    spec.nc_list = vec![10];
    spec.m_list = Some(vec![150]);
    let records = run_experiment(&spec, MASTER_SEED, false).unwrap();

    let mean = mean_final_loss(&records, 10);
    assert!((0.4..=0.7).contains(&mean), "mean final MSE {mean:.3} outside [0.4, 0.7]");
    assert!(mean > 1.0 / 3.0, "not worse than the random baseline: {mean:.3}");
    let trace = mean_trace(&records, 10, 40);
    let improvement = (trace[0] - trace[39]) / trace[0];
    assert!(
        improvement < 0.05,
        "trace improved by {:.1}% over 40 iterations",
        improvement * 100.0
    );
    println!(
        "ACCEPTANCE 08 blind_two_phase_failure: PASS (mean final MSE {mean:.3}, trace improvement {:.2}%)",
        improvement * 100.0
    );
}

#[test]
fn criterion_09_blind_decryption_hierarchy() {
    let mut two_phase = base_spec(Protocol::TwoPhase, NoiseCondition::Ideal, 5);
    two_phase.nc_list = vec![10];
    two_phase.m_list = Some(vec![300]);
    let mut blind_single = base_spec(Protocol::BlindSingleC, NoiseCondition::Ideal, 5);
    blind_single.nc_list = vec![10];
    let mut blind_two = base_spec(Protocol::BlindTwoPhase, NoiseCondition::Ideal, 5);
    blind_two.nc_list = vec![10];
    blind_two.m_list = Some(vec![150]);

    let tp = mean_final_loss(&run_experiment(&two_phase, MASTER_SEED, false).unwrap(), 10);
    let bsc = mean_final_loss(&run_experiment(&blind_single, MASTER_SEED, false).unwrap(), 10);
    let btp = mean_final_loss(&run_experiment(&blind_two, MASTER_SEED, false).unwrap(), 10);
    assert!(
        tp < bsc && bsc < btp,
        "hierarchy violated: two_phase {tp:.3e}, blind_single_c {bsc:.3e}, blind_two_phase {btp:.3e}"
    );
    println!(
        "ACCEPTANCE 09 blind_decryption_hierarchy: PASS ({tp:.2e} < {bsc:.2e} < {btp:.2e})"
    );
}

#[test]
fn criterion_10_property_suites() {
    let results = run_validation();
    for suite in &results {
        assert!(suite.passed, "suite {} failed: {}", suite.name, suite.detail);
    }
    let summary: Vec<String> = results.iter().map(|s| s.name.to_string()).collect();
    println!(
        "ACCEPTANCE 10 property_suites: PASS ({} suites green: {})",
        results.len(),
        summary.join(", ")
    );
}
