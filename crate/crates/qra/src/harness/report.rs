//! Paired significance reports between two experiment record sets.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::harness::records::ResultRecord;
use crate::stats::{aggregate_seed, paired_t_test, wilcoxon_signed_rank, PairedSample};

/// Test results for one plaintext length.
#[derive(Clone, Debug)]
pub struct ReportRow {
    pub nc: u32,
    pub n_pairs: usize,
    pub t_statistic: f64,
    pub p_t: f64,
    pub w_statistic: f64,
    pub p_w: f64,
}

impl ReportRow {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_t < alpha || self.p_w < alpha
    }
}

/// Per-Nc paired tests on log10 of the final MSE, with the Bonferroni
/// threshold over all rows reported alongside the nominal level.
#[derive(Clone, Debug)]
pub struct SignificanceReport {
    pub rows: Vec<ReportRow>,
    pub alpha: f64,
    pub alpha_adjusted: f64,
}

impl fmt::Display for SignificanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "nc    pairs  t_stat      p_t       w_stat   p_w       alpha={} alpha_adj={:.4}",
            self.alpha, self.alpha_adjusted
        )?;
        for row in &self.rows {
            let marker = if row.significant(self.alpha_adjusted) {
                "**"
            } else if row.significant(self.alpha) {
                "*"
            } else {
                "n.s."
            };
            writeln!(
                f,
                "{:<5} {:<6} {:<11.4} {:<9.4} {:<8.2} {:<9.4} {marker}",
                row.nc, row.n_pairs, row.t_statistic, row.p_t, row.w_statistic, row.p_w
            )?;
        }
        Ok(())
    }
}

/// The final record of a (seed, trial) group: largest M first, then largest
/// iteration.
fn final_loss_per_trial(records: &[ResultRecord]) -> BTreeMap<(u32, u32, u32), f64> {
    let mut finals: BTreeMap<(u32, u32, u32), &ResultRecord> = BTreeMap::new();
    for record in records {
        let key = (record.nc, record.seed, record.trial);
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

/// Per-seed log10 of the trial-averaged final MSE, keyed by nc then seed.
fn per_seed_metric(records: &[ResultRecord]) -> Result<BTreeMap<u32, BTreeMap<u32, f64>>> {
    let finals = final_loss_per_trial(records);
    let mut trials: BTreeMap<(u32, u32), Vec<f64>> = BTreeMap::new();
    for ((nc, seed, _trial), loss) in finals {
        trials.entry((nc, seed)).or_default().push(loss);
    }
    let mut metric: BTreeMap<u32, BTreeMap<u32, f64>> = BTreeMap::new();
    for ((nc, seed), losses) in trials {
        let mean = aggregate_seed(&losses)?;
        if mean <= 0.0 {
            return Err(Error::Data(format!(
                "cannot take log10 of non-positive mean MSE {mean} (nc={nc}, seed={seed})"
            )));
        }
        metric.entry(nc).or_default().insert(seed, mean.log10());
    }
    Ok(metric)
}

/// Compare two experiments on log10 of the final MSE: per-Nc paired t and
/// Wilcoxon tests over the seed sets, which must match exactly.
pub fn significance_report(
    records_a: &[ResultRecord],
    records_b: &[ResultRecord],
    alpha: f64,
) -> Result<SignificanceReport> {
    if records_a.is_empty() || records_b.is_empty() {
        return Err(Error::Data("significance report needs records on both sides".into()));
    }
    let metric_a = per_seed_metric(records_a)?;
    let metric_b = per_seed_metric(records_b)?;

    let nc_a: Vec<u32> = metric_a.keys().cloned().collect();
    let nc_b: Vec<u32> = metric_b.keys().cloned().collect();
    if nc_a != nc_b {
        return Err(Error::Data(format!(
            "experiments cover different nc grids: {nc_a:?} vs {nc_b:?}"
        )));
    }

    let mut rows = Vec::new();
    for (nc, seeds_a) in &metric_a {
        let seeds_b = &metric_b[nc];
        let ids_a: Vec<u32> = seeds_a.keys().cloned().collect();
        let ids_b: Vec<u32> = seeds_b.keys().cloned().collect();
        if ids_a != ids_b {
            return Err(Error::Data(format!(
                "seed sets differ at nc={nc}: {ids_a:?} vs {ids_b:?}"
            )));
        }
        let a: Vec<f64> = seeds_a.values().cloned().collect();
        let b: Vec<f64> = seeds_b.values().cloned().collect();
        let sample = PairedSample::new(a, b)?;
        let t = paired_t_test(&sample)?;
        let w = wilcoxon_signed_rank(&sample)?;
        rows.push(ReportRow {
            nc: *nc,
            n_pairs: sample.len(),
            t_statistic: t.statistic,
            p_t: t.p_value,
            w_statistic: w.statistic,
            p_w: w.p_value,
        });
    }
    let m = rows.len().max(1);
    Ok(SignificanceReport { rows, alpha, alpha_adjusted: alpha / m as f64 })
}
