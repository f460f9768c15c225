//! Result records and their CSV serialization.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One measured point of an experiment.
///
/// `m` is populated by the two-phase protocols, `iteration` by the iterative
/// ones. `wall_time_s` is 0 unless timing was requested, keeping default
/// output byte-deterministic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: u32,
    pub seed: u32,
    pub trial: u32,
    pub nc: u32,
    pub m: Option<u32>,
    pub iteration: Option<u32>,
    pub mse_path1: f64,
    pub mse_path2: f64,
    pub loss: f64,
    pub wall_time_s: f64,
}

impl ResultRecord {
    /// Canonical ordering used before emission so output does not depend on
    /// scheduling.
    pub fn sort_key(&self) -> (u32, u32, u32, u32, Option<u32>, Option<u32>) {
        (self.experiment, self.seed, self.trial, self.nc, self.m, self.iteration)
    }
}

/// Exact header of the emitted CSV.
pub const CSV_HEADER: &str =
    "experiment,seed,trial,nc,m,iteration,mse_path1,mse_path2,loss,wall_time_s";

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    match source.into_kind() {
        csv::ErrorKind::Io(io) => io_error(path, io),
        other => io_error(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Write records as UTF-8 CSV with LF line endings and shortest round-trip
/// float formatting. An empty record list produces a header-only file.
pub fn emit_csv(records: &[ResultRecord], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    if records.is_empty() {
        writer
            .write_record(CSV_HEADER.split(','))
            .map_err(|e| csv_error(path, e))?;
    }
    for record in records {
        writer.serialize(record).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| io_error(path, e))?;
    Ok(())
}

/// Parse a CSV file produced by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut records = Vec::new();
    for row in reader.deserialize() {
        records.push(row.map_err(|e| csv_error(path, e))?);
    }
    Ok(records)
}
