//! Command-line entry point: run experiments, compare result files, and run
//! the invariant suites.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qra::harness::{
    emit_csv, experiment_spec, parse_spec_file, read_csv, run_experiment, significance_report,
    summary_table, Scale,
};
use qra::{Error, Result};

#[derive(Parser)]
#[command(name = "qra", about = "Quantum reservoir autoencoder simulation laboratory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScaleArg {
    Full,
    Desk,
}

impl From<ScaleArg> for Scale {
    fn from(value: ScaleArg) -> Self {
        match value {
            ScaleArg::Full => Scale::Full,
            ScaleArg::Desk => Scale::Desk,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Metric {
    /// log10 of the final mean squared error per seed.
    Log10FinalMse,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset experiment (1..=24) or a custom spec file.
    Run {
        /// Experiment id or path to a `key = value` spec file.
        #[arg(long)]
        exp: String,
        /// Grid size for preset experiments.
        #[arg(long, value_enum, default_value = "full")]
        scale: ScaleArg,
        /// Master seed for all derived random streams.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output directory for the CSV file.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Record per-cell wall times; this breaks byte-determinism of the
        /// output file.
        #[arg(long, default_value_t = false)]
        timing: bool,
    },
    /// Compare two result files with paired significance tests.
    Report {
        /// First results CSV.
        #[arg(long)]
        a: PathBuf,
        /// Second results CSV.
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value = "log10-final-mse")]
        metric: Metric,
        /// Nominal significance level.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Run the invariant suites and report pass/fail per suite.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { exp, scale, seed, out, threads, timing } => {
            run(exp, scale.into(), seed, out, threads, timing)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { a, b, metric: Metric::Log10FinalMse, alpha } => {
            let records_a = read_csv(&a)?;
            let records_b = read_csv(&b)?;
            let report = significance_report(&records_a, &records_b, alpha)?;
            print!("{report}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate => {
            let mut all_passed = true;
            for suite in qra::harness::run_validation() {
                let status = if suite.passed { "PASS" } else { "FAIL" };
                println!("{status}  {:<28} {}", suite.name, suite.detail);
                all_passed &= suite.passed;
            }
            if all_passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
    }
}

fn run(
    exp: String,
    scale: Scale,
    seed: u64,
    out: PathBuf,
    threads: usize,
    timing: bool,
) -> Result<()> {
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }

    let (spec, stem) = match exp.parse::<u32>() {
        Ok(id) => {
            let scale_name = if scale == Scale::Desk { "desk" } else { "full" };
            (experiment_spec(id, scale)?, format!("exp{id:02}_{scale_name}"))
        }
        Err(_) => {
            let path = PathBuf::from(&exp);
            let stem = path
                .file_stem()
                .map_or_else(|| "custom".to_string(), |s| s.to_string_lossy().into_owned());
            (parse_spec_file(&path)?, stem)
        }
    };

    eprintln!(
        "running {} ({} / {}), {} seeds x {} trials, {} expected records",
        stem,
        spec.protocol.as_str(),
        spec.noise.as_str(),
        spec.seeds,
        spec.trials,
        spec.expected_record_count()
    );
    let records = run_experiment(&spec, seed, timing)?;

    std::fs::create_dir_all(&out)
        .map_err(|source| Error::Io { path: out.clone(), source })?;
    let csv_path = out.join(format!("{stem}.csv"));
    emit_csv(&records, &csv_path)?;
    println!("{}", summary_table(&records));
    println!("wrote {} records to {}", records.len(), csv_path.display());
    Ok(())
}
