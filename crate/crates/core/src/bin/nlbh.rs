use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use nonlocal_biharmonic::experiment::{run_study, ExperimentConfig, Study};
use nonlocal_biharmonic::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StudyArg {
    DeltaSweep,
    CSweep,
}

/// Solve the nonlocal biharmonic problem over a sweep of horizons or penalty strengths.
#[derive(Debug, Parser)]
#[command(name = "nlbh", version)]
struct Cli {
    /// Spatial dimension (1 or 2).
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Number of cells per axis.
    #[arg(long = "n-cells", default_value_t = 20)]
    n_cells: usize,
    /// Comma-separated horizons; defaults to a halving sequence for the chosen dimension.
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    /// Penalty strength for delta sweeps.
    #[arg(long)]
    c: Option<f64>,
    /// Comma-separated penalty strengths for c sweeps.
    #[arg(long = "c-values", value_delimiter = ',')]
    c_values: Option<Vec<f64>>,
    /// Built-in problem name.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, value_enum, default_value_t = StudyArg::DeltaSweep)]
    study: StudyArg,
    /// Output CSV path.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Write the assembled system of each run to this path.
    #[arg(long = "dump-system")]
    dump_system: Option<PathBuf>,
    /// Compare against a finer discrete solution with this many cells instead of the exact one.
    #[arg(long = "reference-n")]
    reference_n: Option<usize>,
}

impl Cli {
    fn into_config(self) -> ExperimentConfig {
        ExperimentConfig {
            dim: self.dim,
            n_cells: self.n_cells,
            deltas: self.deltas.unwrap_or_else(|| ExperimentConfig::default_deltas(self.dim)),
            c: self.c.unwrap_or_else(|| ExperimentConfig::default_c(self.dim)),
            c_values: self.c_values.unwrap_or_else(ExperimentConfig::default_c_values),
            problem: self.problem.unwrap_or_else(|| ExperimentConfig::default_problem(self.dim).into()),
            study: match self.study {
                StudyArg::DeltaSweep => Study::DeltaSweep,
                StudyArg::CSweep => Study::CSweep,
            },
            output_path: self.out,
            dump_system: self.dump_system,
            reference_n: self.reference_n,
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) | Error::InvalidArgument(_) | Error::InconsistentProblem { .. } => 2,
        Error::Io(_) | Error::Csv(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let config = Cli::parse().into_config();
    match run_study(&config) {
        Ok(summary) => {
            for r in &summary.reports {
                println!(
                    "N={} delta={:e} c={:e} rmse={:e} bd_error={:e} bd_dn_error={:e}",
                    r.n_cells, r.delta, r.c, r.rmse, r.bd_error, r.bd_dn_error
                );
            }
            if let Some(slope) = summary.slope {
                println!("slope={slope}");
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
