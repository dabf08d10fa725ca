//! Batch driver: spectra, ESQPT scans, quench runs with both engines,
//! phase-space snapshots and decay-law fits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "TCQUENCH_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "tcquench", version, about = "Quench dynamics in the fixed-M Tavis-Cummings model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Run configuration (key = value lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default ./out, or $TCQUENCH_OUT_DIR).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed grid size as NXxNP.
    #[arg(long, global = true)]
    pub seed_grid: Option<String>,
    /// Evaluation grid size as NXxNP.
    #[arg(long, global = true)]
    pub eval_grid: Option<String>,
    #[arg(long, global = true)]
    pub tau_max: Option<f64>,
    #[arg(long, global = true)]
    pub tau_samples: Option<usize>,
    /// Comma-separated snapshot times.
    #[arg(long, global = true, value_delimiter = ',')]
    pub snapshot_taus: Option<Vec<f64>>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Scaled spectrum and ⟨J_z⟩/j of all eigenstates across a λ/λ_c sweep.
    Spectrum,
    /// ⟨J_z⟩/j against ε at λ_f (or λ_i) with the ESQPT locator.
    JzScan,
    /// Exact survival probability and strength function.
    QuenchQm,
    /// Truncated-Wigner survival probability.
    QuenchTwa,
    /// Both engines on one τ grid.
    Compare,
    /// λ_f placing the initial packet centre on the ESQPT energy.
    TuneCritical,
    /// Wigner and Husimi fields at the snapshot times, both engines.
    Snapshot,
    /// Decay-law analysis of a survival CSV.
    Fit {
        /// Survival CSV with a tau column.
        #[arg(long)]
        input: PathBuf,
        /// Column to analyse (default p_qm, else the second column).
        #[arg(long)]
        column: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(3);
        }
    }
    match commands::run(&cli.command, &cli.common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
