//! `bme`: batch front end for the Bayesian mean estimation experiments.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 runtime
//! failure, 4 verification failure.

mod commands;
mod error;
mod output;
mod settings;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use bme_core::experiments::RiskWeighting;
use bme_core::EnsembleKind;
use clap::{Args, Parser, Subcommand};

use error::CliError;
use settings::{parse_weighting, Settings, SourceList, UsizeList};

#[derive(Debug, Parser)]
#[command(name = "bme", version, about = "Bayesian mean estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Haar-random basis measurements over a (d, N) grid.
    RunHaar(Flags),
    /// Design-sampled bases against Haar-random bases at d = 2.
    CompareDesigns(Flags),
    /// Pretty good measurement: naive-vs-Bayes scatter, or identity checks.
    Pgm {
        #[command(flatten)]
        flags: Flags,
        /// Check the posterior, marginal and Petz identities on a random corpus.
        #[arg(long)]
        verify: bool,
    },
    /// Closed-form infidelity bounds.
    Bounds(Flags),
    /// Re-bin the avg_fidelity column of a per-cell CSV.
    Histogram {
        #[command(flatten)]
        flags: Flags,
        /// Per-cell CSV written by run-haar.
        input: Option<PathBuf>,
    },
    /// Sample an ensemble and write it as JSON.
    GenEnsemble(Flags),
}

/// Flags shared by all commands. Each overrides the matching config-file
/// key; commands ignore flags they have no use for.
#[derive(Debug, Args)]
struct Flags {
    /// JSON config file, or a manifest from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Stream index for single-ensemble commands.
    #[arg(long)]
    stream: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "bme-out")]
    out: PathBuf,
    /// Dimensions: `2,4,8` or `2:8`.
    #[arg(long)]
    d: Option<UsizeList>,
    /// Measurement counts: `1,10,50` or `1:10`.
    #[arg(long = "n-shots")]
    n_shots: Option<UsizeList>,
    #[arg(long)]
    ensemble: Option<EnsembleKind>,
    /// Ensemble size.
    #[arg(long = "L")]
    ensemble_size: Option<usize>,
    /// Experiments per grid cell.
    #[arg(long = "I")]
    experiments: Option<usize>,
    /// `posterior` or `prior`.
    #[arg(long, value_parser = parse_weighting)]
    weighting: Option<RiskWeighting>,
    #[arg(long)]
    bins: Option<usize>,
    /// Comma list of haar, pauli, 2design, clifford.
    #[arg(long)]
    sources: Option<SourceList>,
    #[arg(long)]
    trials: Option<usize>,
    /// Ensembles in the identity corpus.
    #[arg(long)]
    corpus: Option<usize>,
    /// Fix the input state to this ensemble index instead of redrawing it.
    #[arg(long)]
    rho0: Option<usize>,
    #[arg(long = "ensemble-file")]
    ensemble_file: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
    /// Record per-experiment wall time instead of 0.
    #[arg(long)]
    timing: bool,
}

impl Flags {
    fn resolve(self, input: Option<PathBuf>) -> Result<(Settings, PathBuf), CliError> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = self.$field {
                    s.$field = v;
                }
            };
            ($field:ident, some) => {
                if let Some(v) = self.$field {
                    s.$field = Some(v);
                }
            };
        }
        set!(seed);
        set!(stream);
        set!(weighting);
        set!(workers, some);
        set!(ensemble, some);
        set!(ensemble_size, some);
        set!(experiments, some);
        set!(bins, some);
        set!(trials, some);
        set!(corpus, some);
        set!(rho0, some);
        set!(ensemble_file, some);
        if let Some(UsizeList(v)) = self.d {
            s.d = Some(v);
        }
        if let Some(UsizeList(v)) = self.n_shots {
            s.n_shots = Some(v);
        }
        if let Some(SourceList(v)) = self.sources {
            s.sources = Some(v);
        }
        if input.is_some() {
            s.input = input;
        }
        s.svg |= self.svg;
        s.timing |= self.timing;
        Ok((s, self.out))
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::RunHaar(f) => {
            let (s, out) = f.resolve(None)?;
            commands::run_haar(s, &out)
        }
        Command::CompareDesigns(f) => {
            let (s, out) = f.resolve(None)?;
            commands::compare_designs(s, &out)
        }
        Command::Pgm { flags, verify } => {
            let (s, out) = flags.resolve(None)?;
            commands::pgm(s, &out, verify)
        }
        Command::Bounds(f) => {
            let (s, out) = f.resolve(None)?;
            commands::bounds(s, &out)
        }
        Command::Histogram { flags, input } => {
            let (s, out) = flags.resolve(input)?;
            commands::histogram(s, &out)
        }
        Command::GenEnsemble(f) => {
            let (s, out) = f.resolve(None)?;
            commands::gen_ensemble(s, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bme: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
