use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use peeriv::cli::{self, Command, EstimateArgs, Outcome, RunConfig, SimulateArgs};
use peeriv::{EstimateOptions, EstimatorChoice, ModeFilter, SimConfig};

/// Leave-one-out IV estimation of teammate peer effects.
#[derive(Parser, Debug)]
#[command(name = "peeriv", version, about)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Draw a synthetic panel with known peer coefficient.
    Simulate(SimulateCli),
    /// Estimate the peer effect from a match panel.
    Estimate(EstimateCli),
}

#[derive(Args, Debug)]
struct SimulateCli {
    /// Simulation config (JSON); omitted fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Records file (.csv or .jsonl).
    #[arg(long)]
    output: PathBuf,
    /// Ground-truth sidecar (default: <output>.truth.json).
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct EstimateCli {
    /// Records file (.csv or .jsonl).
    #[arg(long)]
    input: PathBuf,
    /// JSON report; the text table is written alongside with a .txt extension.
    #[arg(long)]
    output: PathBuf,
    /// duos, trios, quads or all.
    #[arg(long, default_value = "all")]
    mode: ModeFilter,
    /// Keep only duos whose members did not queue as a party.
    #[arg(long)]
    algorithmic_pairs: bool,
    /// ols, 2sls or both.
    #[arg(long, default_value = "both")]
    estimator: EstimatorChoice,
    /// Also write the estimation sample as CSV.
    #[arg(long)]
    eligible_output: Option<PathBuf>,
}

fn to_run_config(cli: Cli) -> peeriv::Result<RunConfig> {
    let command = match cli.command {
        Cmd::Simulate(s) => {
            let mut config = match &s.config {
                Some(p) => cli::load_sim_config(p)?,
                None => SimConfig::default(),
            };
            if let Some(seed) = s.seed {
                config.seed = seed;
            }
            Command::Simulate(SimulateArgs {
                config,
                output: s.output,
                truth_output: s.truth,
            })
        }
        Cmd::Estimate(e) => Command::Estimate(EstimateArgs {
            input: e.input,
            output: e.output,
            options: EstimateOptions {
                mode: e.mode,
                algorithmic_pairs: e.algorithmic_pairs,
                estimator: e.estimator,
            },
            eligible_output: e.eligible_output,
        }),
    };
    Ok(RunConfig {
        command,
        threads: cli.threads,
    })
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let result = to_run_config(parsed).and_then(|rc| cli::run(&rc));
    match result {
        Ok(Outcome::Simulated(out)) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("wrote {} records", out.n_records);
            for f in &out.files {
                eprintln!("  {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Ok(Outcome::Estimated(out)) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", out.report.to_text_table());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
