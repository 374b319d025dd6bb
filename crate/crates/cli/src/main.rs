use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qthin::run::RunOutcome;
use qthin::{report_speedup, run, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "qthin",
    version,
    about = "Array thinning through inverse-QFT probability readout"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover a known thinned layout from its pattern.
    Validate(RunArgs),
    /// Sweep input SNR over a known layout.
    Noise(RunArgs),
    /// Thin a Chebyshev reference over sidelobe levels and thresholds.
    Assess(RunArgs),
    /// Print the analytic speedup figures for N lattice positions.
    Speedup {
        #[arg(long)]
        n: usize,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

fn run_experiment(expected: qthin::config::Experiment, args: &RunArgs) -> Result<ExitCode, CliError> {
    let config = ExperimentConfig::from_path(&args.config)?;
    if config.experiment != expected {
        return Err(CliError::Config(format!(
            "config is for {:?}, not {:?}",
            config.experiment, expected
        )));
    }
    match run(&config, &args.out)? {
        RunOutcome::Validate(outcome) => {
            for (cell, recovered) in outcome.cells.iter().zip(&outcome.recovered) {
                match (&cell.report, &cell.error) {
                    (Some(r), _) => println!("eta={} K={} psi={:.3e} recovered={}", cell.eta, r.k, r.psi, recovered),
                    (None, Some(e)) => eprintln!("eta={}: {e}", cell.eta),
                    (None, None) => {}
                }
            }
            if outcome.cells.iter().any(|c| !c.is_feasible()) {
                return Ok(ExitCode::from(3));
            }
        }
        RunOutcome::Noise(outcome) => {
            for cell in &outcome.cells {
                println!(
                    "snr={} dB seed={} top_match={} gap={:.3e}",
                    cell.snr_db, cell.seed, cell.top_match, cell.gap_ratio
                );
            }
        }
        RunOutcome::Assess(outcome) => {
            for cell in &outcome.cells {
                match &cell.report {
                    Some(r) => println!(
                        "sll_ref={} eta={} K={} tau={:.2}% sll={} mean_sll={} violations={}",
                        cell.sll_ref_db.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
                        cell.eta,
                        r.k,
                        r.tau_percent,
                        r.sll_db.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into()),
                        r.mean_sll_db.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into()),
                        r.violations.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
                    ),
                    None => println!("{}: infeasible", cell.name),
                }
            }
        }
    }
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    use qthin::config::Experiment;

    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(args) => run_experiment(Experiment::Validate, args),
        Command::Noise(args) => run_experiment(Experiment::Noise, args),
        Command::Assess(args) => run_experiment(Experiment::Assess, args),
        Command::Speedup { n } => report_speedup(*n).map(|r| {
            println!("N = {} (analytic estimates, not measurements)", r.n);
            println!("N / ln N               {:.1}", r.ratio);
            println!("FFT operations N log2 N {}", r.fft_operations);
            match r.iqft_gates {
                Some(g) => println!("IQFT gates              {g}"),
                None => println!("IQFT gates              n/a (N is not a supported power of two)"),
            }
            ExitCode::SUCCESS
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(e.exit_code())
    })
}
