use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use superchannel::harness::{emit_results, load_results, run_experiment, ExperimentConfig, OutputFormat, RunOptions};
use superchannel::Error;

#[derive(Parser)]
#[command(name = "superchannel", version, about = "Superchannel joint-DSP experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration file without running anything.
    Validate { config: PathBuf },
    /// Run every cell of the sweep.
    Run {
        config: PathBuf,
        /// Output path, `-` for stdout.
        #[arg(long, default_value = "-")]
        out: PathBuf,
        /// csv or json-lines.
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
        /// Run a single seed instead of the configured list.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the expanded sweep grid.
    SweepTable { config: PathBuf },
    /// Convert a result table (.csv or json-lines) into another format.
    Emit {
        input: PathBuf,
        #[arg(long, default_value = "-")]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
    },
}

fn report(e: &Error) {
    match e {
        Error::Validation(problems) => {
            eprintln!("invalid configuration:");
            for p in problems {
                eprintln!("  - {p}");
            }
        }
        other => eprintln!("error: {other}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => ExperimentConfig::load(&config).and_then(|c| c.validate()).map(|_| {
            println!("ok");
            0
        }),
        Command::Run { config, out, format, seed, jobs } => (|| {
            let cfg = ExperimentConfig::load(&config)?;
            let table = run_experiment(&cfg, &RunOptions { seed_override: seed, jobs })?;
            emit_results(&table, format, &out)?;
            let flagged = table.flagged();
            if flagged > 0 {
                eprintln!("{flagged} of {} rows flagged", table.rows.len());
                Ok(2)
            } else {
                Ok(0)
            }
        })(),
        Command::SweepTable { config } => ExperimentConfig::load(&config).map(|cfg| {
            let modes: Vec<&str> = cfg.sweep.modes.iter().map(|m| m.as_str()).collect();
            println!("beta,enob,format,symbol_rate,modes,seeds,batches");
            for p in cfg.grid() {
                println!("{},{},{},{},{},{},{}", p.beta, p.enob, p.format, p.symbol_rate, modes.join(";"), cfg.seeds.len(), cfg.batches);
            }
            0
        }),
        Command::Emit { input, out, format } => load_results(&input).and_then(|t| emit_results(&t, format, &out)).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            report(&e);
            ExitCode::from(1)
        }
    }
}
