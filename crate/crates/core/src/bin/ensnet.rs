use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ensnet::cli;
use ensnet::config::Beta;
use ensnet::error::Result;

/// Classification by Gibbs-weighted ensembles of random networks.
#[derive(Parser)]
#[command(name = "ensnet", version, about)]
struct Cli {
    /// Worker threads (default: all cores). Output is identical for any value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an ensemble from a config and dataset and write the artifact.
    Build {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config's master_seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate an artifact at points, writing value, std_error, label_hat.
    Predict {
        #[arg(long)]
        artifact: PathBuf,
        /// Points CSV (x1..xN header; label column optional and ignored).
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reweight one sampled member set across betas and tabulate metrics.
    SweepBeta {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated betas; "inf" is the zero-temperature limit.
        #[arg(long, value_delimiter = ',', value_parser = parse_beta, required = true)]
        betas: Vec<Beta>,
        /// Labeled holdout CSV for out-of-sample accuracy.
        #[arg(long)]
        holdout: Option<PathBuf>,
        /// Write the CSV table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Standard-error decay over a member-count schedule at probe points.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated increasing member counts, e.g. 1000,4000,16000.
        #[arg(long, value_delimiter = ',', required = true)]
        schedule: Vec<u64>,
        #[arg(long)]
        probes: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare the Monte Carlo estimate against exact grid enumeration.
    Oracle {
        /// Config with a grid distribution.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        probes: PathBuf,
        /// Write a JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Deterministic holdout split of a dataset.
    Split {
        #[arg(long)]
        data: PathBuf,
        /// Fraction held out into --out-test, in (0,1).
        #[arg(long)]
        fraction: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_train: PathBuf,
        #[arg(long)]
        out_test: PathBuf,
    },
}

fn parse_beta(s: &str) -> std::result::Result<Beta, String> {
    if s == "inf" {
        return Ok(Beta::INFINITE);
    }
    let v: f64 = s.parse().map_err(|_| format!("invalid beta {s:?}"))?;
    Beta::new(v).map_err(|e| e.to_string())
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Build {
            config,
            data,
            out,
            seed,
        } => {
            print!("{}", cli::cmd_build(&config, &data, &out, seed)?);
            Ok(0)
        }
        Command::Predict {
            artifact,
            data,
            out,
        } => {
            print!("{}", cli::cmd_predict(&artifact, &data, &out)?);
            Ok(0)
        }
        Command::SweepBeta {
            config,
            data,
            betas,
            holdout,
            out,
            seed,
        } => {
            print!(
                "{}",
                cli::cmd_sweep_beta(&config, &data, &betas, holdout.as_deref(), out.as_deref(), seed)?
            );
            Ok(0)
        }
        Command::Convergence {
            config,
            data,
            schedule,
            probes,
            out,
            seed,
        } => {
            print!(
                "{}",
                cli::cmd_convergence(&config, &data, &schedule, &probes, out.as_deref(), seed)?
            );
            Ok(0)
        }
        Command::Oracle {
            config,
            data,
            probes,
            out,
            seed,
        } => {
            let outcome = cli::cmd_oracle(&config, &data, &probes, out.as_deref(), seed)?;
            print!("{}", outcome.stdout);
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if outcome.failed {
                eprintln!("error: at least one probe exceeded |z| = 5");
                Ok(1)
            } else {
                Ok(0)
            }
        }
        Command::Split {
            data,
            fraction,
            seed,
            out_train,
            out_test,
        } => {
            print!(
                "{}",
                cli::cmd_split(&data, fraction, seed, &out_train, &out_test)?
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = args.threads {
        builder = builder.num_threads(threads);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| dispatch(args.command)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
