use std::path::PathBuf;
use std::process::ExitCode;

use brwlab::harness::{run, ExperimentConfig, Stage, Suite};
use brwlab::parallel::default_threads;
use brwlab::Error;
use clap::{Parser, Subcommand};

const EXIT_CONFIG: u8 = 2;
const EXIT_ACCEPTANCE: u8 = 3;
const EXIT_ABORT: u8 = 4;

/// Monte Carlo experiments on the minimum of a branching random walk.
#[derive(Parser, Debug)]
#[command(name = "brwlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output root; one subdirectory per manifest hash.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Root seed, overriding the configuration.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Minimum reports of every tree batch.
    Simulate,
    /// Tail regression and upper-bound profile.
    Tail,
    /// Limit-law fit and ECDF dumps.
    LimitLaw,
    /// Series estimate of c_* and its cross-check.
    Cstar,
    /// Renewal, local probability and big-jump reports of the spine walk.
    Rw,
    /// Free-energy traces and Gibbs statistics.
    Thermo,
    /// Many-to-one and martingale checks.
    Manytoone,
    /// Every stage plus the acceptance suite.
    Checkall,
}

impl Command {
    fn stages(self) -> Vec<Stage> {
        match self {
            Command::Simulate => vec![Stage::Simulate],
            Command::Tail => vec![Stage::Tail],
            Command::LimitLaw => vec![Stage::LimitLaw],
            Command::Cstar => vec![Stage::Cstar],
            Command::Rw => vec![Stage::Rw],
            Command::Thermo => vec![Stage::Thermo],
            Command::Manytoone => vec![Stage::ManyToOne],
            Command::Checkall => Stage::ALL.to_vec(),
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Vec<String>> {
    let mut cfg = match &cli.config {
        None => ExperimentConfig::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| vec![format!("cannot read {}: {e}", path.display())])?;
            ExperimentConfig::parse_unchecked(&text).map_err(|e| vec![e.to_string()])?
        }
    };
    if let Some(seed) = cli.seed {
        cfg.root_seed = seed;
    }
    if cli.threads == Some(0) {
        return Err(vec!["threads: must be at least 1".into()]);
    }
    let problems = cfg.problems();
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(problems)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(problems) => {
            eprintln!("configuration error ({} problem(s)):", problems.len());
            for p in problems {
                eprintln!("  {p}");
            }
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let out_root = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    let threads = cli.threads.unwrap_or_else(default_threads);
    let acceptance = matches!(cli.command, Command::Checkall);

    let suite = match Suite::new(cfg, threads) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let outcome = match run(&suite, &cli.command.stages(), acceptance) {
        Ok(o) => o,
        Err(Error::Aborted { .. }) => return ExitCode::from(EXIT_ABORT),
        Err(e @ Error::Config(_)) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    let dir = match outcome.write(&out_root) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    if let Some(results) = &outcome.acceptance {
        for c in results {
            println!("{}", c.line());
        }
    }
    println!("outputs: {}", dir.display());
    let aborted = outcome.aborted_total();
    if aborted > 0 {
        eprintln!("{aborted} replica(s) hit the population cap: {:?}", outcome.manifest.abort_counts);
    }
    if outcome.acceptance_failed() {
        ExitCode::from(EXIT_ACCEPTANCE)
    } else if aborted > 0 {
        ExitCode::from(EXIT_ABORT)
    } else {
        ExitCode::SUCCESS
    }
}
