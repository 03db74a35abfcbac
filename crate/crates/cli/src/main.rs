use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crossbandit::environments::{read_auction_log, trim_auction_log};
use crossbandit::harness::{
    aggregate, emit_csv, scaling_fit, sweep, write_file, write_invariants, write_scaling, write_sweep,
    write_trajectory, Algorithm, EnvKind, ExperimentConfig, Parallelism, WORKERS_ENV,
};
use crossbandit::partial::{invariant_report, ClGraph};
use crossbandit::{Error, Result};

#[derive(Parser)]
#[command(name = "crossbandit", version, about = "Contextual bandit experiments with cross-learning")]
#[command(after_help = format!(
    "Set {WORKERS_ENV}=N to run replications on N worker threads.\n\
     Exit codes: 0 success, 2 configuration error, 3 data or I/O error."
))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated experiment and write its regret trajectory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Print clique cover, independence, acyclic subgraph and nu2 numbers
    /// of context graphs.
    Invariants {
        /// Graph file(s): a line with the vertex count, then one `u v` edge per line.
        #[arg(long, required = true, num_args = 1..)]
        graph: Vec<PathBuf>,
        /// Seed for the nu2 ascent.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Replay a logged first-price auction stream against a bidder.
    Replay {
        /// CSV with header `t,value,highest_other_bid`.
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        algo: Algorithm,
        /// Drop rows above this per-column quantile, then rescale to [0, 1].
        #[arg(long)]
        trim_quantile: Option<f64>,
        /// Rounds to replay; defaults to every row.
        #[arg(long)]
        horizon: Option<usize>,
        /// Base configuration for the remaining settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the exponent of final regret against the horizon.
    Scaling {
        #[arg(long)]
        config: PathBuf,
        /// Geometric horizon grid, e.g. 2000,4000,8000,16000.
        #[arg(long, value_delimiter = ',', required = true)]
        t_grid: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Final regret over a grid of values for one configuration key.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Output directory; overrides `output` in the configuration.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides `replications`.
    #[arg(long)]
    replications: Option<usize>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Run replications one after another on the calling thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(dir) = &self.output {
            cfg.output = Some(dir.clone());
        }
        if let Some(n) = self.replications {
            cfg.replications = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()
    }

    fn parallelism(&self) -> Parallelism {
        if self.sequential {
            Parallelism::Sequential
        } else {
            Parallelism::default()
        }
    }
}

/// Writes with `f` to `dir/name`, or to stdout without a directory.
fn emit(dir: Option<&Path>, name: &str, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match dir {
        Some(dir) => write_file(&dir.join(name), f),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).and_then(|_| lock.flush()).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn run(cfg: &ExperimentConfig, par: Parallelism) -> Result<()> {
    let results = crossbandit::harness::run_experiment_with(cfg, par)?;
    let agg = aggregate(&results)?;
    match &cfg.output {
        Some(dir) => {
            let (t, f) = emit_csv(&agg, dir)?;
            eprintln!("wrote {} and {}", t.display(), f.display());
        }
        None => emit(None, "", |w| write_trajectory(w, &agg))?,
    }
    eprintln!(
        "{} on {}: final regret {} +/- {} over {} replications",
        cfg.algorithm,
        cfg.env.as_str(),
        agg.final_mean(),
        agg.final_half_width(),
        agg.finals.len()
    );
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, common } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            common.apply(&mut cfg)?;
            run(&cfg, common.parallelism())
        }
        Command::Invariants { graph, seed, output } => {
            let reports = graph
                .iter()
                .map(|p| ClGraph::load(p).map(|g| invariant_report(&g, seed)))
                .collect::<Result<Vec<_>>>()?;
            match output {
                Some(path) => write_file(&path, |w| write_invariants(w, &reports)),
                None => emit(None, "", |w| write_invariants(w, &reports)),
            }
        }
        Command::Replay {
            log,
            algo,
            trim_quantile,
            horizon,
            config,
            common,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig::default(),
            };
            cfg.env = EnvKind::Replay;
            cfg.algorithm = algo;
            cfg.log = Some(log.clone());
            if trim_quantile.is_some() {
                cfg.trim_quantile = trim_quantile;
            }
            cfg.horizon = match horizon {
                Some(t) => t,
                None => {
                    let rows = read_auction_log(&log)?;
                    match cfg.trim_quantile {
                        Some(q) => trim_auction_log(&rows, q)?.len(),
                        None => rows.len(),
                    }
                }
            };
            common.apply(&mut cfg)?;
            run(&cfg, common.parallelism())
        }
        Command::Scaling { config, t_grid, common } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            common.apply(&mut cfg)?;
            let fit = scaling_fit(&cfg, &t_grid, common.parallelism())?;
            emit(cfg.output.as_deref(), "scaling.csv", |w| write_scaling(w, &fit))?;
            eprintln!(
                "exponent {} intercept {} r2 {} ({} points excluded)",
                fit.exponent,
                fit.intercept,
                fit.r_squared,
                fit.excluded.len()
            );
            Ok(())
        }
        Command::Sweep {
            config,
            param,
            grid,
            common,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            common.apply(&mut cfg)?;
            let result = sweep(&cfg, &param, &grid, common.parallelism())?;
            emit(cfg.output.as_deref(), "sweep.csv", |w| write_sweep(w, &result))?;
            let best = &result.rows[result.best];
            eprintln!("best {param} = {} with final regret {}", best.value, best.mean_final);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
