//! `nonsep`: learn a program for a task directory and report the search.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use nonsep_core::combiner::emit_asp_encoding;
use nonsep_core::engine::{learn_task, LearnConfig, LearnStatus, Mode};
use nonsep_core::oracle::brute_force_optimal;
use nonsep_core::task::load_task;
use nonsep_core::Cost;

const EXIT_OPTIMAL: u8 = 0;
const EXIT_TIMEOUT: u8 = 1;
const EXIT_NO_SOLUTION: u8 = 2;
const EXIT_ERROR: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "nonsep", version, about = "Learn optimal Datalog programs from examples")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    /// Task directory holding bias.pl, bk.pl, exs.pl and optionally ground.toml.
    #[arg(long, value_name = "DIR")]
    task: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Combo)]
    mode: ModeArg,
    /// Largest program size, in literals.
    #[arg(long, default_value_t = 20)]
    max_size: usize,
    /// Wall-clock limit in seconds.
    #[arg(long, value_name = "SECONDS")]
    timeout: Option<f64>,
    /// Write the final combine encoding to PATH.
    #[arg(long, value_name = "PATH")]
    emit_asp: Option<PathBuf>,
    /// Print per-stage statistics.
    #[arg(long)]
    stats: bool,
    /// Only print the final solution block.
    #[arg(long)]
    quiet: bool,
    /// Leave wall-clock figures out of the output.
    #[arg(long)]
    no_timing: bool,
    /// Worker threads for testing.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exhaustive search for the optimal cost (small tasks only).
    #[command(hide = true)]
    Oracle {
        #[arg(long, value_name = "DIR")]
        task: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_size: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Combo,
    Baseline,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("error: {}", msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "));
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let outcome = match &cli.command {
        Some(Command::Oracle { task, max_size }) => oracle(task, *max_size),
        None => learn(&cli),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn learn(cli: &Cli) -> Result<u8> {
    let start = Instant::now();
    let Some(dir) = &cli.task else { bail!("--task DIR is required") };
    let timeout = match cli.timeout {
        Some(t) if !(t.is_finite() && t >= 0.0) => bail!("--timeout must be a non-negative number of seconds"),
        t => t.map(Duration::from_secs_f64),
    };
    let task = load_task(dir).with_context(|| format!("cannot load task {}", dir.display()))?;
    let config = LearnConfig {
        max_size: cli.max_size,
        timeout,
        mode: match cli.mode {
            ModeArg::Combo => Mode::Combo,
            ModeArg::Baseline => Mode::Baseline,
        },
        threads: cli.threads,
        ..Default::default()
    };
    let quiet = cli.quiet;
    let res = learn_task(&task, &config, &mut |e| {
        if !quiet {
            println!("{e}");
        }
    })?;
    print!("{}", report::solution_block(&res));
    if cli.stats {
        print!("{}", report::stats_block(&res.stats, !cli.no_timing));
    }
    if !cli.no_timing {
        println!("Total execution time: {:.2}s", start.elapsed().as_secs_f64());
    }
    if !res.best.is_empty() {
        write_file(&dir.join("solution.pl"), &format!("{}\n", res.best))?;
    }
    if let Some(path) = &cli.emit_asp {
        write_file(path, &emit_asp_encoding(&res.pool, res.bound))?;
    }
    Ok(match res.status {
        LearnStatus::Optimal => EXIT_OPTIMAL,
        LearnStatus::TimedOut => EXIT_TIMEOUT,
        LearnStatus::NoSolution => EXIT_NO_SOLUTION,
    })
}

fn oracle(dir: &Path, max_size: usize) -> Result<u8> {
    let task = load_task(dir).with_context(|| format!("cannot load task {}", dir.display()))?;
    let res = brute_force_optimal(&task.kb, &task.examples, &task.bias, Cost(max_size))?;
    match (res.optimum_cost, res.witness) {
        (Some(cost), Some(w)) => {
            println!("Optimal size: {cost}");
            println!("Optimal programs: {}", res.num_optima);
            println!("{w}");
            Ok(EXIT_OPTIMAL)
        }
        _ => {
            println!("No solution of size at most {max_size}");
            Ok(EXIT_NO_SOLUTION)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
