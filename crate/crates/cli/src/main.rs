use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use carathedyn_core::harness::{display_clean, list_fixtures, run, Report, RunConfig, SystemSource, Task};
use carathedyn_core::Error;
use clap::{ArgGroup, Parser, ValueEnum};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Pressure,
    Leaf,
    Conformality,
    Cocycle,
    Product,
    TwoSided,
    Srb,
    Pushforward,
    All,
    /// Print the bundled fixtures and their oracle pressures.
    List,
}

/// Carathéodory-cover verification suites for symbolic suspension flows.
#[derive(Debug, Parser)]
#[command(name = "carathedyn", version)]
#[command(group(ArgGroup::new("source").args(["fixture", "system"])))]
struct Cli {
    command: Command,

    /// Bundled fixture name (FULL2, GOLD, ROOF2, BERN13, SRB3, ...).
    #[arg(long)]
    fixture: Option<String>,

    /// System definition file (TOML).
    #[arg(long)]
    system: Option<PathBuf>,

    /// Cover cutoff(s) T; repeat or comma-separate for a schedule.
    #[arg(long = "cutoff", value_delimiter = ',')]
    cutoffs: Vec<f64>,

    #[arg(long)]
    depth_cap: Option<usize>,

    /// Tolerance on the critical value.
    #[arg(long)]
    alpha_tol: Option<f64>,

    /// Per-check tolerance override, e.g. `--tol gibbs_star=5`.
    #[arg(long = "tol", value_parser = parse_tol)]
    tolerances: Vec<(String, f64)>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Directory for the JSON report and CSV tables.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let v: f64 = v.parse().map_err(|e| format!("{v}: {e}"))?;
    Ok((k.to_string(), v))
}

fn task_of(c: Command) -> Option<Task> {
    Some(match c {
        Command::Pressure => Task::Pressure,
        Command::Leaf => Task::Leaf,
        Command::Conformality => Task::Conformality,
        Command::Cocycle => Task::Cocycle,
        Command::Product => Task::Product,
        Command::TwoSided => Task::TwoSided,
        Command::Srb => Task::Srb,
        Command::Pushforward => Task::Pushforward,
        Command::All => Task::All,
        Command::List => return None,
    })
}

fn write_outputs(dir: &Path, report: &Report) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report).map_err(std::io::Error::other)?;
    let path = dir.join(format!("{}_{}.json", report.fixture, report.config.task.name()));
    fs::write(&path, json + "\n")?;
    for t in &report.tables {
        fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv())?;
    }
    fs::write(
        dir.join(format!("{}_{}_summary.txt", report.fixture, report.config.task.name())),
        report.summary(),
    )?;
    Ok(path)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = carathedyn_core::par::init_from_env() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let Some(task) = task_of(cli.command) else {
        return match list_fixtures() {
            Ok(list) => {
                for f in list {
                    println!("{:<7} P = {:>12.9}  {}", f.name, display_clean(f.oracle_pressure), f.description);
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_FAIL)
            }
        };
    };
    let source = match (cli.fixture, cli.system) {
        (Some(name), None) => SystemSource::Fixture(name),
        (None, Some(path)) => SystemSource::File(path),
        _ => {
            eprintln!("error: give exactly one of --fixture NAME or --system FILE");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let mut config = RunConfig::new(source, task);
    config.cutoffs = cli.cutoffs;
    config.depth_cap = cli.depth_cap;
    config.alpha_tol = cli.alpha_tol;
    config.tolerances = cli.tolerances.into_iter().collect::<BTreeMap<_, _>>();
    config.seed = cli.seed;
    config.out_dir = cli.out.clone();

    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_) | Error::Io(_) | Error::DepthCapTooSmall { .. } | Error::InvalidSystem(_) => EXIT_USAGE,
                _ => EXIT_FAIL,
            };
            return ExitCode::from(code);
        }
    };
    print!("{}", report.summary());
    if let Some(dir) = &cli.out {
        match write_outputs(dir, &report) {
            Ok(path) => println!("report: {}", path.display()),
            Err(e) => {
                eprintln!("error: writing {}: {e}", dir.display());
                return ExitCode::from(EXIT_USAGE);
            }
        }
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
