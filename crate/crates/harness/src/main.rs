use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gensmooth_harness::config::{Config, ConfigError};
use gensmooth_harness::runner::{self, format_listing};
use gensmooth_harness::{report, sweep, verify};

/// Self-bounding-smoothness optimizers: parameters, runs, sweeps, checks.
#[derive(Parser)]
#[command(name = "gensmooth", version)]
struct Cli {
    /// Overrides `run.seed`, `sweep.base_seed` and `verify.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived algorithm parameters of a run config.
    Params { config: PathBuf },
    /// Run the driver once and write `trace.csv`.
    Run { config: PathBuf },
    /// Run a step-size sweep and write CSV tables and SVG charts.
    Sweep { config: PathBuf },
    /// Certify the catalog objectives.
    Verify { config: Option<PathBuf> },
}

enum Failure {
    Config(String),
    Check(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<report::ReportError> for Failure {
    fn from(e: report::ReportError) -> Self {
        Failure::Check(e.to_string())
    }
}

impl From<runner::RunError> for Failure {
    fn from(e: runner::RunError) -> Self {
        match e.exit_code() {
            2 => Failure::Config(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

fn create_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Check(format!("{}: {e}", dir.display())))
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Params { config } => {
            let cfg = Config::load(config)?.run_config()?.with_seed(cli.seed);
            print!("{}", format_listing(&runner::params(&cfg)?));
        }
        Command::Run { config } => {
            let cfg = Config::load(config)?.run_config()?.with_seed(cli.seed);
            let out = runner::run(&cfg)?;
            create_out(&cli.out)?;
            let path = cli.out.join("trace.csv");
            report::write_trace(&out.record, &path)?;
            print!("{}", format_listing(&out.listing));
            print!("{}", format_listing(&runner::summary(&out)));
            println!("trace={}", path.display());
        }
        Command::Sweep { config } => {
            let cfg = Config::load(config)?.sweep_config()?.with_seed(cli.seed);
            let result = sweep::run_sweep(&cfg);
            for path in report::write_sweep_outputs(&result, &cli.out)? {
                println!("wrote {}", path.display());
            }
            for t in &result.thresholds {
                let eta = t.eta.map_or("none".to_string(), report::real);
                println!("p={} c={} threshold_eta={eta}", t.p, t.c);
            }
        }
        Command::Verify { config } => {
            let mut cfg = match config {
                Some(p) => Config::load(p)?.verify_config(),
                None => Default::default(),
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let rep = verify::verify_suite(&cfg)?;
            println!("{rep}");
            if !rep.passed() {
                return Err(Failure::Check("verification failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
