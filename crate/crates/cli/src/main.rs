use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use imaginarity_core::repro::{
    self, config::load_flat, figures::run_figure, verify_table, Flat, ResultTable, ScenarioConfig,
};
use imaginarity_core::Error;

/// Nonlocal advantage and assisted distillation of imaginarity for two
/// qubits in a common lossy cavity.
#[derive(Parser, Debug)]
#[command(name = "imaginarity", version)]
struct Cli {
    /// TOML config file; dotted keys and tables flatten to the same names as --set.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one config key, e.g. --set R=0.4 --set sweep.points=41.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Optimizer seed; overrides the `seed` key.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// NAQI and assisted fidelity versus λt.
    Trajectory,
    /// Maximum over time (or stationary value) versus detuning or coupling.
    Sweep,
    /// Panel tables and a plot script for one figure preset (2-9).
    Figure { preset: u32 },
    /// MUB-sum bounds and their numerical verification.
    Bounds,
    /// Survival under repeated projective checks.
    Zeno,
    /// Re-derive random rows of emitted tables from their embedded config.
    Verify {
        #[arg(required = true)]
        tables: Vec<PathBuf>,
        #[arg(long, default_value_t = 3)]
        rows: usize,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. }
        | Error::InvalidParams(_)
        | Error::InvalidState(_)
        | Error::AngleRange(_)
        | Error::UnknownState(_)
        | Error::ZeroDetuning => 2,
        Error::StepRejected { .. }
        | Error::Truncation(_)
        | Error::NormViolation(_)
        | Error::DegenerateOutcome(_)
        | Error::NoCrossing => 3,
        Error::Table(_) | Error::Io(_) | Error::Csv(_) => 1,
    }
}

fn user_layer(cli: &Cli) -> Result<Flat, Error> {
    let mut sets = cli.sets.clone();
    if let Some(seed) = cli.seed {
        sets.push(format!("seed=\"{seed}\""));
    }
    load_flat(cli.config.as_deref(), &sets)
}

fn write_table(table: &ResultTable, out: &Path, name: &str) -> Result<(), Error> {
    std::fs::create_dir_all(out)?;
    let path = out.join(name);
    table.write(&path)?;
    println!("{}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, Error> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::Config {
                key: "--workers".into(),
                msg: "must be at least 1".into(),
            });
        }
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let user = user_layer(cli)?;
    let resolve = || ScenarioConfig::from_layers(&[&user]);
    match &cli.command {
        Command::Trajectory => write_table(&repro::run_trajectory(&resolve()?)?, &cli.out, "trajectory.csv")?,
        Command::Sweep => {
            let table = repro::run_sweep(&resolve()?)?;
            for (k, v) in table.meta.iter().filter(|(k, _)| k.starts_with("analysis.")) {
                println!("{k} = {v}");
            }
            write_table(&table, &cli.out, "sweep.csv")?;
        }
        Command::Figure { preset } => {
            for path in run_figure(*preset, &user, &cli.out)? {
                println!("{}", path.display());
            }
        }
        Command::Bounds => {
            let table = repro::run_bounds(&resolve()?)?;
            for (name, row) in ["tr", "re", "g"].iter().zip(&table.rows) {
                println!("{name}: bound {:.6} verified {:.6}", row[1], row[2]);
            }
            write_table(&table, &cli.out, "bounds.csv")?;
        }
        Command::Zeno => write_table(&repro::run_zeno(&resolve()?)?, &cli.out, "zeno.csv")?,
        Command::Verify { tables, rows, tolerance } => {
            let mut all = true;
            for path in tables {
                let report = verify_table(&ResultTable::read(path)?, *rows, *tolerance)?;
                let status = if report.passed() { "ok" } else { "MISMATCH" };
                println!(
                    "{}: rows {:?} max deviation {:.3e} ({status})",
                    path.display(),
                    report.rows,
                    report.max_deviation
                );
                all &= report.passed();
            }
            return Ok(all);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
