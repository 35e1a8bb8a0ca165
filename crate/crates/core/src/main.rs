use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use euler_alignment::diagnostics::{compute_records, write_records_csv, RecordOptions};
use euler_alignment::experiments::{load_result, load_trajectory_dir, run, ScenarioResult};
use euler_alignment::model::{load_snapshot, ForceSpec};
use euler_alignment::onsager::{default_q_list, energy_budget};
use euler_alignment::{Error, Snapshot};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ealign",
    version,
    about = "Forced fractional Euler alignment scenarios"
)]
struct Cli {
    /// Root directory for scenario outputs.
    #[arg(long, global = true, env = "EALIGN_OUTPUT", default_value = "results")]
    output: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { config: PathBuf },
    /// Run every `*.toml` scenario in a directory.
    Sweep { dir: PathBuf },
    /// Print the diagnostics CSV of snapshot files (zero force assumed).
    Diagnose {
        #[arg(required = true)]
        snapshots: Vec<PathBuf>,
        /// Hölder exponents to include.
        #[arg(long = "gamma", value_delimiter = ',')]
        gammas: Vec<f64>,
    },
    /// Recompute the scale-by-scale energy budget of a result directory.
    Budget {
        dir: PathBuf,
        /// Largest `Q` of the sweep (default: the run's resolved range).
        #[arg(long)]
        q_max: Option<i32>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the check summary of a result directory.
    Report { dir: PathBuf },
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn print_result(r: &ScenarioResult) {
    println!(
        "scenario {} ({} snapshots, {} steps)",
        r.name, r.snapshot_count, r.steps
    );
    for c in &r.checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        println!(
            "  {verdict} {:<14} measured {:.6e} {} {:.6e}",
            c.name, c.measured, c.comparison, c.tolerance
        );
        for (k, v) in &c.details {
            println!("         {k} = {v:.6e}");
        }
    }
    println!("  output {}", r.output_dir.display());
}

fn verdict(r: &ScenarioResult) -> u8 {
    if r.passed() {
        0
    } else {
        EXIT_CHECK_FAILED
    }
}

fn run_one(config: &Path, output: &Path) -> u8 {
    match run(config, output) {
        Ok(r) => {
            print_result(&r);
            verdict(&r)
        }
        Err(e) => {
            eprintln!("{}: {e}", config.display());
            error_code(&e)
        }
    }
}

fn sweep(dir: &Path, output: &Path) -> Result<u8, Error> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Config(format!(
            "no scenario files in {}",
            dir.display()
        )));
    }
    let outcomes: Vec<(PathBuf, Result<ScenarioResult, Error>)> = files
        .into_par_iter()
        .map(|f| {
            let r = run(&f, output);
            (f, r)
        })
        .collect();
    let mut code = 0;
    for (file, r) in &outcomes {
        let c = match r {
            Ok(r) => {
                print_result(r);
                verdict(r)
            }
            Err(e) => {
                eprintln!("{}: {e}", file.display());
                error_code(e)
            }
        };
        code = code.max(c);
    }
    Ok(code)
}

fn diagnose(paths: &[PathBuf], gammas: Vec<f64>) -> Result<u8, Error> {
    let snapshots = paths
        .iter()
        .map(|p| Snapshot::new(load_snapshot(p)?.state))
        .collect::<Result<Vec<_>, Error>>()?;
    let records = compute_records(
        &snapshots,
        &ForceSpec::Zero,
        &RecordOptions {
            holder_gammas: gammas,
        },
    )?;
    let stdout = std::io::stdout();
    write_records_csv(stdout.lock(), &records).map_err(|e| Error::io("<stdout>", e))?;
    Ok(0)
}

fn budget(dir: &Path, q_max: Option<i32>, out: Option<&Path>) -> Result<u8, Error> {
    let (config, traj) = load_trajectory_dir(dir)?;
    if traj.snapshots.len() < 2 {
        return Err(Error::TooShort {
            what: "saved snapshots",
            min: 2,
            got: traj.snapshots.len(),
        });
    }
    let q_list: Vec<i32> = match q_max {
        Some(m) => (0..=m).collect(),
        None => default_q_list(&traj.first().state),
    };
    let report = energy_budget(&traj, &config.force_spec()?, &q_list, false)?;
    let mut buf = Vec::new();
    report
        .write_csv(&mut buf)
        .map_err(|e| Error::io("<memory>", e))?;
    match out {
        Some(p) => std::fs::write(p, &buf).map_err(|e| Error::io(p, e))?,
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|e| Error::io("<stdout>", e))?,
    }
    for (q, r) in report.relative_residuals() {
        eprintln!("Q = {q}: max relative residual {r:.3e}");
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Run { config } => Ok(run_one(config, &cli.output)),
        Command::Sweep { dir } => sweep(dir, &cli.output),
        Command::Diagnose { snapshots, gammas } => diagnose(snapshots, gammas.clone()),
        Command::Budget { dir, q_max, out } => budget(dir, *q_max, out.as_deref()),
        Command::Report { dir } => load_result(dir).map(|r| {
            print_result(&r);
            verdict(&r)
        }),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
