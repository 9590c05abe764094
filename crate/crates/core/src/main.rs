//! Command-line harness: run scenarios, verify the acceptance suite, emit
//! reports. Exit codes: 0 success, 1 check failure, 2 configuration error,
//! 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dyson_lab::error::DysonError;
use dyson_lab::harness::checks;
use dyson_lab::harness::scenario::{self, Scenario};

#[derive(Parser)]
#[command(
    name = "dyson-lab",
    version,
    about = "Spectral solver and verification harness for the nonlocal transport equation ∂ₜu + ∂ₓ(u(H[u]+b)) = ε∂ₓₓu"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file (or a suite file listing several) and write the
    /// run record, CSV and stored fields.
    Run {
        /// Scenario TOML, or a suite TOML with `scenarios = [...]` paths.
        scenario: PathBuf,
        /// Output directory (default `runs/`).
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Run the acceptance suite (or a named subset) and report verdicts.
    Verify {
        /// Criterion group or name (operators, line, balance, oracle, torus,
        /// drift, or a criterion name). Empty = full suite.
        #[arg(long)]
        suite: Option<String>,
        /// Where to write the table and the verdict file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-emit a completed run in another format.
    Report {
        /// Directory holding a `run.json` produced by `run`.
        run_dir: PathBuf,
        #[arg(long)]
        format: String,
    },
}

#[derive(serde::Deserialize)]
struct SuiteFile {
    scenarios: Vec<PathBuf>,
}

fn exit_code_for(err: &DysonError) -> u8 {
    match err {
        DysonError::Config(_) | DysonError::InvalidParameter(_) => 2,
        DysonError::ResolutionFailure { .. }
        | DysonError::BlowUp { .. }
        | DysonError::CharacteristicsFailure { .. } => 3,
        _ => 2,
    }
}

fn suite_parallelism() -> usize {
    std::env::var("DYSON_LAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn run_one(path: &std::path::Path, out: &std::path::Path) -> Result<bool, DysonError> {
    let scenario = Scenario::from_file(path)?;
    let run = scenario::run_scenario(&scenario)?;
    let dir = out.join(&scenario.name);
    scenario::write_run(&run, &dir)?;
    println!("scenario '{}' -> {}", scenario.name, dir.display());
    for v in &run.verdicts {
        println!(
            "  {} {:<20} {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.detail
        );
    }
    Ok(run.all_passed())
}

fn cmd_run(path: PathBuf, out: PathBuf) -> Result<bool, DysonError> {
    let text = std::fs::read_to_string(&path)?;
    if let Ok(suite) = toml::from_str::<SuiteFile>(&text) {
        // suite: run scenarios concurrently, capped by DYSON_LAB_THREADS
        let base = path.parent().map(PathBuf::from).unwrap_or_default();
        let paths: Vec<PathBuf> = suite.scenarios.iter().map(|p| base.join(p)).collect();
        let cap = suite_parallelism().min(paths.len().max(1));
        let results = std::sync::Mutex::new(Vec::new());
        let next = std::sync::atomic::AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..cap {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if i >= paths.len() {
                        break;
                    }
                    let r = run_one(&paths[i], &out);
                    results.lock().unwrap().push(r);
                });
            }
        });
        let mut all = true;
        for r in results.into_inner().unwrap() {
            all &= r?;
        }
        Ok(all)
    } else {
        run_one(&path, &out)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<bool, DysonError> = match cli.command {
        Command::Run { scenario, out } => cmd_run(scenario, out),
        Command::Verify { suite, out } => (|| {
            let report = checks::verify(suite.as_deref())?;
            print!("{}", report.table());
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("verify-report.txt"), report.table())?;
                let json = serde_json::to_string_pretty(&report)
                    .map_err(|e| DysonError::Io(e.to_string()))?;
                std::fs::write(dir.join("verify-verdicts.json"), json)?;
            }
            Ok(report.all_passed())
        })(),
        Command::Report { run_dir, format } => (|| {
            let run = scenario::read_run(&run_dir)?;
            let written = scenario::report(&run, &format, &run_dir)?;
            for p in written {
                println!("wrote {}", p.display());
            }
            Ok(true)
        })(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
