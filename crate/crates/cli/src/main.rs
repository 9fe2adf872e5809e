use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use transv_cli::{emit_report, load_scenarios, render, render_trace, run_battery_with, Format, RunOptions, CHECKS, ESTIMATORS};

/// Estimate transversality-type constants and check their inequalities on
/// the scenarios of a TOML file.
#[derive(Parser)]
#[command(name = "transv", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Print the estimator and check names accepted in scenario files.
    #[arg(long)]
    list_estimators: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario of a file.
    Run {
        file: PathBuf,
        /// Directory for report.<ext> and traces/; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Scenarios evaluated concurrently (0 = one per core).
        #[arg(long, default_value_t = 0)]
        parallel: usize,
        /// Replace the seed of every estimator.
        #[arg(long)]
        seed_override: Option<u64>,
        /// Write one CSV per AP run to <out>/traces.
        #[arg(long, requires = "out")]
        dump_traces: bool,
        /// Fill the runtime_ms column (the output is then not reproducible).
        #[arg(long)]
        timings: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.list_estimators {
        println!("estimators:");
        for (n, d) in ESTIMATORS {
            println!("  {n:<12} {d}");
        }
        println!("checks:");
        for (n, d) in CHECKS {
            println!("  {n:<20} {d}");
        }
        return ExitCode::SUCCESS;
    }
    let Some(Command::Run { file, out, format, parallel, seed_override, dump_traces, timings }) = cli.command else {
        eprintln!("nothing to do; see `transv --help`");
        return ExitCode::from(2);
    };

    let mut scenarios = match load_scenarios(&file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = seed_override {
        scenarios.iter_mut().for_each(|s| s.set_seed(seed));
    }
    info!("{} scenarios from {}", scenarios.len(), file.display());
    let report = run_battery_with(&scenarios, RunOptions { parallelism: parallel, timings, keep_traces: dump_traces });

    let written = match &out {
        None => {
            print!("{}", render(&report, format));
            Ok(())
        }
        Some(dir) => std::fs::create_dir_all(dir)
            .and_then(|_| emit_report(&report, format, dir.join(format!("report.{}", format.extension()))))
            .and_then(|_| {
                if !dump_traces {
                    return Ok(());
                }
                let tdir = dir.join("traces");
                std::fs::create_dir_all(&tdir)?;
                report.traces.iter().try_for_each(|(name, t)| std::fs::write(tdir.join(format!("{name}.csv")), render_trace(t)))
            }),
    };
    if let Err(e) = written {
        eprintln!("cannot write report: {e}");
        return ExitCode::from(2);
    }
    let m = &report.summary;
    eprintln!("{} scenarios, {} rows: {} passed, {} failed, {} unchecked", m.scenarios, m.rows, m.passed, m.failed, m.unchecked);
    ExitCode::from(report.exit_code() as u8)
}
