use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use msmaxwell::cli::{self, convergence_csv, write_text};
use msmaxwell::em_core::MediumSpec;
use msmaxwell::{Error, Result};

#[derive(Parser)]
#[command(name = "msmaxwell", version, about = "Multisymplectic box schemes for 1D Maxwell equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write snapshot CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output.directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refine dx and dt together and report observed orders.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the discrete conservation law on a random tangent pair.
    MscCheck {
        #[arg(long)]
        config: PathBuf,
        /// Two seeds, one per tangent; 0 gives a zero tangent.
        #[arg(long = "seed", required = true)]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vainberg defect of a discretised operator at two resolutions.
    AdjointCheck {
        #[arg(long)]
        op: String,
        #[arg(long, default_value = "vacuum")]
        medium: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = cli::load_config(&config)?;
            let report = cli::run(&cfg, out.as_deref())?;
            println!("{}", report.summary());
        }
        Command::Convergence { config, levels, out } => {
            let cfg = cli::load_config(&config)?;
            let rows = cli::convergence_study(&cfg, levels)?;
            let csv = convergence_csv(&rows);
            let dir = out.unwrap_or_else(|| cfg.output.directory.clone());
            std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
            write_text(&dir.join("convergence.csv"), &csv)?;
            print!("{csv}");
        }
        Command::MscCheck { config, seeds, out } => {
            let seeds: [u64; 2] = seeds.try_into().map_err(|s: Vec<u64>| {
                Error::Validation(format!("msc-check needs exactly two --seed values (got {})", s.len()))
            })?;
            let cfg = cli::load_config(&config)?;
            let report = msmaxwell::cli::msc_check(&cfg, seeds)?;
            let dir = out.unwrap_or_else(|| cfg.output.directory.clone());
            std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
            let path = dir.join("msc_residual.csv");
            write_text(&path, &report.to_csv())?;
            println!(
                "conservation residual: max {:.3e}, scale {:.3e}, relative {:.3e}, worst cell {:.3e}\n  cells written to {}",
                report.max_abs,
                report.scale,
                report.relative,
                report.max_cell_relative(),
                path.display()
            );
        }
        Command::AdjointCheck { op, medium, n, out } => {
            let medium: MediumSpec = medium.parse()?;
            let report = cli::adjoint_check(&op, &medium, n)?;
            let csv = report.to_csv();
            if let Some(path) = out {
                write_text(&path, &csv)?;
            }
            print!("{csv}");
            let ratio = |v: Option<f64>| v.map_or("undefined".into(), |v| format!("{v:.4}"));
            println!(
                "# defect ratio {}, mismatch ratio {}",
                ratio(report.defect_ratio()),
                ratio(report.mismatch_ratio())
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
