use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use qnlb_cli::{self as cli, CliError, Model, Protocol, SolveOptions};

#[derive(Parser)]
#[command(name = "qnlb", version, about = "Distillation values and optimality certificates for correlated nonlocal boxes")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Value of one protocol on n copies of a box.
    Value {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long, value_enum)]
        protocol: Protocol,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Both distillation summary tables.
    Tables {
        /// Also write the tables as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Protocol P and parity values over p in (0, 1] as CSV.
    Curve {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Checks the dual certificates; one JSON report per line.
    Certify {
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with = "grid")]
        p: Option<f64>,
        /// `default` or start:stop:step.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Solves the Gram-matrix program numerically.
    Solve {
        #[arg(long, required_unless_present = "program")]
        n: Option<usize>,
        #[arg(long, required_unless_present = "program")]
        p: Option<f64>,
        /// Program file written by `export`.
        #[arg(long, conflicts_with_all = ["n", "p"])]
        program: Option<PathBuf>,
        #[arg(long, default_value_t = SolveOptions::default().tol)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = SolveOptions::default().max_iterations)]
        max_iterations: usize,
    },
    /// Writes the Gram-matrix program as JSON.
    Export {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(line: &str, out: &Option<PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, format!("{line}\n")).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            writeln!(io::stdout(), "{line}")?;
            Ok(())
        }
    }
}

fn run(args: Args) -> cli::Result<bool> {
    match args.command {
        Command::Value { model, protocol, p, n } => {
            let record = cli::cmd_value(model, protocol, p, n)?;
            println!("{}", cli::to_json_line(&record)?);
        }
        Command::Tables { out } => {
            let tables = cli::cmd_tables();
            print!("{}", cli::render_tables(&tables));
            if out.is_some() {
                emit(&cli::to_json_line(&tables)?, &out)?;
            }
        }
        Command::Curve { n, grid, out } => {
            let points = cli::cmd_curve(n, grid, &out)?;
            eprintln!("wrote {} rows to {} (p = 0 excluded)", points.len(), out.display());
        }
        Command::Certify { n, p, grid } => {
            let points = match (p, grid) {
                (Some(p), _) => vec![p],
                (None, Some(spec)) => cli::parse_grid(&spec)?,
                (None, None) => cli::parse_grid("default")?,
            };
            let reports = cli::cmd_certify(n, &points)?;
            let mut stdout = io::stdout().lock();
            for r in &reports {
                writeln!(stdout, "{}", cli::to_json_line(r)?).map_err(anyhow::Error::from)?;
            }
            return Ok(reports.iter().all(|r| r.pass));
        }
        Command::Solve {
            n,
            p,
            program,
            tol,
            seed,
            max_iterations,
        } => {
            let opts = SolveOptions {
                tol,
                seed,
                max_iterations,
            };
            let result = match (program, n, p) {
                (Some(path), _, _) => cli::cmd_solve_file(&path, &opts)?,
                (None, Some(n), Some(p)) => cli::cmd_solve(n, p, &opts)?,
                _ => return Err(CliError::Usage("solve needs --n and --p, or --program".into())),
            };
            println!("{}", cli::to_json_line(&result)?);
            return Ok(result.converged);
        }
        Command::Export { n, p, out } => {
            let export = cli::cmd_export(n, p)?;
            emit(&cli::to_json_line(&export)?, &out)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
