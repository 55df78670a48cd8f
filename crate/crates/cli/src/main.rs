use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vne_cli::{emit_report, render, run_scenario, run_scenario_text, CliError, Format, Overrides, Report, BUNDLED};

#[derive(Parser)]
#[command(name = "vne", version, about = "Finite von Neumann coupling laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        scenario: PathBuf,
        /// Report destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every bundled scenario.
    VerifyAll {
        /// Directory receiving one report per scenario.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Slack allowed in verified inequalities.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Omit the generation time and per-task wall clock.
    #[arg(long)]
    no_timestamp: bool,
}

impl Common {
    fn overrides(&self, seed: Option<u64>) -> Overrides {
        Overrides {
            seed,
            tol: self.tol,
            max_iter: self.max_iter,
            no_timestamp: self.no_timestamp,
        }
    }
}

fn summary(name: &str, r: &Report) -> String {
    let tag = if r.all_passed() { "PASS" } else { "FAIL" };
    format!(
        "{tag} {name}: {}/{} tasks passed, {} with solver failures",
        r.summary.passed, r.summary.tasks, r.summary.solver_failures
    )
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            common,
            seed,
        } => {
            let r = run_scenario(&scenario, &common.overrides(seed))?;
            match out {
                Some(path) => {
                    emit_report(&r, common.format, &path)?;
                    eprintln!("{}", summary(&scenario.display().to_string(), &r));
                }
                None => print!("{}", render(&r, common.format)),
            }
            Ok(r.exit_code())
        }
        Command::VerifyAll { out, common } => {
            if let Some(dir) = &out {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            }
            let mut code = 0;
            for (name, text) in BUNDLED {
                let r = run_scenario_text(text, &common.overrides(None))?;
                println!("{}", summary(name, &r));
                if let Some(dir) = &out {
                    let ext = match common.format {
                        Format::Json => "json",
                        Format::Csv => "csv",
                    };
                    let stem = name.trim_end_matches(".json");
                    emit_report(&r, common.format, &dir.join(format!("{stem}.report.{ext}")))?;
                }
                code = code.max(r.exit_code());
            }
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("vne: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
