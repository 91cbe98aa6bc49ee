use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use friction_workbench::cli::{self, Diagnostic, OutputFormat, RunConfig, Suite, EXIT_USAGE};

#[derive(Clone, Copy, ValueEnum)]
enum Command {
    Derive,
    Ensemble,
    Kubo,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
    Latex,
}

/// Symbolic and numerical checks for moving-media friction and linear response.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Suite to run.
    #[arg(value_enum)]
    command: Command,
    /// Configuration file with `section.key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Truncation order in v/c (0..=3).
    #[arg(long)]
    order: Option<u32>,
    /// Ensemble sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Global seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE as u8)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let mut config = match &args.config {
        Some(path) => {
            let raw = match std::fs::read_to_string(path) {
                Ok(r) => r,
                Err(e) => return usage(format!("cannot read {}: {e}", path.display())),
            };
            match cli::validate_config(&raw) {
                Ok(c) => c,
                Err(e) => return usage(format!("{}:\n{e}", path.display())),
            }
        }
        None => RunConfig::default(),
    };
    if let Some(o) = args.order {
        config.order = o;
    }
    if let Some(n) = args.samples {
        config.ensemble.samples = n;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(f) = args.format {
        config.format = match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Latex => OutputFormat::Latex,
        };
    }
    if let Some(p) = args.out {
        config.out = Some(p);
    }
    let problems: Vec<String> = config
        .check()
        .into_iter()
        .map(|(key, message)| {
            Diagnostic {
                line: None,
                key: key.into(),
                message,
            }
            .to_string()
        })
        .collect();
    if !problems.is_empty() {
        return usage(problems.join("\n"));
    }

    let suite = match args.command {
        Command::Derive => Suite::Derive,
        Command::Ensemble => Suite::Ensemble,
        Command::Kubo => Suite::Kubo,
        Command::All => Suite::All,
    };
    let report = cli::run(suite, &config);
    let text = cli::render_report(&report, config.format);
    match &config.out {
        Some(path) => {
            if let Err(e) = cli::write_atomic(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.exit_code() as u8)
}
