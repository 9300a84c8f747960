use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sdefw::config::{apply_overrides, parse_pairs};
use sdefw::{emit_plotdata, run_study, verify_algebra, CliError, Mode, Result, StudyConfig};

#[derive(Parser)]
#[command(
    name = "sdefw",
    version,
    about = "Extrapolated splitting schemes for SDE weak approximation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the study described by a key = value configuration file.
    Run {
        config: PathBuf,
        /// Override a configuration key.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// CSV destination (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact order-condition and identity checks in the free algebra.
    VerifyAlgebra {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        degree: usize,
    },
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn verify(m: usize, d: usize, degree: usize) -> Result<bool> {
    let report = verify_algebra(m, d, degree)?;
    print!("{}", report.lines());
    for s in &report.skipped {
        eprintln!("skipped {s}");
    }
    Ok(report.all_pass())
}

fn run(
    config: &Path,
    set: &[String],
    workers: Option<usize>,
    out: Option<PathBuf>,
) -> Result<bool> {
    let text = std::fs::read_to_string(config).map_err(|source| CliError::Io {
        path: config.to_path_buf(),
        source,
    })?;
    let mut pairs = parse_pairs(&text)?;
    apply_overrides(&mut pairs, set)?;
    let mut cfg = StudyConfig::from_pairs(&pairs)?;
    if out.is_some() {
        cfg.out = out;
    }
    if cfg.mode == Mode::AlgebraVerify {
        return verify(cfg.m, cfg.d, cfg.degree);
    }
    let table = run_study(&cfg, workers)?;
    let csv = table.to_csv();
    match &cfg.out {
        Some(path) => {
            write(path, &csv)?;
            print!("{}", table.summary());
        }
        None => {
            print!("{csv}");
            eprint!("{}", table.summary());
        }
    }
    if let Some(path) = &cfg.plot {
        let plot = emit_plotdata(&table.series());
        for w in &plot.warnings {
            eprintln!("warning: {w}");
        }
        write(path, &plot.text)?;
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            set,
            workers,
            out,
        } => run(&config, &set, workers, out),
        Command::VerifyAlgebra { m, d, degree } => verify(m, d, degree),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("sdefw: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
