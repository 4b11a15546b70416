//! Command line front end: parses a TOML run configuration, executes a run
//! or a convergence study, and reports through CSV artifacts plus a summary
//! on standard output.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 configuration error,
//! 3 numerical failure.

use std::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sbfem_core::config::{ConfigError, FileConfig};
use sbfem_core::{runner, SolverError};

#[derive(Parser)]
#[command(name = "sbfem", version, about = "Frequency-domain elastodynamics on scaled boundary meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every configured frequency and export surface/field CSVs.
    Run(CommonArgs),
    /// Sweep the configured resolution axis and tabulate errors against
    /// the analytic half-space curve.
    Study(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,

    /// Output directory; overrides the config's `output.directory`.
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,

    /// Worker threads; defaults to one per core.
    #[arg(long, value_name = "N", conflicts_with = "serial")]
    threads: Option<usize>,

    /// Run single threaded (same as --threads 1).
    #[arg(long)]
    serial: bool,

    /// Echo the resolved model before solving.
    #[arg(short, long)]
    verbose: bool,
}

enum AppError {
    Config(ConfigError),
    Solver(SolverError),
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Config(e)
    }
}

impl From<SolverError> for AppError {
    fn from(e: SolverError) -> Self {
        AppError::Solver(e)
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => 2,
            AppError::Solver(SolverError::Io(_)) => 1,
            AppError::Solver(_) => 3,
        }
    }

    fn report(&self) {
        let e: &dyn Error = match self {
            AppError::Config(e) => e,
            AppError::Solver(e) => e,
        };
        eprintln!("error: {e}");
        let mut source = e.source();
        while let Some(s) = source {
            eprintln!("  caused by: {s}");
            source = s.source();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, study) = match &cli.command {
        Command::Run(a) => (a, false),
        Command::Study(a) => (a, true),
    };

    let threads = if args.serial { Some(1) } else { args.threads };
    if let Some(n) = threads {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    match execute(args, study) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(args: &CommonArgs, study: bool) -> Result<(), AppError> {
    let mut model = FileConfig::read(&args.config)?.resolve()?;
    if let Some(dir) = &args.output {
        model.output.directory = dir.clone();
    }
    if study && model.study.is_none() {
        return Err(ConfigError::Invalid(format!(
            "{}: the study command needs a [study] section",
            args.config.display()
        ))
        .into());
    }

    if args.verbose {
        eprintln!(
            "model: {} nodes, {} elements, {} subdomains, {} global dofs",
            model.mesh.nodes.len(),
            model.mesh.elements.len(),
            model.mesh.subdomains.len(),
            2 * model.mesh.nodes.len()
        );
        for (s, sub) in model.mesh.subdomains.iter().enumerate() {
            eprintln!(
                "  subdomain {s}: {:?}, {} elements, radial {} -> 1 in {} steps",
                sub.kind,
                sub.elements.len(),
                sub.grid.xi_start,
                sub.grid.n_steps
            );
        }
        eprintln!(
            "load: {} Pa over |x| <= {} m; frequencies {:?} Hz; output {}",
            model.load.pressure,
            model.load.half_width,
            model.frequencies_hz,
            model.output.directory.display()
        );
    }

    let summary = if study {
        runner::study(&model)?.summary()
    } else {
        runner::run(&model)?.summary()
    };
    print!("{summary}");
    Ok(())
}
