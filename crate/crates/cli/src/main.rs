use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use vqsd::circuits::EvalMode;
use vqsd_cli::config::{Experiment, ExperimentConfig};
use vqsd_cli::validate::validate_paths;
use vqsd_cli::{run, write_artifacts, CliError};

#[derive(Parser)]
#[command(name = "vqsd", version, about = "Variational quantum state diagonalization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a diagonalizing unitary and read out eigenvalues (also runs
    /// spectroscopy configs).
    Diagonalize(RunArgs),
    /// Sweep one parameter over [0, 2π).
    Landscape(RunArgs),
    /// Train at several q on product states.
    QSweep(RunArgs),
    /// Compare optimizers from shared random starts.
    OptBench(RunArgs),
    /// One-bit qPCA baseline.
    Qpca(RunArgs),
    /// Check CSV and JSON files (or directories of them) against their schemas.
    Validate { paths: Vec<PathBuf> },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in config: fig3a, fig3b, fig5, figS2, figS4, figS6, figS7.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<EvalMode>,
    #[arg(long)]
    shots: Option<u64>,
    /// Write real wall-clock times into CSV time columns.
    #[arg(long)]
    timing: bool,
    /// Print the resolved config and exit.
    #[arg(long)]
    print_config: bool,
}

fn parse_mode(s: &str) -> Result<EvalMode, String> {
    match s {
        "exact" => Ok(EvalMode::Exact),
        "sampled" => Ok(EvalMode::Sampled),
        _ => Err(format!("expected exact or sampled, got {s:?}")),
    }
}

fn resolve(args: &RunArgs, experiment: Experiment) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => ExperimentConfig::default(),
    };
    let keep = experiment == Experiment::Diagonalize && cfg.experiment == Experiment::Spectroscopy;
    if !keep {
        cfg.experiment = experiment;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.out_dir = o.clone();
    }
    if let Some(t) = args.threads {
        cfg.threads = Some(t);
    }
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    if let Some(s) = args.shots {
        cfg.shots = s;
    }
    if args.timing {
        cfg.timing = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (args, experiment) = match cli.command {
        Command::Diagonalize(a) => (a, Experiment::Diagonalize),
        Command::Landscape(a) => (a, Experiment::Landscape),
        Command::QSweep(a) => (a, Experiment::QSweep),
        Command::OptBench(a) => (a, Experiment::OptimizerBench),
        Command::Qpca(a) => (a, Experiment::Qpca),
        Command::Validate { paths } => {
            if paths.is_empty() {
                return Err(CliError::Config("validate needs at least one path".into()));
            }
            for c in validate_paths(&paths)? {
                println!("ok {} {}", c.path.display(), c.kind);
            }
            return Ok(());
        }
    };
    let cfg = resolve(&args, experiment)?;
    if args.print_config {
        println!("{}", cfg.to_json());
        return Ok(());
    }
    let art = run(&cfg)?;
    write_artifacts(&cfg.out_dir, &art)?;
    eprintln!("wrote {} files to {}", art.files.len() + 1, cfg.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
