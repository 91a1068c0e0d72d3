use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rmite::experiments::{
    compare_methods, load_experiment_config, resolve_output_dir, run_experiment,
};
use rmite::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Parser)]
#[command(
    name = "rmite",
    about = "Runs imaginary-time evolution experiments from JSON configs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Print progress details.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and RMITE_OUTPUT_ROOT).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every method listed in the config on the same problem.
    Compare {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_)
        | Error::QubitOutOfRange { .. }
        | Error::ParamOutOfRange { .. }
        | Error::DimensionMismatch { .. }
        | Error::ParamCountMismatch { .. }
        | Error::TooManyQubits { .. }
        | Error::ZeroShots
        | Error::ZeroSamples => EXIT_CONFIG,
        Error::Io(_)
        | Error::Parse(_)
        | Error::NonUnitaryMatrix { .. }
        | Error::InvalidPauliChar { .. }
        | Error::PauliLengthMismatch { .. }
        | Error::NonFiniteCoefficient { .. } => EXIT_DATA,
        Error::DegenerateCfim | Error::SingularMatrix { .. } => EXIT_NUMERIC,
    }
}

fn base_dir(config_path: &Path) -> PathBuf {
    config_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: Cli) -> Result<(), u8> {
    let (config_path, out, is_compare) = match &cli.command {
        Command::Run { config, out } => (config, out, false),
        Command::Compare { config, out } => (config, out, true),
    };
    let config = load_experiment_config(config_path).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_CONFIG
    })?;
    let out_dir = resolve_output_dir(&config, out.as_deref());
    let base = base_dir(config_path);
    if cli.verbose {
        eprintln!("config: {}", config_path.display());
        eprintln!("output: {}", out_dir.display());
    }
    if is_compare {
        let summary = compare_methods(&config, &base, &out_dir).map_err(|e| {
            eprintln!("error: {e}");
            exit_code_for(&e)
        })?;
        println!("ground energy: {}", summary.ground_energy);
        for m in &summary.methods {
            println!(
                "{}: final energy {} (error {:.3e}), {} state preps",
                m.name, m.final_energy, m.energy_error, m.total_state_preps
            );
        }
    } else {
        let summary = run_experiment(&config, &base, &out_dir).map_err(|e| {
            eprintln!("error: {e}");
            exit_code_for(&e)
        })?;
        if let Some(e) = summary.final_energy {
            println!(
                "final energy: {} (error {:.3e}), {} state preps",
                e,
                summary.energy_error.unwrap_or(f64::NAN),
                summary.total_state_preps.unwrap_or(0)
            );
        }
        if let Some(medians) = &summary.median_errors_by_k {
            for (k, err) in medians {
                println!("K={k}: median relative error {err:.4}");
            }
        }
        if cli.verbose {
            for f in &summary.files {
                eprintln!("wrote {}", out_dir.join(f).display());
            }
        }
    }
    println!("results in {}", out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
