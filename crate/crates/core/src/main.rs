use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use statsub::builtins::{builtin_example, builtin_expected_text, builtin_manifest_text, builtin_names};
use statsub::geometry::Convention;
use statsub::manifest::{parse_convention, Manifest};
use statsub::report::{render, run, Format, RunOptions};
use statsub::ManifestError;

#[derive(Parser)]
#[command(name = "statsub", version, about = "Statistical manifolds, submersions and Ricci-Bourguignon solitons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = OutputFormat::Md, global = true)]
    format: OutputFormat,
    /// Number of random sample points.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Seed for random sample points.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Multiplies every tolerance.
    #[arg(long = "tol-scale", global = true)]
    tol_scale: Option<f64>,
    /// Curvature sign: +1, -1 or both.
    #[arg(long, global = true, allow_hyphen_values = true)]
    convention: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate a manifest without running it.
    Check { manifest: PathBuf },
    /// Run every analysis the manifest requests.
    Run { manifest: PathBuf },
    /// Run a shipped example, or print its manifest.
    Example {
        name: String,
        #[arg(long)]
        emit_manifest: bool,
        /// Print the expected-values sidecar instead of running.
        #[arg(long, conflicts_with = "emit_manifest")]
        emit_expected: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Md,
}

enum Failure {
    Manifest(ManifestError),
    Numeric(statsub::NumericError),
}

impl From<ManifestError> for Failure {
    fn from(e: ManifestError) -> Self {
        Failure::Manifest(e)
    }
}

fn options(cli: &Cli) -> Result<RunOptions, Failure> {
    let conventions: Option<Vec<Convention>> = cli.convention.as_deref().map(parse_convention).transpose()?;
    Ok(RunOptions {
        points: cli.points,
        seed: cli.seed,
        tol_scale: cli.tol_scale,
        conventions,
    })
}

fn execute(cli: &Cli) -> Result<String, Failure> {
    let format = match cli.format {
        OutputFormat::Json => Format::Json,
        OutputFormat::Md => Format::Markdown,
    };
    let report = |m: &Manifest| -> Result<String, Failure> {
        let r = run(m, &options(cli)?).map_err(Failure::Numeric)?;
        Ok(render(&r, format))
    };
    match &cli.command {
        Command::Check { manifest } => {
            let m = Manifest::load(manifest)?;
            options(cli)?;
            Ok(format!(
                "{}: ok ({} coordinates{}{})\n",
                m.name,
                m.dim(),
                if m.setup.is_some() { ", submersion" } else { "" },
                if m.soliton.is_some() { ", soliton" } else { "" }
            ))
        }
        Command::Run { manifest } => report(&Manifest::load(manifest)?),
        Command::Example {
            name,
            emit_manifest,
            emit_expected,
        } => {
            if *emit_manifest {
                return Ok(builtin_manifest_text(name)?.to_string());
            }
            if *emit_expected {
                return Ok(builtin_expected_text(name)?.unwrap_or("{\"claims\": []}\n").to_string());
            }
            report(&builtin_example(name)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("numeric error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Manifest(e)) => {
            eprintln!("manifest error: {e}");
            if let ManifestError::UnknownExample(_) = e {
                eprintln!("known examples: {}", builtin_names().join(", "));
            }
            ExitCode::from(2)
        }
    }
}
