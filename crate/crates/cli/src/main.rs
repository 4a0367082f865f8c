use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use specshare_cli::figures::{scenario_manifest, write_figure, Figure};
use specshare_cli::run::{run_scenario, to_csv};
use specshare_cli::scenario::{load, MethodKind, ObjectiveKind, Overrides};
use specshare_cli::{verify, CliError};

#[derive(Parser)]
#[command(
    name = "specshare",
    version,
    about = "Capacity and outage of spectrum-sharing fading channels"
)]
struct Cli {
    /// Override the scenario seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the Monte Carlo sample count
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Output directory (default: CSV on stdout for scenarios, `out` for figures)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the expectation method
    #[arg(long, global = true, value_enum)]
    method: Option<MethodArg>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    MonteCarlo,
    Quadrature,
}

#[derive(Subcommand)]
enum Command {
    /// Ergodic capacity sweep
    Ergodic { scenario: PathBuf },
    /// Delay-limited capacity sweep
    DelayLimited { scenario: PathBuf },
    /// Outage probability sweep
    Outage { scenario: PathBuf },
    /// Regenerate every series of a figure
    Figure {
        #[arg(value_enum)]
        name: Figure,
    },
    /// Run the built-in invariant checks
    Verify,
}

fn scenario_command(
    cli: &Cli,
    path: &Path,
    expected: ObjectiveKind,
    overrides: &Overrides,
) -> Result<(), CliError> {
    let s = load(path, overrides)?;
    if s.objective != expected {
        return Err(CliError::Validation(format!(
            "{}: field `objective`: scenario is `{}`, command expects `{}`",
            path.display(),
            s.objective.as_str(),
            expected.as_str()
        )));
    }
    let csv = to_csv(&run_scenario(&s)?);
    match &cli.out {
        None => print!("{csv}"),
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let file = dir.join(format!("{}.csv", s.name));
            std::fs::write(&file, csv)?;
            std::fs::write(
                dir.join(format!("{}.manifest.toml", s.name)),
                scenario_manifest(&s.source)?,
            )?;
            eprintln!("wrote {}", file.display());
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        seed: cli.seed,
        samples: cli.samples,
        method: cli.method.map(|m| match m {
            MethodArg::MonteCarlo => MethodKind::MonteCarlo,
            MethodArg::Quadrature => MethodKind::Quadrature,
        }),
    };
    match &cli.command {
        Command::Ergodic { scenario } => {
            scenario_command(cli, scenario, ObjectiveKind::Ergodic, &overrides)
        }
        Command::DelayLimited { scenario } => {
            scenario_command(cli, scenario, ObjectiveKind::DelayLimited, &overrides)
        }
        Command::Outage { scenario } => {
            scenario_command(cli, scenario, ObjectiveKind::Outage, &overrides)
        }
        Command::Figure { name } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            for f in write_figure(*name, &overrides, &out)? {
                eprintln!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Verify => {
            let checks = verify::run_all();
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            if failed > 0 {
                return Err(CliError::Failed(format!(
                    "{failed} of {} checks failed",
                    checks.len()
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
