use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use twobath::dissipators::RateConvention;

use twobath_cli::config::{preset, SweepConfig};
use twobath_cli::output::write_output;
use twobath_cli::sweep::run_sweep;
use twobath_cli::validate::low_temperature_suite;

#[derive(Parser)]
#[command(name = "twobath", version, about = "Steady states of two coupled oscillators between thermal baths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Number of grid points evaluated concurrently.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    rate_convention: Option<Convention>,
    /// Relative tolerance of the Langevin quadrature.
    #[arg(long, global = true)]
    quad_rel_tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Flat,
    Bose,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write CSV plus manifest files.
    Sweep {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        preset: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; defaults to the config's output_path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the moment solver with the Fock-space oracle.
    Validate {
        #[arg(long, required = true)]
        low_temp: bool,
    },
}

fn convention(cli: &Cli) -> Option<RateConvention> {
    cli.rate_convention.map(|c| match c {
        Convention::Flat => RateConvention::Flat,
        Convention::Bose => RateConvention::Bose,
    })
}

fn sweep(cli: &Cli, preset_id: Option<&str>, config: Option<&PathBuf>, out: Option<&PathBuf>) -> twobath::Result<()> {
    let mut cfg = match (preset_id, config) {
        (Some(id), _) => preset(id)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| twobath::Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
            SweepConfig::from_toml(&text)?
        }
        (None, None) => return Err(twobath::Error::ConfigInvalid("either --preset or --config is required".into())),
    };
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(c) = convention(cli) {
        cfg.rate_convention = c;
    }
    if let Some(tol) = cli.quad_rel_tol {
        cfg.quadrature.rel_tol = tol;
    }
    if let Some(dir) = out {
        cfg.output_path = dir.display().to_string();
    }
    let rows = run_sweep(&cfg)?;
    let failed = rows.iter().filter(|r| r.status.label() != "ok" && r.status.label() != "not_applicable").count();
    for path in write_output(&rows, &cfg, &PathBuf::from(&cfg.output_path))? {
        println!("wrote {}", path.display());
    }
    if failed > 0 {
        eprintln!("{failed} of {} rows recorded solver errors", rows.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Sweep { preset, config, out } => match sweep(&cli, preset.as_deref(), config.as_ref(), out.as_ref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Validate { .. } => {
            let mut all_ok = true;
            for (label, result) in low_temperature_suite(convention(&cli).unwrap_or_default()) {
                match result {
                    Ok(c) => {
                        let verdict = if c.passed() { "PASS" } else { "FAIL" };
                        all_ok &= c.passed();
                        println!("{verdict} {label}: max rel diff {:.2e}, tail {:.1e}, n_max {}", c.worst_relative_difference(), c.tail, c.n_max);
                    }
                    Err(e) => {
                        all_ok = false;
                        println!("FAIL {label}: {e}");
                    }
                }
            }
            if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
