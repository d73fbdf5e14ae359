use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use lightspin::cli::{self, CliError, ReportFormat, SweepGrid};

#[derive(Parser)]
#[command(name = "lightspin", version, about = "Electron spin precession in standing light waves")]
#[command(after_help = cli::SCHEMA)]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Propagate one configuration and write spin_timeseries.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Fit the precession frequency over a grid of fields or ellipticities.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Comma-separated peak fields, V/m.
        #[arg(long, value_delimiter = ',', conflicts_with = "eta", required_unless_present = "eta")]
        e_hat: Vec<f64>,
        /// Comma-separated ellipticities, rad.
        #[arg(long, value_delimiter = ',')]
        eta: Vec<f64>,
    },
    /// Tabulate the perturbative field window against wavelength.
    Region {
        #[arg(long)]
        lambda_min_nm: f64,
        #[arg(long)]
        lambda_max_nm: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Cycle budget N for the lower bound.
        #[arg(long, default_value_t = 5000.0)]
        cycles: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print closed-form and perturbative values for a configuration.
    Report {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Print the output column reference.
    Schema,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
}

fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Run { config, out } => {
            let r = cli::cmd_run(&config, &out)?;
            let f = r.fit;
            eprintln!(
                "{} samples, final s_z = {:.6}, norm = {:.12}, omega_fit = {:e} rad/s{}",
                r.series.len(),
                r.series.final_s_z,
                r.series.final_norm,
                f.omega_fit,
                if f.usable { "" } else { " (unusable)" }
            );
        }
        Cmd::Sweep { config, out, e_hat, eta } => {
            let grid = if eta.is_empty() {
                SweepGrid::FieldStrength(e_hat)
            } else {
                SweepGrid::Eta(eta)
            };
            let r = cli::cmd_sweep(&config, &grid, &out)?;
            for (k, v) in &r.summary {
                eprintln!("{k} = {v}");
            }
        }
        Cmd::Region { lambda_min_nm, lambda_max_nm, points, cycles, out } => {
            cli::cmd_region(lambda_min_nm * 1e-9, lambda_max_nm * 1e-9, points, cycles, &out)?;
        }
        Cmd::Report { config, format } => {
            let format = match format {
                Format::Table => ReportFormat::Table,
                Format::Csv => ReportFormat::Csv,
            };
            print!("{}", cli::cmd_report(&config, format)?);
        }
        Cmd::Schema => println!("{}", cli::SCHEMA),
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Args::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
