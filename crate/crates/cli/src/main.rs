use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qosc_cli::levels_io::read_levels_csv;
use qosc_cli::{commands, CliError, Format, Outcome, RunConfig};

#[derive(Parser)]
#[command(
    name = "qosc",
    version,
    about = "Coupled deformed-oscillator vibrational models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the level energies of the configured model.
    Spectrum(Common),
    /// Print the truncated series and effective constants.
    Expand(Common),
    /// Run the invariant suite and write the check report.
    Verify(Common),
    /// Fit model parameters to a level file.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Level file with header `n1,...,nl,energy`.
        #[arg(long)]
        levels: PathBuf,
    },
    /// Tabulate level differences between two models.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (json for verify, csv otherwise, when absent).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    RunConfig::from_json(&read(&common.config)?)
}

fn format_of(common: &Common, default: Format) -> Format {
    match common.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => default,
    }
}

fn run(cli: Cli) -> Result<(Outcome, Option<PathBuf>), CliError> {
    let (outcome, common) = match &cli.command {
        Command::Spectrum(c) => (commands::spectrum(&load(c)?, format_of(c, Format::Csv))?, c),
        Command::Expand(c) => (commands::expand(&load(c)?, format_of(c, Format::Csv))?, c),
        Command::Verify(c) => (commands::verify(&load(c)?, format_of(c, Format::Json))?, c),
        Command::Compare(c) => (commands::compare(&load(c)?, format_of(c, Format::Csv))?, c),
        Command::Fit { common, levels } => {
            let config = load(common)?;
            let data = read_levels_csv(&read(levels)?, config.model.modes, config.energy_scale())?;
            (
                commands::fit_levels(&config, &data, format_of(common, Format::Csv))?,
                common,
            )
        }
    };
    Ok((outcome, common.out.clone()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((outcome, out)) => {
            for note in &outcome.notes {
                eprintln!("{note}");
            }
            let written = match out {
                Some(path) => fs::write(&path, &outcome.output)
                    .map_err(|e| format!("{}: {e}", path.display())),
                None => std::io::stdout()
                    .write_all(outcome.output.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if outcome.success { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
