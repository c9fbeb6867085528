use std::process::ExitCode;

use clap::{Parser, Subcommand};
use laxsurf::config::{Format, Overrides};
use laxsurf::export::{curvature_csv, to_json, write_output};
use laxsurf::report::{validate, wavefunction_path};
use laxsurf::{Config, Run};

/// Soliton surfaces in sl(2,R) from the Lax pair of u_xx = f'(u)/2.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the residual checks and write the pass/fail and comparison report.
    Validate(Overrides),
    /// Sample the surface and export it as OBJ, CSV or JSON.
    Surface(Overrides),
    /// Per-point fundamental forms and curvatures.
    Curvature(Overrides),
    /// Wave-function diagnostics along the ray from the origin to the range maxima.
    Wavefunction(Overrides),
}

fn run(cli: Cli) -> laxsurf::Result<bool> {
    match cli.command {
        Command::Validate(flags) => {
            let config = Config::resolve(&flags)?;
            let report = validate(&config)?;
            let text = match flags.format {
                Some(Format::Json) => to_json(&report)?,
                _ => report.to_text(),
            };
            write_output(config.out.as_deref(), &text)?;
            Ok(report.passed)
        }
        Command::Surface(flags) => {
            let config = Config::resolve(&flags)?;
            let run = Run::sample(&config)?;
            write_output(config.out.as_deref(), &run.render()?)?;
            Ok(true)
        }
        Command::Curvature(flags) => {
            let config = Config::resolve(&flags)?;
            let run = Run::sample(&config)?;
            let text = match config.format {
                Format::Json => to_json(&run.grid.points)?,
                _ => curvature_csv(&run.grid),
            };
            write_output(config.out.as_deref(), &text)?;
            Ok(true)
        }
        Command::Wavefunction(flags) => {
            let config = Config::resolve(&flags)?;
            let samples = wavefunction_path(&config, config.nx)?;
            write_output(config.out.as_deref(), &to_json(&samples)?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
