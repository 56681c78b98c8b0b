use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use cotrans_cli::commands::gallery_spec;
use cotrans_cli::{configure_threads, run, CliError, Command, ExperimentSpec, Overrides, EXIT_PASS, EXIT_SCHEMA};

/// Verify cotranslations, skew-products, difference and differential
/// equations, and partial cotranslations from JSON experiment specs.
#[derive(Parser, Debug)]
#[command(name = "cotrans", version)]
struct Cli {
    command: Command,
    /// Example name for `gallery`.
    name: Option<String>,
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    radius: Option<usize>,
    /// Add `elapsed_ms` to the report.
    #[arg(long)]
    timing: bool,
    /// Do not print the summary table to stderr.
    #[arg(long, short)]
    quiet: bool,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main_inner(cli: Cli) -> Result<i32, CliError> {
    configure_threads(std::env::var("COTRANS_THREADS").ok().as_deref())?;
    let overrides = Overrides { seed: cli.seed, tol: cli.tol, radius: cli.radius };

    if cli.command == Command::Gallery {
        if let Some(name) = &cli.name {
            let spec = gallery_spec(name, cli.seed.unwrap_or(0))?;
            let mut text = serde_json::to_string_pretty(&spec).map_err(|e| CliError::Schema(e.to_string()))?;
            text.push('\n');
            emit(&cli.out, &text)?;
            return Ok(EXIT_PASS);
        }
    } else if cli.name.is_some() {
        return Err(CliError::Schema(format!("{} takes no positional name", cli.command)));
    }

    let mut spec = match &cli.spec {
        Some(path) => ExperimentSpec::from_json(&std::fs::read_to_string(path)?)?,
        None if cli.command == Command::Gallery => ExperimentSpec::for_example(cotrans::gallery::Example::C3Affine, 0),
        None => return Err(CliError::Schema("--spec is required".into())),
    };
    overrides.apply(&mut spec);

    let start = Instant::now();
    let mut output = run(cli.command, &spec)?;
    if cli.timing {
        output.elapsed_ms = Some(start.elapsed().as_millis());
    }
    emit(&cli.out, &output.to_json())?;
    if !cli.quiet {
        eprint!("{}", output.render());
    }
    Ok(output.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match main_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("cotrans: {e}");
            EXIT_SCHEMA
        }
    };
    ExitCode::from(code as u8)
}
