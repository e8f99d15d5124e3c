use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use turnstile::cli::{execute, parse_config, write_results, CliError, Command, OutputFormat};

#[derive(Debug, Parser)]
#[command(
    name = "turnstile",
    version,
    about = "Turnstile spin readout simulator"
)]
struct Args {
    /// What to compute.
    #[arg(value_enum)]
    command: Command,

    /// JSON configuration file, or `-` for stdin.
    #[arg(long, short)]
    config: String,

    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    /// Overrides `experiment.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn read_config(path: &str) -> Result<Vec<u8>, CliError> {
    if path == "-" {
        let mut buf = Vec::new();
        io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        Ok(buf)
    } else {
        fs::read(path).map_err(|e| CliError::Io(format!("{path}: {e}")))
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    let bytes = read_config(&args.config)?;
    let mut parsed = parse_config(&bytes)?;
    if let Some(seed) = args.seed {
        parsed.config.experiment.seed = seed;
    }
    let exec = execute(args.command, &parsed.config, &parsed.digest)?;
    for w in &exec.warnings {
        eprintln!("{w}");
    }
    match &args.out {
        Some(path) => {
            let mut f = fs::File::create(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            write_results(&exec.table, args.format, &mut f)?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_results(&exec.table, args.format, &mut lock)?;
            lock.flush().map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
