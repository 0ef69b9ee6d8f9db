use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ipgg::cli::config::parse_config_with_overrides;
use ipgg::cli::{run_subcommand, CliError, Command, EXIT_INVALID, EXIT_IO, EXIT_OK};

/// Worker-pool size; unset or 0 means automatic.
const THREADS_VAR: &str = "IPGG_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ipgg", version, about = "Public goods game with a punishing, bribable leader")]
struct Args {
    /// Flat `key = value` configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set f=3`
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Write the CSV/SVG artifact here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_VAR} must be a non-negative integer (got `{raw}`)"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(args: Args) -> Result<i32, CliError> {
    let config = if args.command.needs_config() {
        let text = match &args.config {
            Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?,
            None => String::new(),
        };
        let cfg = parse_config_with_overrides(&text, &args.set)?;
        for w in &cfg.warnings {
            eprintln!("warning: {w}");
        }
        Some(cfg)
    } else {
        None
    };

    let report = run_subcommand(&args.command, config.as_ref())?;
    let mut stdout = std::io::stdout().lock();
    let io_err = |source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    match (&report.artifact, &args.out) {
        (Some(artifact), Some(path)) => {
            std::fs::write(path, &artifact.content).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            writeln!(stdout, "{}", report.text).map_err(io_err)?;
        }
        (Some(artifact), None) => {
            stdout.write_all(artifact.content.as_bytes()).map_err(io_err)?;
            eprintln!("{}", report.text);
        }
        (None, _) => writeln!(stdout, "{}", report.text).map_err(io_err)?,
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID as u8 } else { EXIT_OK as u8 });
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_INVALID as u8);
    }
    match run(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            debug_assert!(code == EXIT_INVALID || code == EXIT_IO);
            ExitCode::from(code as u8)
        }
    }
}
