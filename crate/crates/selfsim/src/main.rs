use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use selfsim::{emit, execute, CliError, ExperimentConfig, Format};

/// Run one experiment config and write its report.
///
/// Exit status: 0 all rows pass, 1 some row fails, 2 bad config,
/// 3 numerical guard tripped, 4 I/O failure.
#[derive(Parser)]
#[command(name = "selfsim", version)]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core. Never changes results.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; defaults to the config's output_path, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: &Args) -> Result<bool, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let config = ExperimentConfig::from_json(&text)?;
    let report = execute(&config, args.seed, args.workers)?;
    let out = args.out.clone().or_else(|| config.output_path.as_ref().map(PathBuf::from));
    emit(&report, args.format, out.as_deref())?;
    Ok(report.passed())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("selfsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
