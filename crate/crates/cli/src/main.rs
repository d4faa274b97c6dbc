//! `ratfin` — experiment runner. One experiment per invocation; every
//! run writes its result table plus a re-parseable manifest beside it.
//!
//! Exit codes: 0 success, 1 domain/numerical error, 2 usage/config error.

mod config;
mod experiments;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{parse_config, render_manifest, OutputFormat, Params};
use experiments::{run_experiment, RunError};

#[derive(Parser)]
#[command(name = "ratfin", version, about = "Rational-finance experiment runner")]
struct Cli {
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: config `out` key, else current dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format, csv or json (overrides the config).
    #[arg(long)]
    format: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// `RA_THREADS` caps internal parallelism; 0 or unset means automatic.
fn init_threads() {
    if let Ok(v) = std::env::var("RA_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), RunError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| RunError::Usage(format!("cannot read config {:?}: {e}", cli.config)))?;
    let mut config = parse_config(&text).map_err(|e| RunError::Usage(e.0))?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(fmt) = &cli.format {
        config.format = OutputFormat::parse(fmt).map_err(|e| RunError::Usage(e.0))?;
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.to_string_lossy().into_owned());
    }

    let params = Params::new(config.params.clone());
    let table = run_experiment(&config.experiment, &params, config.seed)?;

    let out_dir = PathBuf::from(config.out.clone().unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| RunError::Domain(format!("cannot create output dir {out_dir:?}: {e}")))?;
    let body = match config.format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
    };
    let out_file = out_dir.join(format!("{}.{}", config.experiment, config.format.extension()));
    std::fs::write(&out_file, body)
        .map_err(|e| RunError::Domain(format!("cannot write {out_file:?}: {e}")))?;
    let manifest = render_manifest(&config, env!("CARGO_PKG_VERSION"));
    let manifest_file = out_dir.join("manifest.txt");
    std::fs::write(&manifest_file, manifest)
        .map_err(|e| RunError::Domain(format!("cannot write {manifest_file:?}: {e}")))?;
    println!("wrote {}", out_file.display());
    Ok(())
}
