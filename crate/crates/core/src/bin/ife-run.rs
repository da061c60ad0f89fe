//! Run one configured experiment and write its CSV table and manifest.
//!
//! On failure a JSON object `{"error": ..., "message": ...}` is printed to
//! stdout and the process exits with status 1 (2 for usage errors).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ife::experiment::{load_config, preset, preset_names, run};
use ife::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "ife-run", version, about = "Run an enriched IFE experiment")]
struct Args {
    /// TOML experiment configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration by name.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    threads: Option<usize>,
    /// List the built-in presets and exit.
    #[arg(long)]
    list_presets: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let j = serde_json::json!({ "error": "usage", "message": e.to_string() });
            println!("{j}");
            return ExitCode::from(2);
        }
    };
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            println!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}

fn execute(args: &Args) -> Result<()> {
    if args.list_presets {
        for name in preset_names() {
            println!("{name}");
        }
        return Ok(());
    }
    if let Some(k) = args.threads {
        if k == 0 {
            return Err(Error::ConfigField {
                field: "threads".into(),
                message: "must be at least 1".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    }
    let config = match (&args.config, &args.preset) {
        (Some(path), None) => load_config(path)?,
        (None, Some(name)) => preset(name)?,
        _ => {
            return Err(Error::InvalidConfig(
                "exactly one of --config and --preset is required".into(),
            ))
        }
    };
    let report = run(&config)?;
    let (csv, manifest) = report.write(&args.out)?;
    log::info!("{} rows written to {}", report.rows, csv.display());
    log::info!("manifest written to {}", manifest.display());
    for (k, v) in &report.summary {
        println!("{k} = {v:.4}");
    }
    Ok(())
}
