use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use shubin_cli::{run_config, CliError, ExperimentConfig, DEFAULT_OUT, OUT_ENV};

/// Run a trace, residue or verification experiment from a JSON config.
#[derive(Parser, Debug)]
#[command(name = "shubin", version)]
struct Args {
    /// Experiment config; the default invariant suite runs when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = OUT_ENV, default_value = DEFAULT_OUT)]
    out: PathBuf,
    /// Worker threads for parallel grid evaluation.
    #[arg(long)]
    threads: Option<usize>,
    /// Replace the config's level cutoff.
    #[arg(long)]
    cutoff_override: Option<usize>,
}

fn run(args: &Args) -> Result<bool, CliError> {
    if let Some(k) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    let mut cfg: ExperimentConfig = match &args.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(n) = args.cutoff_override {
        cfg.cutoff = Some(n.to_string());
    }
    let out = run_config(&cfg)?;
    std::fs::create_dir_all(&args.out)?;
    for (name, body) in &out.files {
        std::fs::write(args.out.join(name), body)?;
    }
    Ok(out.passed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("invariant check failed; see {}", args.out.join("verify.json").display());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
