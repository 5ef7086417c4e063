//! `mabuchi` — batch front door for the extremal-potential library.
//!
//! Exit codes: 0 success (all results certified / checks passed),
//! 1 runtime error, 2 configuration error, 3 run completed but a result is
//! uncertified or a check failed.

mod config;
mod run;

use std::path::PathBuf;

use clap::Parser;

#[derive(Parser)]
#[command(name = "mabuchi", version, about = "Extremal Kähler potentials on ℙⁿ: solve, certify, sweep")]
struct Cli {
    /// Path to the JSON run configuration (see docs/config-schema.md)
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's "output"; default "./out")
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread count (default: all available cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Replace every seed in the config (grid and solver) with this value
    #[arg(long)]
    seed_override: Option<u64>,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("config error: --threads must be ≥ 1");
            return 2;
        }
        // build the global pool up front; later implicit builds would ignore it
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("runtime error: thread pool: {e}");
            return 1;
        }
    }
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: {}: {e}", cli.config.display());
            return 2;
        }
    };
    let base = cli
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let mut cfg = match config::parse_config(&text, &base) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    if let Some(seed) = cli.seed_override {
        cfg.override_seeds(seed);
    }
    let out_dir = cli
        .out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    match run::run(&cfg, &out_dir, &base) {
        Ok(code) => code,
        Err(e) => {
            eprintln!(
                "{} error: {}",
                if e.code == 2 { "config" } else { "runtime" },
                e.msg
            );
            e.code
        }
    }
}
