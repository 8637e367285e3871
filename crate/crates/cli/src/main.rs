use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gauge_peps_cli::{exit_code, parse_layered, preset, run, PRESETS};

/// Exact-contraction norms, Wilson loops and confinement diagnostics for
/// gauge-invariant PEPS.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Scenario file with `key = value` lines.
    config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides `threads`).
    #[arg(long)]
    threads: Option<usize>,
    /// Built-in scenario: confining, degenerate, nonperturbative, perturbative.
    #[arg(long)]
    preset: Option<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let base = match args.preset.as_deref() {
        Some(name) => match preset(name) {
            Some(p) => Some(p),
            None => {
                eprintln!("error: unknown preset '{name}' (known: {})", PRESETS.join(", "));
                return ExitCode::from(1);
            }
        },
        None => None,
    };
    let text = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(1);
            }
        },
        None if base.is_some() => String::new(),
        None => {
            eprintln!("error: give a config file, --preset, or both");
            return ExitCode::from(1);
        }
    };
    let mut cfg = match parse_layered(base, &text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    if let Some(out) = args.out {
        cfg.out = out;
    }
    if let Some(k) = args.threads {
        cfg.threads = k;
    }
    let code = run(&cfg, &mut std::io::stdout());
    ExitCode::from(code as u8)
}
