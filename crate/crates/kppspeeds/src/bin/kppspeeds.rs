use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kppspeeds::cli::{exit, parse_config, run, Command};

/// Spreading speeds, thresholds and steady states for interface-coupled KPP
/// systems.
#[derive(Parser)]
#[command(name = "kppspeeds", version)]
struct Args {
    /// speed, steady, eigen, threshold, diagram, sweep, simulate or xcheck.
    command: String,
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides `out` in the config, defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("kppspeeds: {msg}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = std::env::var("KPPSPEEDS_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("kppspeeds: thread pool: {e}");
        }
    }
    let Some(command) = Command::parse(&args.command) else {
        return fail(exit::CONFIG, format!("unknown command `{}`", args.command));
    };
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return fail(exit::CONFIG, format!("{}: {e}", args.config.display())),
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return fail(exit::CONFIG, format!("{}: {e}", args.config.display())),
    };
    if cfg.command != command {
        return fail(exit::CONFIG, format!("command `{command}` does not match `command = {}` in the config", cfg.command));
    }
    let out = run(&cfg);
    let dest = args.out.or_else(|| cfg.output_path.as_ref().map(PathBuf::from));
    match dest {
        Some(path) => {
            if let Err(e) = fs::write(&path, &out.csv) {
                return fail(exit::FAILURE, format!("{}: {e}", path.display()));
            }
        }
        None => print!("{}", out.csv),
    }
    ExitCode::from(out.code as u8)
}
