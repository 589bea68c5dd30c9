//! `conelab <command> [lemma] [--config <path>] [--out <dir>]`
//!
//! Exit codes: 0 when every assertion passes, 1 on a failed assertion or a
//! numerical error, 2 for usage and config errors, 3 when a computation is
//! refused for lack of resolution.

mod commands;
mod config;
mod summary;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use conelab_core::report::write_atomic;
use conelab_core::LabError;

use config::ExperimentConfig;
use summary::{Outcome, Summary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    Phi,
    Caps,
    FourierDecay,
    KernelDecay,
    LemmaCheck,
    OperatorSelftest,
    WeakType,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Phi => "phi",
            Command::Caps => "caps",
            Command::FourierDecay => "fourier-decay",
            Command::KernelDecay => "kernel-decay",
            Command::LemmaCheck => "lemma-check",
            Command::OperatorSelftest => "operator-selftest",
            Command::WeakType => "weak-type",
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "conelab",
    version,
    about = "Numerical checks for cone multipliers with non-radial gauges"
)]
struct Cli {
    command: Command,
    /// Lemma to check, for `lemma-check`.
    name: Option<String>,
    /// Experiment file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

const USAGE: u8 = 2;
const REFUSED: u8 = 3;

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("CONELAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("CONELAB_THREADS must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, String> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    ExperimentConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: &Cli, cfg: &ExperimentConfig, out: &mut Outcome) -> Result<(), LabError> {
    match cli.command {
        Command::Phi => commands::phi(cfg, out),
        Command::Caps => commands::caps(cfg, out),
        Command::FourierDecay => commands::fourier_decay(cfg, out),
        Command::KernelDecay => commands::kernel_decay(cfg, out),
        Command::OperatorSelftest => commands::operator_selftest_cmd(cfg, out),
        Command::WeakType => commands::weak_type(cfg, out),
        Command::LemmaCheck => {
            let name = cli.name.as_deref().unwrap_or_default();
            commands::lemma_check(name, cfg, out)
        }
    }
}

fn write_outputs(dir: &Path, out: &Outcome, summary: &Summary) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(summary).map_err(std::io::Error::other)? + "\n";
    let mut files: Vec<(PathBuf, &[u8])> = out
        .tables
        .iter()
        .map(|(name, body)| (dir.join(name), body.as_bytes()))
        .collect();
    files.push((dir.join("summary.json"), json.as_bytes()));
    for (path, body) in files {
        write_atomic(&path, body).map_err(|e| std::io::Error::other(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("conelab: {e}");
        return ExitCode::from(USAGE);
    }
    let cfg = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("conelab: {e}");
            return ExitCode::from(USAGE);
        }
    };
    if cli.command == Command::LemmaCheck && !cli.name.as_deref().is_some_and(|n| commands::LEMMAS.contains(&n)) {
        eprintln!("conelab: lemma-check needs one of: {}", commands::LEMMAS.join(", "));
        return ExitCode::from(USAGE);
    }
    if cli.command != Command::LemmaCheck && cli.name.is_some() {
        eprintln!("conelab: {} takes no positional argument", cli.command.name());
        return ExitCode::from(USAGE);
    }

    let start = Instant::now();
    let mut out = Outcome::default();
    for (k, v) in &cfg.raw {
        out.param(&format!("config.{k}"), v);
    }
    let result = run(&cli, &cfg, &mut out);
    let code = match &result {
        Ok(()) if out.pass() => 0,
        Ok(()) => 1,
        Err(LabError::Config(_)) => USAGE,
        Err(e) if e.is_refusal() => REFUSED,
        Err(_) => 1,
    };
    let summary = Summary {
        command: cli.command.name(),
        params: &out.params,
        assertions: &out.assertions,
        constants: &out.constants,
        error: result.as_ref().err().map(|e| e.to_string()),
        wall_time_s: start.elapsed().as_secs_f64(),
        pass: code == 0,
    };
    for a in &out.assertions {
        println!(
            "{:4} {} value={:.6e} threshold={:.6e}",
            if a.pass { "ok" } else { "FAIL" },
            a.name,
            a.value,
            a.threshold
        );
    }
    if let Some(e) = &summary.error {
        eprintln!("conelab: {e}");
    }
    let dir = cli.out.clone().or_else(|| cfg.out.clone());
    if let Some(dir) = dir {
        if let Err(e) = write_outputs(&dir, &out, &summary) {
            eprintln!("conelab: writing {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    } else {
        println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    }
    ExitCode::from(code)
}
