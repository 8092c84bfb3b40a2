//! `apl`: every alpha-patch workflow as a subcommand.

mod artifacts;
mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use artifacts::{ArtifactDir, RunManifest};
use exit::CliError;

#[derive(Parser, Debug)]
#[command(name = "apl", version, about = "Alpha-patch contour dynamics and illposedness laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Artifact directory (CSV files, config.toml, manifest.json).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads; falls back to APL_WORKERS, then to the core count.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for randomized inputs; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Evolve a patch boundary and write diagnostics.
    Simulate,
    /// Wainger growth or L_q/R_q pairing scan.
    IllposedScan,
    /// Close a curvature profile with two symmetric bends.
    Bend,
    /// Block kernel L¹ bounds.
    KernelCheck,
    /// Curvature Fourier and Littlewood–Paley spectra of a curve.
    Spectra,
    /// ∂_s v·N near a curvature singularity.
    ProbeNonlipschitz,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::IllposedScan => "illposed-scan",
            Command::Bend => "bend",
            Command::KernelCheck => "kernel-check",
            Command::Spectra => "spectra",
            Command::ProbeNonlipschitz => "probe-nonlipschitz",
        }
    }

    fn section(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::IllposedScan => "illposed_scan",
            Command::Bend => "bend",
            Command::KernelCheck => "kernel_check",
            Command::Spectra => "spectra",
            Command::ProbeNonlipschitz => "probe_nonlipschitz",
        }
    }
}

fn workers(flag: Option<usize>) -> Result<usize, CliError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("APL_WORKERS") {
            Ok(v) => v.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("APL_WORKERS = {v:?} is not a positive integer")))?,
            Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        },
    };
    if n == 0 {
        return Err(CliError::Usage("worker count must be ≥ 1".into()));
    }
    Ok(n)
}

fn missing_section(cmd: Command) -> CliError {
    CliError::Usage(format!("missing config section [{}]", cmd.section()))
}

fn execute(cli: Cli) -> Result<Option<String>, CliError> {
    let started = Instant::now();
    let cmd = cli.command;
    let config_path = cli.config.ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let out_dir = cli.out_dir.ok_or_else(|| CliError::Usage("--out-dir is required".into()))?;
    let workers = workers(cli.workers)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let mut cfg = config::load(&config_path)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    cfg.seed = Some(seed);
    let parameters = match cmd {
        Command::Simulate => cfg.simulate.as_ref().map(commands::parameters),
        Command::IllposedScan => cfg.illposed_scan.as_ref().map(commands::parameters),
        Command::Bend => cfg.bend.as_ref().map(commands::parameters),
        Command::KernelCheck => cfg.kernel_check.as_ref().map(commands::parameters),
        Command::Spectra => cfg.spectra.as_ref().map(commands::parameters),
        Command::ProbeNonlipschitz => cfg.probe_nonlipschitz.as_ref().map(commands::parameters),
    }
    .ok_or_else(|| missing_section(cmd))?;

    let mut art = ArtifactDir::create(&out_dir)?;
    let outcome = match cmd {
        Command::Simulate => commands::simulate(cfg.simulate.as_ref().expect("section checked"), seed, &mut art),
        Command::IllposedScan => commands::illposed_scan(cfg.illposed_scan.as_ref().expect("section checked"), &mut art),
        Command::Bend => commands::bend(cfg.bend.as_ref().expect("section checked"), &mut art),
        Command::KernelCheck => commands::kernel_check(cfg.kernel_check.as_ref().expect("section checked"), seed, &mut art),
        Command::Spectra => commands::spectra(cfg.spectra.as_ref().expect("section checked"), seed, &mut art),
        Command::ProbeNonlipschitz => commands::probe(cfg.probe_nonlipschitz.as_ref().expect("section checked"), &mut art),
    }?;
    art.write("config.toml", cfg.to_toml().as_bytes())?;
    let manifest = RunManifest {
        tool: "apl",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cmd.name().to_string(),
        status: if outcome.failure.is_some() { "rejected".into() } else { "ok".into() },
        failure: outcome.failure.clone(),
        seed,
        workers,
        parameters,
        results: outcome.results,
        inputs: Vec::new(),
        outputs: Default::default(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    art.finish(manifest)?;
    Ok(outcome.failure)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let name = cli.command.name();
    match execute(cli) {
        Ok(None) => ExitCode::from(exit::OK as u8),
        Ok(Some(failure)) => {
            eprintln!("apl {name}: {failure}");
            ExitCode::from(exit::NUMERICAL as u8)
        }
        Err(e) => {
            eprintln!("apl {name}: {}", e.message());
            ExitCode::from(e.code() as u8)
        }
    }
}
