//! `mme` — measurement master equation and quantum trajectory runs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mme_core::cli::{
    self, parse_grid, ConfigFile, InitialState, Mode, Preset, RunConfig, OUT_DIR_ENV,
};
use mme_core::traj::Scheme;
use mme_core::Error;

#[derive(Parser)]
#[command(
    name = "mme",
    version,
    about = "Two-level atom under repeated imperfect measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the measurement master equation and compare with the analytic solution.
    Master(RunArgs),
    /// Simulate a single quantum trajectory.
    Traj(RunArgs),
    /// Average many seeded trajectories and compare with the analytic solution.
    Ensemble(RunArgs),
    /// Run master equation and trajectory for each `(R, p)` point of a grid.
    Sweep(RunArgs),
    /// List the figure presets.
    PresetList,
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Figure regime fig1..fig8; overrides atom and trajectory values from the file.
    #[arg(long)]
    preset: Option<Preset>,
    /// Error probability of a single measurement, in [0, 0.5].
    #[arg(long)]
    p: Option<f64>,
    /// Measurement rate R in units of Ω.
    #[arg(long)]
    rate: Option<f64>,
    /// Rabi frequency Ω.
    #[arg(long)]
    omega: Option<f64>,
    /// Final time Ωt.
    #[arg(long = "omega-t-final", value_name = "T")]
    t_final: Option<f64>,
    /// Integrator step (master equation) or bin width (binned trajectories).
    #[arg(long)]
    dt: Option<f64>,
    /// Trajectory scheme: event-driven or binned.
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Number of trajectories in an ensemble.
    #[arg(long)]
    n: Option<usize>,
    /// Master RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Spacing of the output grid in Ωt.
    #[arg(long)]
    sample_interval: Option<f64>,
    /// Eigenstate band half-width used for jump and filament detection.
    #[arg(long)]
    band: Option<f64>,
    /// Initial state: upper, lower or `u,v,w`.
    #[arg(long, allow_hyphen_values = true)]
    initial: Option<InitialState>,
    /// Sweep points as `R:p,R:p,...`.
    #[arg(long)]
    grid: Option<String>,
    /// Output directory [default: $MME_OUT_DIR/<preset or mode>].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(mode: Mode, args: RunArgs) -> mme_core::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    file.apply(&mut cfg);
    if let Some(preset) = args.preset.or(file.preset) {
        cli::apply_preset(preset, &mut cfg);
    }
    cfg.mode = mode;

    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut cfg.p, args.p);
    set(&mut cfg.rate, args.rate);
    set(&mut cfg.omega, args.omega);
    set(&mut cfg.t_final, args.t_final);
    set(&mut cfg.dt, args.dt);
    set(&mut cfg.sample_interval, args.sample_interval);
    set(&mut cfg.band, args.band);
    if let Some(s) = args.scheme {
        cfg.scheme = s;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(init) = args.initial {
        cfg.initial = init;
    }
    if let Some(g) = &args.grid {
        cfg.grid = parse_grid(g)?;
    }
    cfg.out = match (args.out, file.out) {
        (Some(out), _) | (None, Some(out)) => out,
        (None, None) => {
            let root = std::env::var_os(OUT_DIR_ENV)
                .map_or_else(|| PathBuf::from("mme-out"), PathBuf::from);
            let leaf = cfg
                .preset
                .map_or_else(|| mode.to_string(), |p| p.to_string());
            root.join(leaf)
        }
    };
    Ok(cfg)
}

fn execute(command: Command) -> mme_core::Result<()> {
    let (mode, args) = match command {
        Command::PresetList => {
            for p in Preset::ALL {
                let (rate, prob) = p.rate_and_p();
                println!(
                    "{:<5} R={:<7} p={:<5} {}",
                    p.name(),
                    rate,
                    prob,
                    p.description()
                );
            }
            return Ok(());
        }
        Command::Master(a) => (Mode::MasterEquation, a),
        Command::Traj(a) => (Mode::Trajectory, a),
        Command::Ensemble(a) => (Mode::Ensemble, a),
        Command::Sweep(a) => (Mode::Sweep, a),
    };
    let cfg = build_config(mode, args)?;
    if mode == Mode::Sweep {
        let report = cli::sweep(&cfg, &cfg.grid)?;
        println!(
            "{} points -> {}",
            report.rows.len(),
            report.dir.join("sweep.csv").display()
        );
        return Ok(());
    }
    let report = cli::run(&cfg)?;
    let s = &report.summary;
    println!(
        "gamma = {} ({:?}), output -> {}",
        s.gamma_recomputed,
        s.regime,
        report.dir.display()
    );
    if let Some(m) = &s.master {
        println!(
            "max |analytic - numeric| = {:.3e}",
            m.max_abs_error_vs_analytic
        );
    }
    if let Some(t) = &s.trajectory {
        println!(
            "measurements = {}, jumps = {}, filaments = {}",
            t.measurements, t.jumps, t.filaments
        );
    }
    if let Some(e) = &s.ensemble {
        println!(
            "n = {}, max |mean w - analytic| = {:.3e}, within {} on {:.1}% of samples",
            e.n,
            e.max_abs_mean_w_error,
            e.tolerance,
            100.0 * e.fraction_within_tolerance
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mme: {e}");
            match e {
                Error::Configuration { .. } | Error::Argument(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
