use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{detect_jumps, JumpReport};
use crate::error::{Error, Result};
use crate::mme::{propagate, PropagateOptions};
use crate::qops::BlochVector;
use crate::traj::{
    derive_seed, run_ensemble_mean, run_trajectory, Scheme, TrajectoryConfig, TrajectoryRecord,
};
use crate::twolevel::{analytic_bloch, AtomParams, Regime};

use super::config::{Mode, RunConfig};
use super::output::{
    bloch_csv, ensemble_csv, events_csv, fmt_sig, plot_script, write_json, PlotSpec, SWEEP_HEADER,
};
use super::preset::{Preset, Zoom};

/// Pointwise tolerance on `|mean w − analytic w|` for ensemble runs.
pub const ENSEMBLE_W_TOLERANCE: f64 = 0.05;
/// Fraction of sample points that must meet [`ENSEMBLE_W_TOLERANCE`].
pub const ENSEMBLE_REQUIRED_FRACTION: f64 = 0.99;

#[derive(Clone, Debug, Serialize)]
pub struct Software {
    pub name: &'static str,
    pub version: &'static str,
}

const SOFTWARE: Software = Software {
    name: env!("CARGO_PKG_NAME"),
    version: env!("CARGO_PKG_VERSION"),
};

#[derive(Clone, Debug, Serialize)]
pub struct MasterStats {
    pub samples: usize,
    pub max_abs_error_vs_analytic: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryStats {
    pub measurements: usize,
    pub jumps: usize,
    pub jump_rate: f64,
    pub dwell_count: usize,
    pub mean_dwell: Option<f64>,
    pub filaments: usize,
    pub filament_rate: f64,
}

impl TrajectoryStats {
    fn new(record: &TrajectoryRecord, report: &JumpReport) -> Self {
        Self {
            measurements: record.measurement_count,
            jumps: report.jumps.len(),
            jump_rate: report.jump_rate(),
            dwell_count: report.dwell_times.len(),
            mean_dwell: report.mean_dwell(),
            filaments: report.filaments.len(),
            filament_rate: report.filament_rate(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleStats {
    pub n: usize,
    pub max_abs_mean_w_error: f64,
    pub fraction_within_tolerance: f64,
    pub tolerance: f64,
    pub required_fraction: f64,
    pub within_tolerance: bool,
    pub fraction_within_3se: f64,
    pub mean_measurements: f64,
    /// Index of the trajectory whose events are written to `events.csv`.
    pub events_trajectory: usize,
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub software: Software,
    pub mode: Mode,
    pub preset: Option<Preset>,
    pub omega: f64,
    pub p: f64,
    pub rate: f64,
    pub gamma_recomputed: f64,
    pub caption_gamma: Option<f64>,
    pub omega_prime: f64,
    pub regime: Regime,
    pub initial_bloch: BlochVector,
    pub dt: f64,
    pub t_final: f64,
    pub sample_interval: f64,
    pub scheme: Option<Scheme>,
    pub seed: Option<u64>,
    pub band: f64,
    pub master: Option<MasterStats>,
    pub trajectory: Option<TrajectoryStats>,
    pub ensemble: Option<EnsembleStats>,
    pub window: Option<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub summary: Summary,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub rate: f64,
    pub p: f64,
    pub gamma: f64,
    pub stats: TrajectoryStats,
    pub master_dir: PathBuf,
    pub trajectory_dir: PathBuf,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub dir: PathBuf,
    pub rows: Vec<SweepRow>,
}

fn base_summary(cfg: &RunConfig, atom: &AtomParams) -> Result<Summary> {
    let trajectory_mode = matches!(cfg.mode, Mode::Trajectory | Mode::Ensemble);
    Ok(Summary {
        software: SOFTWARE,
        mode: cfg.mode,
        preset: cfg.preset,
        omega: atom.omega,
        p: atom.p,
        rate: atom.rate,
        gamma_recomputed: atom.gamma,
        caption_gamma: cfg.caption_gamma,
        omega_prime: atom.omega_prime,
        regime: atom.regime,
        initial_bloch: cfg.initial.bloch()?,
        dt: cfg.dt,
        t_final: cfg.t_final,
        sample_interval: cfg.sample_interval,
        scheme: trajectory_mode.then_some(cfg.scheme),
        seed: trajectory_mode.then_some(cfg.seed),
        band: cfg.band,
        master: None,
        trajectory: None,
        ensemble: None,
        window: None,
    })
}

fn title(cfg: &RunConfig) -> String {
    let prefix = cfg.preset.map(|p| format!("{p}: ")).unwrap_or_default();
    format!("{prefix}{}, p = {}, R = {}", cfg.mode, cfg.p, cfg.rate)
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Runs one configuration and writes its artifacts to `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    if cfg.mode == Mode::Sweep {
        return Err(Error::config("mode", "use `sweep` for grid runs"));
    }
    let atom = cfg.atom()?;
    let dir = cfg.out.clone();
    prepare_dir(&dir)?;
    let mut summary = base_summary(cfg, &atom)?;
    let mut with_error_band = false;

    match cfg.mode {
        Mode::MasterEquation => {
            let b0 = cfg.initial.bloch()?;
            let out = propagate(
                &atom.model(),
                &cfg.initial.density()?,
                &PropagateOptions {
                    t_final: cfg.t_final,
                    dt: cfg.dt,
                    sample_interval: cfg.sample_interval,
                },
            )?;
            let blochs = out
                .states
                .iter()
                .map(|s| s.bloch())
                .collect::<Result<Vec<_>>>()?;
            let mut max_err: f64 = 0.0;
            for (&t, b) in out.times.iter().zip(&blochs) {
                let exact = analytic_bloch(b0, t, atom.omega, atom.gamma)?;
                max_err = max_err.max(exact.max_abs_diff(b));
            }
            fs::write(
                dir.join("bloch.csv"),
                bloch_csv(out.times.iter().copied().zip(&blochs)),
            )?;
            summary.master = Some(MasterStats {
                samples: out.len(),
                max_abs_error_vs_analytic: max_err,
                warnings: out.warnings,
            });
        }
        Mode::Trajectory => {
            let record =
                run_trajectory(&atom, &cfg.initial.pure_state()?, &cfg.trajectory_config())?;
            let report = detect_jumps(&record, cfg.band)?;
            write_trajectory_files(&dir, &record)?;
            summary.trajectory = Some(TrajectoryStats::new(&record, &report));
            summary.window = cfg
                .preset
                .and_then(Preset::zoom)
                .and_then(|z| zoom_window(z, &report));
        }
        Mode::Ensemble => {
            with_error_band = true;
            let s0 = cfg.initial.pure_state()?;
            let acc = run_ensemble_mean(&atom, &s0, &cfg.trajectory_config(), cfg.n)?;
            let points = acc.points();
            fs::write(dir.join("bloch.csv"), ensemble_csv(&points))?;

            // replay member 0 with its event log for events.csv
            let first = run_trajectory(
                &atom,
                &s0,
                &TrajectoryConfig {
                    seed: derive_seed(cfg.seed, 0),
                    ..cfg.trajectory_config()
                },
            )?;
            fs::write(dir.join("events.csv"), events_csv(&first.events))?;

            let b0 = cfg.initial.bloch()?;
            let (mut max_err, mut within_tol, mut within_se): (f64, usize, usize) = (0.0, 0, 0);
            for pt in &points {
                let exact = analytic_bloch(b0, pt.t, atom.omega, atom.gamma)?;
                let err = (pt.mean.w - exact.w).abs();
                max_err = max_err.max(err);
                within_tol += usize::from(err <= ENSEMBLE_W_TOLERANCE);
                within_se += usize::from(err <= 3.0 * pt.stderr[2]);
            }
            let count = points.len() as f64;
            let fraction = within_tol as f64 / count;
            summary.ensemble = Some(EnsembleStats {
                n: cfg.n,
                max_abs_mean_w_error: max_err,
                fraction_within_tolerance: fraction,
                tolerance: ENSEMBLE_W_TOLERANCE,
                required_fraction: ENSEMBLE_REQUIRED_FRACTION,
                within_tolerance: fraction >= ENSEMBLE_REQUIRED_FRACTION,
                fraction_within_3se: within_se as f64 / count,
                mean_measurements: acc.total_measurements() as f64 / acc.count() as f64,
                events_trajectory: 0,
            });
        }
        Mode::Sweep => unreachable!("handled above"),
    }

    let spec = PlotSpec {
        title: &title(cfg),
        window: summary.window.map(|[a, b]| (a, b)),
        with_error_band,
    };
    fs::write(dir.join("plot.gp"), plot_script(&spec))?;
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(RunReport { dir, summary })
}

fn write_trajectory_files(dir: &Path, record: &TrajectoryRecord) -> Result<()> {
    fs::write(
        dir.join("bloch.csv"),
        bloch_csv(record.samples.iter().map(|s| (s.t, &s.bloch))),
    )?;
    fs::write(dir.join("events.csv"), events_csv(&record.events))?;
    Ok(())
}

fn zoom_window(zoom: Zoom, report: &JumpReport) -> Option<[f64; 2]> {
    match zoom {
        Zoom::FirstJump => report
            .jumps
            .first()
            .map(|j| [(j.time - 0.25).max(0.0), j.time + 0.25]),
        Zoom::FirstFilament => report
            .filaments
            .iter()
            .max_by(|a, b| depth(a.extremal_w).total_cmp(&depth(b.extremal_w)))
            .map(|f| [(f.start - 0.1).max(0.0), f.end + 0.1]),
    }
}

/// Distance of an excursion's extremal inversion from the nearest pole.
fn depth(w: f64) -> f64 {
    1.0 - w.abs()
}

/// Runs every `(R, p)` point of `grid` as a master-equation run and a
/// single-trajectory run (same seed for every point), then writes `sweep.csv`.
pub fn sweep(cfg: &RunConfig, grid: &[(f64, f64)]) -> Result<SweepReport> {
    let cfg = RunConfig {
        mode: Mode::Sweep,
        grid: grid.to_vec(),
        ..cfg.clone()
    };
    cfg.validate()?;
    let dir = cfg.out.clone();
    prepare_dir(&dir)?;

    let mut rows = Vec::with_capacity(grid.len());
    for (index, &(rate, p)) in grid.iter().enumerate() {
        let point_dir = dir.join(format!("point_{index:03}"));
        let master_dir = point_dir.join("master");
        let trajectory_dir = point_dir.join("traj");
        let point = RunConfig {
            rate,
            p,
            preset: None,
            caption_gamma: None,
            grid: Vec::new(),
            ..cfg.clone()
        };
        // RK4 step limited by the step guard at this point's rate
        let master_dt = if rate > 0.0 {
            cfg.dt.min(0.05 / rate)
        } else {
            cfg.dt
        };
        run(&RunConfig {
            mode: Mode::MasterEquation,
            dt: master_dt,
            out: master_dir.clone(),
            ..point.clone()
        })?;
        let traj = run(&RunConfig {
            mode: Mode::Trajectory,
            out: trajectory_dir.clone(),
            ..point
        })?;
        rows.push(SweepRow {
            index,
            rate,
            p,
            gamma: traj.summary.gamma_recomputed,
            stats: traj.summary.trajectory.expect("trajectory run has stats"),
            master_dir,
            trajectory_dir,
        });
    }

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for r in &rows {
        let s = &r.stats;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.index,
            fmt_sig(r.rate),
            fmt_sig(r.p),
            fmt_sig(r.gamma),
            s.measurements,
            s.jumps,
            fmt_sig(s.jump_rate),
            s.mean_dwell.map(fmt_sig).unwrap_or_default(),
            s.filaments,
            fmt_sig(s.filament_rate),
        ));
    }
    fs::write(dir.join("sweep.csv"), csv)?;
    Ok(SweepReport { dir, rows })
}
