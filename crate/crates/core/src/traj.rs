//! Pure-state quantum trajectories: Rabi precession interrupted by
//! generalized measurements at Poisson-distributed times.
//!
//! Two schemes are available. [`Scheme::Binned`] splits time into bins of
//! width `dt`; each bin holds a measurement with probability `R·dt` and
//! otherwise advances the state by one unitary step. [`Scheme::EventDriven`]
//! draws exponential waiting times and rotates the state exactly between
//! events, so it carries no discretization bias.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::EnsembleAccumulator;
use crate::error::{Error, Result};
use crate::measurement::{collapse, pure_outcome_probabilities, KrausSet};
use crate::mme::sample_grid;
use crate::qops::{BlochVector, StateVector, C64};
use crate::twolevel::AtomParams;

/// Largest permitted `R·dt` for the binned scheme.
pub const BINNED_RATE_GUARD: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Binned,
    #[default]
    EventDriven,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Binned => "binned",
            Scheme::EventDriven => "event-driven",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binned" => Ok(Scheme::Binned),
            "event-driven" | "event_driven" | "event" => Ok(Scheme::EventDriven),
            other => Err(Error::config("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub scheme: Scheme,
    /// Bin width (binned scheme only).
    pub dt: f64,
    pub t_final: f64,
    pub sample_interval: f64,
    pub seed: u64,
    /// Keep the measurement log. Large ensembles that only need the
    /// sampled Bloch vectors may switch this off.
    pub record_events: bool,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::EventDriven,
            dt: 1e-4,
            t_final: 30.0,
            sample_interval: 0.01,
            seed: 0,
            record_events: true,
        }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self, rate: f64) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::config("t_final", "must be positive"));
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return Err(Error::config("sample_interval", "must be positive"));
        }
        if self.scheme == Scheme::Binned {
            if !(self.dt > 0.0 && self.dt.is_finite()) {
                return Err(Error::config("dt", "must be positive"));
            }
            if rate * self.dt > BINNED_RATE_GUARD {
                return Err(Error::config(
                    "dt",
                    format!("R·dt = {:.3e} exceeds {BINNED_RATE_GUARD}", rate * self.dt),
                ));
            }
            bins_per(self.sample_interval, self.dt, "sample_interval")?;
            bins_per(self.t_final, self.dt, "t_final")?;
        }
        Ok(())
    }
}

/// Number of bins of width `dt` making up `span`; `span` must be a whole multiple.
fn bins_per(span: f64, dt: f64, field: &str) -> Result<usize> {
    let n = (span / dt).round();
    if n < 1.0 || (n * dt - span).abs() > 1e-9 * span.max(1.0) {
        return Err(Error::config(
            field,
            format!("{span} is not a whole multiple of dt = {dt}"),
        ));
    }
    Ok(n as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementEvent {
    pub time: f64,
    pub outcome: usize,
    pub w_before: f64,
    pub w_after: f64,
    /// Time since the previous measurement (or since `t = 0`).
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub bloch: BlochVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub params: AtomParams,
    pub config: TrajectoryConfig,
    pub samples: Vec<Sample>,
    pub events: Vec<MeasurementEvent>,
    /// Number of measurements, counted even when the log is off.
    pub measurement_count: usize,
    pub final_state: StateVector,
}

impl TrajectoryRecord {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }
}

/// Exact evolution under `Ĥ = −(Ω/2)σ̂₁` for a time `tau`:
/// `exp(iΩτσ̂₁/2)|ψ⟩ = cos(Ωτ/2)|ψ⟩ + i sin(Ωτ/2) σ̂₁|ψ⟩`.
pub fn unitary_step(s: &StateVector, omega: f64, tau: f64) -> Result<StateVector> {
    if s.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: s.dim(),
        });
    }
    let [a, b] = [s.amplitudes()[0], s.amplitudes()[1]];
    let half = 0.5 * omega * tau;
    let (sin, cos) = half.sin_cos();
    let is = C64::new(0.0, sin);
    StateVector::normalized(vec![a * cos + is * b, is * a + b * cos])
}

/// Seed of trajectory `index` in an ensemble with master seed `master`.
///
/// Injective in `index` for a fixed master: an odd-multiplier Weyl step
/// followed by the bijective SplitMix64 finalizer.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Runner {
    omega: f64,
    kraus: KrausSet,
    rng: ChaCha8Rng,
    state: StateVector,
    last_measurement: f64,
    record_events: bool,
    events: Vec<MeasurementEvent>,
    count: usize,
}

impl Runner {
    fn evolve(&mut self, tau: f64) -> Result<()> {
        if tau > 0.0 {
            self.state = unitary_step(&self.state, self.omega, tau)?;
        }
        Ok(())
    }

    fn measure(&mut self, time: f64) -> Result<()> {
        let probs = pure_outcome_probabilities(&self.kraus, &self.state)?;
        let u: f64 = self.rng.random();
        let mut acc = 0.0;
        let mut outcome = probs.len() - 1;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                outcome = i;
                break;
            }
        }
        // guard against round-off picking a zero-probability tail outcome
        while probs[outcome] <= 0.0 && outcome > 0 {
            outcome -= 1;
        }
        let w_before = self.state.bloch()?.w;
        self.state = collapse(&self.kraus, &self.state, outcome)?;
        let w_after = self.state.bloch()?.w;
        if self.record_events {
            self.events.push(MeasurementEvent {
                time,
                outcome,
                w_before,
                w_after,
                gap: time - self.last_measurement,
            });
        }
        self.count += 1;
        self.last_measurement = time;
        Ok(())
    }

    fn sample(&self, t: f64) -> Result<Sample> {
        Ok(Sample {
            t,
            bloch: self.state.bloch()?,
        })
    }
}

/// Simulates one realization. Fully determined by `cfg.seed`.
pub fn run_trajectory(
    params: &AtomParams,
    s0: &StateVector,
    cfg: &TrajectoryConfig,
) -> Result<TrajectoryRecord> {
    cfg.validate(params.rate)?;
    if s0.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: s0.dim(),
        });
    }
    let mut runner = Runner {
        omega: params.omega,
        kraus: params.kraus(),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        state: s0.clone(),
        last_measurement: 0.0,
        record_events: cfg.record_events,
        events: Vec::new(),
        count: 0,
    };

    let samples = match cfg.scheme {
        Scheme::EventDriven => run_event_driven(&mut runner, params.rate, cfg)?,
        Scheme::Binned => run_binned(&mut runner, params.rate, cfg)?,
    };

    Ok(TrajectoryRecord {
        params: *params,
        config: *cfg,
        samples,
        events: runner.events,
        measurement_count: runner.count,
        final_state: runner.state,
    })
}

fn run_event_driven(runner: &mut Runner, rate: f64, cfg: &TrajectoryConfig) -> Result<Vec<Sample>> {
    let waiting = if rate > 0.0 {
        Some(Exp::new(rate).map_err(|e| Error::config("rate", e.to_string()))?)
    } else {
        None
    };
    let draw = |rng: &mut ChaCha8Rng| waiting.as_ref().map_or(f64::INFINITY, |d| d.sample(rng));

    let grid = sample_grid(cfg.t_final, cfg.sample_interval);
    let mut samples = Vec::with_capacity(grid.len());
    let mut t = 0.0;
    let mut next_event = draw(&mut runner.rng);
    for &ts in &grid {
        while next_event <= ts {
            runner.evolve(next_event - t)?;
            t = next_event;
            runner.measure(t)?;
            next_event = t + draw(&mut runner.rng);
        }
        runner.evolve(ts - t)?;
        t = ts;
        samples.push(runner.sample(t)?);
    }
    Ok(samples)
}

fn run_binned(runner: &mut Runner, rate: f64, cfg: &TrajectoryConfig) -> Result<Vec<Sample>> {
    let per_sample = bins_per(cfg.sample_interval, cfg.dt, "sample_interval")?;
    let total = bins_per(cfg.t_final, cfg.dt, "t_final")?;
    let p_measure = rate * cfg.dt;

    let mut samples = Vec::with_capacity(total / per_sample + 2);
    samples.push(runner.sample(0.0)?);
    for bin in 0..total {
        let done = bin + 1;
        let u: f64 = runner.rng.random();
        if u < p_measure {
            // the bin is spent on the measurement; stamp it at the bin's end
            runner.measure(done as f64 * cfg.dt)?;
        } else {
            runner.evolve(cfg.dt)?;
        }
        if done % per_sample == 0 || done == total {
            samples.push(runner.sample(done as f64 * cfg.dt)?);
        }
    }
    Ok(samples)
}

/// `n` independent trajectories; trajectory `i` uses
/// `derive_seed(cfg.seed, i)`. Output order and content do not depend on
/// the thread schedule.
pub fn run_ensemble(
    params: &AtomParams,
    s0: &StateVector,
    cfg: &TrajectoryConfig,
    n: usize,
) -> Result<Vec<TrajectoryRecord>> {
    if n == 0 {
        return Err(Error::config("n", "ensemble needs at least one trajectory"));
    }
    cfg.validate(params.rate)?;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let member = TrajectoryConfig {
                seed: derive_seed(cfg.seed, i as u64),
                ..*cfg
            };
            run_trajectory(params, s0, &member)
        })
        .collect()
}

/// Trajectories per work unit of [`run_ensemble_mean`]. Fixing the unit
/// size fixes the summation order, so results are bit-reproducible.
const ENSEMBLE_CHUNK: usize = 64;

/// Like [`run_ensemble`] (same member seeds), but keeps only the running
/// pointwise statistics, so memory does not grow with `n`.
pub fn run_ensemble_mean(
    params: &AtomParams,
    s0: &StateVector,
    cfg: &TrajectoryConfig,
    n: usize,
) -> Result<EnsembleAccumulator> {
    if n == 0 {
        return Err(Error::config("n", "ensemble needs at least one trajectory"));
    }
    cfg.validate(params.rate)?;
    let cfg = TrajectoryConfig {
        record_events: false,
        ..*cfg
    };
    let times = sample_grid(cfg.t_final, cfg.sample_interval);
    let chunks = (0..n.div_ceil(ENSEMBLE_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = EnsembleAccumulator::new(times.clone());
            for i in c * ENSEMBLE_CHUNK..n.min((c + 1) * ENSEMBLE_CHUNK) {
                let member = TrajectoryConfig {
                    seed: derive_seed(cfg.seed, i as u64),
                    ..cfg
                };
                acc.push(&run_trajectory(params, s0, &member)?)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = EnsembleAccumulator::new(times);
    for c in &chunks {
        total.merge(c)?;
    }
    Ok(total)
}
