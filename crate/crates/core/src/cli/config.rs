use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qops::{BlochVector, DensityOperator, StateVector};
use crate::traj::{Scheme, TrajectoryConfig};
use crate::twolevel::AtomParams;

use super::preset::Preset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    MasterEquation,
    Trajectory,
    Ensemble,
    Sweep,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::MasterEquation => "master-equation",
            Mode::Trajectory => "trajectory",
            Mode::Ensemble => "ensemble",
            Mode::Sweep => "sweep",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "master-equation" | "master" => Ok(Mode::MasterEquation),
            "trajectory" | "traj" => Ok(Mode::Trajectory),
            "ensemble" => Ok(Mode::Ensemble),
            "sweep" => Ok(Mode::Sweep),
            other => Err(Error::config("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Initial state: a basis label or a Bloch triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Label(BasisLabel),
    Bloch([f64; 3]),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisLabel {
    /// `|2⟩`
    Upper,
    /// `|1⟩`
    Lower,
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Label(BasisLabel::Upper)
    }
}

impl FromStr for InitialState {
    type Err = Error;

    /// `upper`/`2`, `lower`/`1`, or `u,v,w`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "upper" | "2" | "excited" => Ok(InitialState::Label(BasisLabel::Upper)),
            "lower" | "1" | "ground" => Ok(InitialState::Label(BasisLabel::Lower)),
            triple => {
                let parts: Vec<f64> = triple
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::config("initial", format!("`{triple}`: {e}")))?;
                let [u, v, w] = parts[..] else {
                    return Err(Error::config(
                        "initial",
                        "expected `upper`, `lower` or `u,v,w`",
                    ));
                };
                Ok(InitialState::Bloch([u, v, w]))
            }
        }
    }
}

impl InitialState {
    pub fn bloch(&self) -> Result<BlochVector> {
        let b = match *self {
            InitialState::Label(BasisLabel::Upper) => BlochVector::UPPER,
            InitialState::Label(BasisLabel::Lower) => BlochVector::LOWER,
            InitialState::Bloch([u, v, w]) => {
                BlochVector::new(u, v, w).map_err(|e| Error::config("initial", e.to_string()))?
            }
        };
        Ok(b)
    }

    pub fn density(&self) -> Result<DensityOperator> {
        Ok(DensityOperator::from_bloch(self.bloch()?))
    }

    /// Trajectories need a pure state.
    pub fn pure_state(&self) -> Result<StateVector> {
        StateVector::from_bloch(self.bloch()?)
            .map_err(|_| Error::config("initial", "trajectory modes need a pure state (|b| = 1)"))
    }
}

/// Everything a single invocation of the CLI needs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub omega: f64,
    pub p: f64,
    pub rate: f64,
    pub initial: InitialState,
    pub scheme: Scheme,
    /// Integrator step (master equation) or bin width (binned trajectories).
    pub dt: f64,
    pub t_final: f64,
    pub sample_interval: f64,
    pub seed: u64,
    pub n: usize,
    pub band: f64,
    pub out: PathBuf,
    pub preset: Option<Preset>,
    /// `γ` printed in a figure caption, kept separate from the recomputed value.
    pub caption_gamma: Option<f64>,
    /// `(R, p)` points for sweep mode.
    pub grid: Vec<(f64, f64)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Trajectory,
            omega: 1.0,
            p: 0.16,
            rate: 1.0,
            initial: InitialState::default(),
            scheme: Scheme::EventDriven,
            dt: 1e-3,
            t_final: 30.0,
            sample_interval: 0.01,
            seed: 1,
            n: 1000,
            band: 0.1,
            out: PathBuf::from("mme-out"),
            preset: None,
            caption_gamma: None,
            grid: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn atom(&self) -> Result<AtomParams> {
        AtomParams::new(self.omega, self.p, self.rate).map_err(|e| match e {
            Error::Argument(m) if m.contains("error probability") => Error::config("p", m),
            Error::Argument(m) if m.contains("rate") => Error::config("rate", m),
            Error::Argument(m) => Error::config("omega", m),
            other => other,
        })
    }

    pub fn trajectory_config(&self) -> TrajectoryConfig {
        TrajectoryConfig {
            scheme: self.scheme,
            dt: self.dt,
            t_final: self.t_final,
            sample_interval: self.sample_interval,
            seed: self.seed,
            record_events: true,
        }
    }

    /// Field-level validation.
    pub fn validate(&self) -> Result<()> {
        self.atom()?;
        self.initial.bloch()?;
        let positive = |field: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be positive, got {x}")))
            }
        };
        positive("t_final", self.t_final)?;
        positive("dt", self.dt)?;
        positive("sample_interval", self.sample_interval)?;
        if !(self.band > 0.0 && self.band < 1.0) {
            return Err(Error::config(
                "band",
                format!("must lie in (0, 1), got {}", self.band),
            ));
        }
        match self.mode {
            Mode::Trajectory | Mode::Ensemble => {
                self.initial.pure_state()?;
                self.trajectory_config().validate(self.rate)?;
                if self.mode == Mode::Ensemble && self.n == 0 {
                    return Err(Error::config("n", "must be at least 1"));
                }
            }
            Mode::Sweep => {
                if self.grid.is_empty() {
                    return Err(Error::config(
                        "grid",
                        "sweep needs at least one (R, p) point",
                    ));
                }
                for &(r, p) in &self.grid {
                    AtomParams::new(self.omega, p, r)
                        .map_err(|e| Error::config("grid", format!("point ({r}, {p}): {e}")))?;
                }
                self.initial.pure_state()?;
            }
            Mode::MasterEquation => {}
        }
        Ok(())
    }
}

/// Parses `R:p,R:p,...`.
pub fn parse_grid(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .filter(|item| !item.trim().is_empty())
        .map(|item| {
            let (r, p) = item
                .split_once(':')
                .ok_or_else(|| Error::config("grid", format!("`{item}` is not `R:p`")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::config("grid", format!("`{item}`: {e}")))
            };
            Ok((parse(r)?, parse(p)?))
        })
        .collect()
}

/// On-disk configuration: a TOML document with flat sections mirroring [`RunConfig`].
///
/// ```toml
/// mode = "trajectory"
/// preset = "fig6"
/// out = "runs/fig6"
///
/// [atom]
/// p = 0.16
/// rate = 70.86
///
/// [initial]
/// state = "upper"        # or bloch = [0.0, 0.0, 1.0]
///
/// [trajectory]
/// scheme = "event-driven"
/// t_final = 100.0
/// sample_interval = 0.001
/// seed = 7
///
/// [analysis]
/// band = 0.1
///
/// [sweep]
/// grid = [[20.0, 0.49], [1.414, 0.36]]
/// ```
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub mode: Option<Mode>,
    pub preset: Option<Preset>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub atom: AtomSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub trajectory: TrajectorySection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSection {
    pub omega: Option<f64>,
    pub p: Option<f64>,
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub state: Option<BasisLabel>,
    pub bloch: Option<[f64; 3]>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    pub scheme: Option<Scheme>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub sample_interval: Option<f64>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub band: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub grid: Option<Vec<(f64, f64)>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Writes the values present in the file over `cfg`.
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        let a = &self.atom;
        set(&mut cfg.omega, a.omega);
        set(&mut cfg.p, a.p);
        set(&mut cfg.rate, a.rate);
        if let Some(label) = self.initial.state {
            cfg.initial = InitialState::Label(label);
        }
        if let Some(b) = self.initial.bloch {
            cfg.initial = InitialState::Bloch(b);
        }
        let t = &self.trajectory;
        set(&mut cfg.scheme, t.scheme);
        set(&mut cfg.dt, t.dt);
        set(&mut cfg.t_final, t.t_final);
        set(&mut cfg.sample_interval, t.sample_interval);
        set(&mut cfg.seed, t.seed);
        set(&mut cfg.n, t.n);
        set(&mut cfg.band, self.analysis.band);
        if let Some(g) = &self.sweep.grid {
            cfg.grid = g.clone();
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
