//! Post-processing of trajectories and closed-form measurement-sequence algebra.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::two_level_kraus;
use crate::qops::{BlochVector, StateVector, C64};
use crate::traj::TrajectoryRecord;

/// Ensemble statistics at one sample time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsemblePoint {
    pub t: f64,
    pub mean: BlochVector,
    /// Standard error of the mean of `(u, v, w)`.
    pub stderr: [f64; 3],
}

/// Streaming pointwise mean and variance of sampled Bloch vectors.
///
/// Accumulators built over disjoint groups of trajectories can be merged; the
/// result depends only on the order of pushes and merges.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleAccumulator {
    times: Vec<f64>,
    count: usize,
    mean: Vec<[f64; 3]>,
    m2: Vec<[f64; 3]>,
    measurements: usize,
}

impl EnsembleAccumulator {
    pub fn new(times: Vec<f64>) -> Self {
        let n = times.len();
        Self {
            times,
            count: 0,
            mean: vec![[0.0; 3]; n],
            m2: vec![[0.0; 3]; n],
            measurements: 0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Measurements summed over all pushed trajectories.
    pub fn total_measurements(&self) -> usize {
        self.measurements
    }

    pub fn push(&mut self, record: &TrajectoryRecord) -> Result<()> {
        let same = record.samples.len() == self.times.len()
            && record
                .times()
                .zip(&self.times)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0));
        if !same {
            return Err(Error::arg("trajectory has a different sample grid"));
        }
        self.count += 1;
        self.measurements += record.measurement_count;
        let n = self.count as f64;
        for ((s, mean), m2) in record.samples.iter().zip(&mut self.mean).zip(&mut self.m2) {
            for (c, x) in s.bloch.to_array().into_iter().enumerate() {
                let delta = x - mean[c];
                mean[c] += delta / n;
                m2[c] += delta * (x - mean[c]);
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &EnsembleAccumulator) -> Result<()> {
        if self.times != other.times {
            return Err(Error::arg("accumulators have different sample grids"));
        }
        if other.count == 0 {
            return Ok(());
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for k in 0..self.times.len() {
            for c in 0..3 {
                let delta = other.mean[k][c] - self.mean[k][c];
                self.mean[k][c] += delta * nb / n;
                self.m2[k][c] += other.m2[k][c] + delta * delta * na * nb / n;
            }
        }
        self.count += other.count;
        self.measurements += other.measurements;
        Ok(())
    }

    /// Mean and standard error of the mean at every sample time.
    pub fn points(&self) -> Vec<EnsemblePoint> {
        let n = self.count as f64;
        self.times
            .iter()
            .zip(self.mean.iter().zip(&self.m2))
            .map(|(&t, (mean, m2))| {
                let stderr = if self.count > 1 {
                    m2.map(|v| (v.max(0.0) / (n - 1.0) / n).sqrt())
                } else {
                    [0.0; 3]
                };
                EnsemblePoint {
                    t,
                    mean: BlochVector {
                        u: mean[0],
                        v: mean[1],
                        w: mean[2],
                    },
                    stderr,
                }
            })
            .collect()
    }
}

/// Pointwise mean and standard error of the sampled Bloch vectors.
pub fn ensemble_mean_bloch(records: &[TrajectoryRecord]) -> Result<Vec<EnsemblePoint>> {
    let first = records
        .first()
        .ok_or_else(|| Error::arg("no trajectories to average"))?;
    let mut acc = EnsembleAccumulator::new(first.times().collect());
    for (i, r) in records.iter().enumerate() {
        acc.push(r)
            .map_err(|_| Error::arg(format!("trajectory {i} has a different sample grid")))?;
    }
    Ok(acc.points())
}

/// State reached by a run of measurement results with no evolution between them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SequenceState {
    pub alpha: C64,
    pub beta: C64,
    /// Probability of the whole outcome sequence.
    pub probability: f64,
}

impl SequenceState {
    pub fn state(&self) -> Result<StateVector> {
        StateVector::normalized(vec![self.alpha, self.beta])
    }
}

/// Applies the two-level effects for `outcomes` (zero-based, in order) to
/// `α|1⟩ + β|2⟩`, renormalizing after each step.
pub fn sequence_state(alpha: C64, beta: C64, p: f64, outcomes: &[usize]) -> Result<SequenceState> {
    if outcomes.is_empty() {
        return Err(Error::arg("outcome sequence is empty"));
    }
    let start = StateVector::qubit(alpha, beta)?;
    let kraus = two_level_kraus(p)?;
    let mut amps = start.amplitudes().to_vec();
    let mut probability = 1.0;
    for &i in outcomes {
        let group = kraus
            .outcomes()
            .get(i)
            .ok_or_else(|| Error::arg(format!("outcome {i} out of range")))?;
        let next = group[0].mul_vec(&amps)?;
        let step: f64 = next.iter().map(|z| z.norm_sqr()).sum();
        if !(step > 0.0) {
            return Err(Error::ImpossibleOutcome {
                index: i,
                probability: 0.0,
            });
        }
        probability *= step;
        let scale = step.sqrt().recip();
        amps = next.into_iter().map(|z| z * scale).collect();
    }
    Ok(SequenceState {
        alpha: amps[0],
        beta: amps[1],
        probability,
    })
}

/// Ratio of the probabilities of a second result `1` versus `2`, given a
/// first result `1`, starting near `|2⟩` with `|1⟩` amplitude `epsilon`:
/// `(ε² + p²)/p`.
pub fn mini_jump_ratio(epsilon: f64, p: f64) -> Result<f64> {
    if p == 0.0 {
        return Err(Error::UndefinedRatio("p = 0".into()));
    }
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::arg(format!(
            "error probability p = {p} outside (0, 1/2]"
        )));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::arg(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Ok((epsilon * epsilon + p * p) / p)
}

/// Probability `ε²` that a perfect measurement finds the atom in `|1⟩` after
/// it drifted to `√(1−ε²)|2⟩ + ε|1⟩`.
pub fn zeno_jump_probability(epsilon: f64) -> f64 {
    epsilon * epsilon
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Upper band to lower band.
    Down,
    Up,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Jump {
    pub time: f64,
    pub direction: Direction,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Filament {
    pub start: f64,
    pub end: f64,
    /// Inversion furthest from the home band during the excursion.
    pub extremal_w: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct JumpReport {
    pub jumps: Vec<Jump>,
    pub dwell_times: Vec<f64>,
    pub filaments: Vec<Filament>,
    /// Time span of the analysed series.
    pub duration: f64,
}

impl JumpReport {
    pub fn jump_rate(&self) -> f64 {
        rate(self.jumps.len(), self.duration)
    }

    pub fn filament_rate(&self) -> f64 {
        rate(self.filaments.len(), self.duration)
    }

    pub fn mean_dwell(&self) -> Option<f64> {
        if self.dwell_times.is_empty() {
            None
        } else {
            Some(self.dwell_times.iter().sum::<f64>() / self.dwell_times.len() as f64)
        }
    }
}

fn rate(count: usize, duration: f64) -> f64 {
    if duration > 0.0 {
        count as f64 / duration
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Zone {
    Upper,
    Lower,
    Middle,
}

/// Inversion time series of a record: the regular samples merged with the
/// pre- and post-measurement values of every logged event.
pub fn inversion_series(record: &TrajectoryRecord) -> Vec<(f64, f64)> {
    let mut keyed: Vec<(f64, u8, f64)> =
        Vec::with_capacity(record.samples.len() + 2 * record.events.len());
    for e in &record.events {
        keyed.push((e.time, 0, e.w_before));
        keyed.push((e.time, 1, e.w_after));
    }
    keyed.extend(record.samples.iter().map(|s| (s.t, 2, s.bloch.w)));
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(t, _, w)| (t, w)).collect()
}

/// Detects eigenstate bands (`w ≥ 1 − band` and `w ≤ −1 + band`), jumps
/// between them, filaments (excursions returning to the band they left) and
/// dwell times.
pub fn detect_jumps(record: &TrajectoryRecord, band: f64) -> Result<JumpReport> {
    detect_jumps_in_series(&inversion_series(record), band)
}

/// As [`detect_jumps`], on a time-ordered `(t, w)` series. Band crossings
/// are located by linear interpolation between neighbouring points.
pub fn detect_jumps_in_series(series: &[(f64, f64)], band: f64) -> Result<JumpReport> {
    if !(band > 0.0 && band < 1.0) {
        return Err(Error::arg(format!("band must lie in (0, 1), got {band}")));
    }
    let upper = 1.0 - band;
    let lower = -1.0 + band;
    let zone = |w: f64| {
        if w >= upper {
            Zone::Upper
        } else if w <= lower {
            Zone::Lower
        } else {
            Zone::Middle
        }
    };
    let threshold = |z: Zone| if z == Zone::Upper { upper } else { lower };
    let crossing = |(t0, w0): (f64, f64), (t1, w1): (f64, f64), level: f64| {
        if t1 <= t0 || w1 == w0 {
            t1
        } else {
            (t0 + (level - w0) / (w1 - w0) * (t1 - t0)).clamp(t0, t1)
        }
    };

    let mut report = JumpReport::default();
    let Some(&first) = series.first() else {
        return Ok(report);
    };
    let last = *series.last().expect("non-empty");
    report.duration = last.0 - first.0;

    let mut home: Option<Zone> = None;
    let mut dwell_start = first.0;
    let mut exit_time = first.0;
    let mut extreme = first.1;
    if zone(first.1) != Zone::Middle {
        home = Some(zone(first.1));
    }

    let push_dwell = |report: &mut JumpReport, from: f64, to: f64| {
        if to > from {
            report.dwell_times.push(to - from);
        }
    };

    for pair in series.windows(2) {
        let (prev, cur) = (pair[0], pair[1]);
        let (zp, zc) = (zone(prev.1), zone(cur.1));
        match (zp, zc) {
            (a, b) if a == b && a != Zone::Middle => {}
            (Zone::Middle, Zone::Middle) => match home {
                Some(Zone::Upper) => extreme = extreme.min(cur.1),
                Some(Zone::Lower) => extreme = extreme.max(cur.1),
                _ => {}
            },
            (from, Zone::Middle) => {
                exit_time = crossing(prev, cur, threshold(from));
                push_dwell(&mut report, dwell_start, exit_time);
                extreme = cur.1;
            }
            (Zone::Middle, to) => {
                let entry = crossing(prev, cur, threshold(to));
                match home {
                    Some(h) if h == to => report.filaments.push(Filament {
                        start: exit_time,
                        end: entry,
                        extremal_w: extreme,
                    }),
                    Some(_) => report.jumps.push(Jump {
                        time: entry,
                        direction: direction_into(to),
                    }),
                    None => {}
                }
                home = Some(to);
                dwell_start = entry;
            }
            (from, to) => {
                let exit = crossing(prev, cur, threshold(from));
                let entry = crossing(prev, cur, threshold(to));
                push_dwell(&mut report, dwell_start, exit);
                report.jumps.push(Jump {
                    time: entry,
                    direction: direction_into(to),
                });
                home = Some(to);
                dwell_start = entry;
            }
        }
    }
    if zone(last.1) != Zone::Middle {
        push_dwell(&mut report, dwell_start, last.0);
    }
    Ok(report)
}

fn direction_into(z: Zone) -> Direction {
    if z == Zone::Lower {
        Direction::Down
    } else {
        Direction::Up
    }
}
