//! C ABI over `mme-core`.
//!
//! Every fallible function returns an [`MmeStatus`]; on failure the message is
//! kept per thread and read back with [`mme_last_error_message`]. Results that
//! own memory are returned as opaque handles released by the matching
//! `*_free` function. Array copies take a capacity and fail with
//! `MME_STATUS_BUFFER_TOO_SMALL` rather than truncate.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mme_core::analysis::{self, detect_jumps, EnsemblePoint};
use mme_core::mme::{propagate, PropagateOptions, Propagation};
use mme_core::traj::{
    run_ensemble_mean, run_trajectory, Scheme, TrajectoryConfig, TrajectoryRecord,
};
use mme_core::twolevel::{self, AtomParams};
use mme_core::{BlochVector, DensityOperator, Error, StateVector, C64};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Validation = 4,
    Completeness = 5,
    ImpossibleOutcome = 6,
    UnsupportedForPureState = 7,
    UndefinedRatio = 8,
    Configuration = 9,
    NumericalFailure = 10,
    Io = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

impl From<&Error> for MmeStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Argument(_) => MmeStatus::InvalidArgument,
            Error::Dimension { .. } => MmeStatus::Dimension,
            Error::Validation(_) => MmeStatus::Validation,
            Error::Completeness { .. } => MmeStatus::Completeness,
            Error::ImpossibleOutcome { .. } => MmeStatus::ImpossibleOutcome,
            Error::UnsupportedForPureState { .. } => MmeStatus::UnsupportedForPureState,
            Error::UndefinedRatio(_) => MmeStatus::UndefinedRatio,
            Error::Configuration { .. } => MmeStatus::Configuration,
            Error::NumericalFailure(_) => MmeStatus::NumericalFailure,
            Error::Io(_) => MmeStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MmeBloch {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl From<BlochVector> for MmeBloch {
    fn from(b: BlochVector) -> Self {
        Self {
            u: b.u,
            v: b.v,
            w: b.w,
        }
    }
}

impl MmeBloch {
    fn to_core(self) -> Result<BlochVector, Error> {
        BlochVector::new(self.u, self.v, self.w)
    }
}

/// Rabi frequency, error probability and measurement rate.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MmeAtom {
    pub omega: f64,
    pub p: f64,
    pub rate: f64,
}

impl MmeAtom {
    fn to_core(self) -> Result<AtomParams, Error> {
        AtomParams::new(self.omega, self.p, self.rate)
    }
}

pub const MME_SCHEME_EVENT_DRIVEN: u32 = 0;
pub const MME_SCHEME_BINNED: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MmeTrajectoryConfig {
    /// `MME_SCHEME_EVENT_DRIVEN` or `MME_SCHEME_BINNED`.
    pub scheme: u32,
    pub dt: f64,
    pub t_final: f64,
    pub sample_interval: f64,
    pub seed: u64,
    /// Non-zero to keep the per-measurement event log.
    pub record_events: u8,
}

impl MmeTrajectoryConfig {
    fn to_core(self) -> Result<TrajectoryConfig, Failure> {
        let c = self;
        let scheme = match c.scheme {
            MME_SCHEME_EVENT_DRIVEN => Scheme::EventDriven,
            MME_SCHEME_BINNED => Scheme::Binned,
            other => {
                return Err(Failure::Status(
                    MmeStatus::InvalidArgument,
                    format!("unknown scheme code {other}"),
                ))
            }
        };
        Ok(TrajectoryConfig {
            scheme,
            dt: c.dt,
            t_final: c.t_final,
            sample_interval: c.sample_interval,
            seed: c.seed,
            record_events: c.record_events != 0,
        })
    }
}

/// Logged measurement; `outcome` is 0 for result `1` and 1 for result `2`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MmeEvent {
    pub time: f64,
    pub outcome: u32,
    pub w_before: f64,
    pub w_after: f64,
    pub gap: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MmeSequenceState {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub beta_re: f64,
    pub beta_im: f64,
    pub probability: f64,
}

/// Telegraph statistics; `mean_dwell` is NaN when no dwell was completed.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MmeJumpSummary {
    pub jumps: usize,
    pub filaments: usize,
    pub dwell_count: usize,
    pub mean_dwell: f64,
    pub jump_rate: f64,
    pub filament_rate: f64,
}

/// Density-matrix propagation result.
pub struct MmePropagation {
    times: Vec<f64>,
    blochs: Vec<MmeBloch>,
}

/// Single trajectory result.
pub struct MmeTrajectory {
    record: TrajectoryRecord,
}

/// Ensemble mean and standard error on the sample grid.
pub struct MmeEnsemble {
    points: Vec<EnsemblePoint>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

enum Failure {
    Core(Error),
    Status(MmeStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null() -> Failure {
    Failure::Status(MmeStatus::NullPointer, "null pointer argument".into())
}

fn too_small(need: usize, cap: usize) -> Failure {
    Failure::Status(
        MmeStatus::BufferTooSmall,
        format!("buffer holds {cap} elements, {need} needed"),
    )
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MmeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MmeStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            let status = MmeStatus::from(&e);
            set_last_error(e.to_string());
            status
        }
        Ok(Err(Failure::Status(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            MmeStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

unsafe fn handle_ref<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

/// Copies `src` into `dst[..cap]`.
unsafe fn copy_out<T: Copy>(src: &[T], dst: *mut T, cap: usize) -> Result<(), Failure> {
    if dst.is_null() {
        return Err(null());
    }
    if cap < src.len() {
        return Err(too_small(src.len(), cap));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

unsafe fn into_handle<T>(value: T, out: *mut *mut T) -> Result<(), Failure> {
    let slot = out_ref(out)?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

/// NUL-terminated version string with static lifetime.
#[no_mangle]
pub extern "C" fn mme_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length
/// excluding the terminator, or 0 when there is no message.
#[no_mangle]
pub unsafe extern "C" fn mme_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let Some(msg) = slot.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

#[no_mangle]
pub unsafe extern "C" fn mme_gamma_of(rate: f64, p: f64, out: *mut f64) -> MmeStatus {
    guard(|| {
        *out_ref(out)? = twolevel::gamma_of(rate, p)?;
        Ok(())
    })
}

/// Error probability giving dephasing rate `gamma` at measurement rate `rate`.
#[no_mangle]
pub unsafe extern "C" fn mme_error_probability_for_gamma(
    gamma: f64,
    rate: f64,
    out: *mut f64,
) -> MmeStatus {
    guard(|| {
        *out_ref(out)? = twolevel::error_probability_for_gamma(gamma, rate)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mme_analytic_bloch(
    b0: MmeBloch,
    t: f64,
    omega: f64,
    gamma: f64,
    out: *mut MmeBloch,
) -> MmeStatus {
    guard(|| {
        *out_ref(out)? = twolevel::analytic_bloch(b0.to_core()?, t, omega, gamma)?.into();
        Ok(())
    })
}

/// Writes `(u̇, v̇, ẇ)` into `out`.
#[no_mangle]
pub unsafe extern "C" fn mme_bloch_derivatives(
    b: MmeBloch,
    omega: f64,
    gamma: f64,
    out: *mut MmeBloch,
) -> MmeStatus {
    guard(|| {
        let r = twolevel::bloch_derivatives(b.to_core()?, omega, gamma);
        *out_ref(out)? = MmeBloch {
            u: r.du,
            v: r.dv,
            w: r.dw,
        };
        Ok(())
    })
}

/// `outcomes` holds zero-based results (0 for `1`, 1 for `2`).
#[no_mangle]
pub unsafe extern "C" fn mme_sequence_state(
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
    p: f64,
    outcomes: *const u32,
    n_outcomes: usize,
    out: *mut MmeSequenceState,
) -> MmeStatus {
    guard(|| {
        if outcomes.is_null() && n_outcomes > 0 {
            return Err(null());
        }
        let seq: Vec<usize> = if n_outcomes == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(outcomes, n_outcomes)
                .iter()
                .map(|&o| o as usize)
                .collect()
        };
        let s = analysis::sequence_state(
            C64::new(alpha_re, alpha_im),
            C64::new(beta_re, beta_im),
            p,
            &seq,
        )?;
        *out_ref(out)? = MmeSequenceState {
            alpha_re: s.alpha.re,
            alpha_im: s.alpha.im,
            beta_re: s.beta.re,
            beta_im: s.beta.im,
            probability: s.probability,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mme_mini_jump_ratio(epsilon: f64, p: f64, out: *mut f64) -> MmeStatus {
    guard(|| {
        *out_ref(out)? = analysis::mini_jump_ratio(epsilon, p)?;
        Ok(())
    })
}

/// RK4 propagation of the measurement master equation from Bloch vector `b0`
/// (any point of the closed ball).
#[no_mangle]
pub unsafe extern "C" fn mme_propagate(
    atom: MmeAtom,
    b0: MmeBloch,
    t_final: f64,
    dt: f64,
    sample_interval: f64,
    out: *mut *mut MmePropagation,
) -> MmeStatus {
    guard(|| {
        let model = atom.to_core()?.model();
        let rho0 = DensityOperator::from_bloch(b0.to_core()?);
        let Propagation { times, states, .. } = propagate(
            &model,
            &rho0,
            &PropagateOptions {
                t_final,
                dt,
                sample_interval,
            },
        )?;
        let blochs = states
            .iter()
            .map(|s| s.bloch().map(MmeBloch::from))
            .collect::<Result<Vec<_>, _>>()?;
        into_handle(MmePropagation { times, blochs }, out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn mme_propagation_len(
    h: *const MmePropagation,
    out: *mut usize,
) -> MmeStatus {
    guard(|| {
        *out_ref(out)? = handle_ref(h)?.times.len();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mme_propagation_copy(
    h: *const MmePropagation,
    times: *mut f64,
    blochs: *mut MmeBloch,
    cap: usize,
) -> MmeStatus {
    guard(|| {
        let h = handle_ref(h)?;
        copy_out(&h.times, times, cap)?;
        copy_out(&h.blochs, blochs, cap)
    })
}

#[no_mangle]
pub unsafe extern "C" fn mme_propagation_free(h: *mut MmePropagation) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

fn pure_start(b0: MmeBloch) -> Result<StateVector, Error> {
    StateVector::from_bloch(b0.to_core()?)
}

/// Runs one trajectory from the pure state with Bloch vector `b0`.
#[no_mangle]
pub unsafe extern "C" fn mme_trajectory_run(
    atom: MmeAtom,
    b0: MmeBloch,
    config: MmeTrajectoryConfig,
    out: *mut *mut MmeTrajectory,
) -> MmeStatus {
    guard(|| {
        let record = run_trajectory(&atom.to_core()?, &pure_start(b0)?, &config.to_core()?)?;
        into_handle(MmeTrajectory { record }, out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn mme_trajectory_sample_count(
    h: *const MmeTrajectory,
    out: *mut usize,
) -> MmeStatus {
    guard(|| {
        *out_ref(out)? = handle_ref(h)?.record.samples.len();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mme_trajectory_copy_samples(
    h: *const MmeTrajectory,
    times: *mut f64,
    blochs: *mut MmeBloch,
    cap: usize,
) -> MmeStatus {
    guard(|| {
        let samples = &handle_ref(h)?.record.samples;
        let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let b: Vec<MmeBloch> = samples.iter().map(|s| s.bloch.into()).collect();
        copy_out(&t, times, cap)?;
        copy_out(&b, blochs, cap)
    })
}

/// Number of measurements performed (independent of event logging).
#[no_mangle]
pub unsafe extern "C" fn mme_trajectory_measurement_count(
    h: *const MmeTrajectory,
    out: *mut usize,
) -> MmeStatus {
    guard(|| {
        *out_ref(out)? = handle_ref(h)?.record.measurement_count;
        Ok(())
    })
}

/// Number of logged events (0 when logging was off).
#[no_mangle]
pub unsafe extern "C" fn mme_trajectory_event_count(
    h: *const MmeTrajectory,
    out: *mut usize,
) -> MmeStatus {
    guard(|| {
        *out_ref(out)? = handle_ref(h)?.record.events.len();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mme_trajectory_copy_events(
    h: *const MmeTrajectory,
    events: *mut MmeEvent,
    cap: usize,
) -> MmeStatus {
    guard(|| {
        let ev: Vec<MmeEvent> = handle_ref(h)?
            .record
            .events
            .iter()
            .map(|e| MmeEvent {
                time: e.time,
                outcome: e.outcome as u32,
                w_before: e.w_before,
                w_after: e.w_after,
                gap: e.gap,
            })
            .collect();
        copy_out(&ev, events, cap)
    })
}

#[no_mangle]
pub unsafe extern "C" fn mme_trajectory_detect_jumps(
    h: *const MmeTrajectory,
    band: f64,
    out: *mut MmeJumpSummary,
) -> MmeStatus {
    guard(|| {
        let r = detect_jumps(&handle_ref(h)?.record, band)?;
        *out_ref(out)? = MmeJumpSummary {
            jumps: r.jumps.len(),
            filaments: r.filaments.len(),
            dwell_count: r.dwell_times.len(),
            mean_dwell: r.mean_dwell().unwrap_or(f64::NAN),
            jump_rate: r.jump_rate(),
            filament_rate: r.filament_rate(),
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mme_trajectory_free(h: *mut MmeTrajectory) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Runs `n` trajectories (member `i` seeded from `config.seed` and `i`) and
/// keeps their pointwise mean.
#[no_mangle]
pub unsafe extern "C" fn mme_ensemble_run(
    atom: MmeAtom,
    b0: MmeBloch,
    config: MmeTrajectoryConfig,
    n: usize,
    out: *mut *mut MmeEnsemble,
) -> MmeStatus {
    guard(|| {
        let acc = run_ensemble_mean(&atom.to_core()?, &pure_start(b0)?, &config.to_core()?, n)?;
        into_handle(
            MmeEnsemble {
                points: acc.points(),
            },
            out,
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn mme_ensemble_len(h: *const MmeEnsemble, out: *mut usize) -> MmeStatus {
    guard(|| {
        *out_ref(out)? = handle_ref(h)?.points.len();
        Ok(())
    })
}

/// `stderr` receives standard errors of the mean packed as `(u, v, w)`.
#[no_mangle]
pub unsafe extern "C" fn mme_ensemble_copy(
    h: *const MmeEnsemble,
    times: *mut f64,
    means: *mut MmeBloch,
    stderr: *mut MmeBloch,
    cap: usize,
) -> MmeStatus {
    guard(|| {
        let pts = &handle_ref(h)?.points;
        let t: Vec<f64> = pts.iter().map(|p| p.t).collect();
        let m: Vec<MmeBloch> = pts.iter().map(|p| p.mean.into()).collect();
        let s: Vec<MmeBloch> = pts
            .iter()
            .map(|p| MmeBloch {
                u: p.stderr[0],
                v: p.stderr[1],
                w: p.stderr[2],
            })
            .collect();
        copy_out(&t, times, cap)?;
        copy_out(&m, means, cap)?;
        copy_out(&s, stderr, cap)
    })
}

#[no_mangle]
pub unsafe extern "C" fn mme_ensemble_free(h: *mut MmeEnsemble) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
