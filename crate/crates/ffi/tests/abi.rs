use std::ffi::{c_char, CStr};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use mme_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let n = unsafe { mme_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

const UPPER: MmeBloch = MmeBloch {
    u: 0.0,
    v: 0.0,
    w: 1.0,
};

fn traj_config(seed: u64) -> MmeTrajectoryConfig {
    MmeTrajectoryConfig {
        scheme: MME_SCHEME_EVENT_DRIVEN,
        dt: 1e-3,
        t_final: 20.0,
        sample_interval: 0.01,
        seed,
        record_events: 1,
    }
}

#[test]
fn scalar_functions() {
    let mut g = 0.0;
    assert_eq!(unsafe { mme_gamma_of(100.0, 0.0, &mut g) }, MmeStatus::Ok);
    assert_eq!(g, 50.0);

    let mut p = 0.0;
    assert_eq!(
        unsafe { mme_error_probability_for_gamma(g, 100.0, &mut p) },
        MmeStatus::Ok
    );
    assert!(p.abs() < 1e-12);

    assert_eq!(
        unsafe { mme_gamma_of(1.0, 0.7, &mut g) },
        MmeStatus::InvalidArgument
    );
    assert!(last_error().contains("0.7"));

    let mut b = MmeBloch::default();
    assert_eq!(
        unsafe { mme_analytic_bloch(UPPER, 0.0, 1.0, 0.1414, &mut b) },
        MmeStatus::Ok
    );
    assert_eq!(b, UPPER);
    assert_eq!(
        unsafe { mme_bloch_derivatives(UPPER, 1.0, 0.3, &mut b) },
        MmeStatus::Ok
    );
    assert_eq!(
        b,
        MmeBloch {
            u: 0.0,
            v: 1.0,
            w: 0.0
        }
    );

    let mut r = 0.0;
    assert_eq!(
        unsafe { mme_mini_jump_ratio(0.1, 0.0, &mut r) },
        MmeStatus::UndefinedRatio
    );
    assert_eq!(
        unsafe { mme_gamma_of(1.0, 0.1, ptr::null_mut()) },
        MmeStatus::NullPointer
    );

    let v = unsafe { CStr::from_ptr(mme_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn sequence_no_nett_effect() {
    let (a, b) = (0.6_f64, 0.8_f64);
    let outcomes = [0u32, 1];
    let mut s = MmeSequenceState::default();
    let st = unsafe { mme_sequence_state(a, 0.0, 0.0, b, 0.2, outcomes.as_ptr(), 2, &mut s) };
    assert_eq!(st, MmeStatus::Ok);
    assert!((s.alpha_re - a).abs() < 1e-12 && (s.beta_im - b).abs() < 1e-12);
    assert!((s.probability - 0.16).abs() < 1e-12);

    let bad = [5u32];
    let st = unsafe { mme_sequence_state(a, 0.0, b, 0.0, 0.2, bad.as_ptr(), 1, &mut s) };
    assert_eq!(st, MmeStatus::InvalidArgument);
}

#[test]
fn propagation_handle() {
    let atom = MmeAtom {
        omega: 1.0,
        p: 0.0,
        rate: 0.2828,
    };
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { mme_propagate(atom, UPPER, 5.0, 1e-3, 0.5, &mut h) },
        MmeStatus::Ok
    );
    let mut n = 0;
    assert_eq!(unsafe { mme_propagation_len(h, &mut n) }, MmeStatus::Ok);
    assert_eq!(n, 11);

    let mut t = vec![0.0; n];
    let mut b = vec![MmeBloch::default(); n];
    assert_eq!(
        unsafe { mme_propagation_copy(h, t.as_mut_ptr(), b.as_mut_ptr(), n - 1) },
        MmeStatus::BufferTooSmall
    );
    assert_eq!(
        unsafe { mme_propagation_copy(h, t.as_mut_ptr(), b.as_mut_ptr(), n) },
        MmeStatus::Ok
    );
    for (&ti, bi) in t.iter().zip(&b) {
        let mut exact = MmeBloch::default();
        unsafe { mme_analytic_bloch(UPPER, ti, 1.0, 0.1414, &mut exact) };
        assert!((exact.w - bi.w).abs() < 1e-8 && (exact.v - bi.v).abs() < 1e-8);
    }
    unsafe { mme_propagation_free(h) };
    unsafe { mme_propagation_free(ptr::null_mut()) };
}

#[test]
fn trajectory_handle() {
    let atom = MmeAtom {
        omega: 1.0,
        p: 0.0,
        rate: 100.0,
    };
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { mme_trajectory_run(atom, UPPER, traj_config(3), &mut h) },
        MmeStatus::Ok
    );
    let (mut samples, mut events, mut measured) = (0, 0, 0);
    unsafe {
        mme_trajectory_sample_count(h, &mut samples);
        mme_trajectory_event_count(h, &mut events);
        mme_trajectory_measurement_count(h, &mut measured);
    }
    assert_eq!(samples, 2001);
    assert_eq!(events, measured);
    assert!(measured > 1500 && measured < 2500);

    let mut ev = vec![MmeEvent::default(); events];
    assert_eq!(
        unsafe { mme_trajectory_copy_events(h, ev.as_mut_ptr(), events) },
        MmeStatus::Ok
    );
    assert!(ev.iter().all(|e| e.w_after.abs() == 1.0 && e.outcome < 2));

    let mut t = vec![0.0; samples];
    let mut b = vec![MmeBloch::default(); samples];
    assert_eq!(
        unsafe { mme_trajectory_copy_samples(h, t.as_mut_ptr(), b.as_mut_ptr(), samples) },
        MmeStatus::Ok
    );
    assert_eq!(t[0], 0.0);
    assert_eq!(b[0], UPPER);

    let mut summary = MmeJumpSummary::default();
    assert_eq!(
        unsafe { mme_trajectory_detect_jumps(h, 0.1, &mut summary) },
        MmeStatus::Ok
    );
    assert!(summary.dwell_count >= 1);
    assert_eq!(
        unsafe { mme_trajectory_detect_jumps(h, 2.0, &mut summary) },
        MmeStatus::InvalidArgument
    );
    unsafe { mme_trajectory_free(h) };

    let mut bad = traj_config(1);
    bad.scheme = 9;
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { mme_trajectory_run(atom, UPPER, bad, &mut h) },
        MmeStatus::InvalidArgument
    );
    assert!(h.is_null());
    let mixed = MmeBloch {
        u: 0.0,
        v: 0.0,
        w: 0.5,
    };
    assert_ne!(
        unsafe { mme_trajectory_run(atom, mixed, traj_config(1), &mut h) },
        MmeStatus::Ok
    );
}

#[test]
fn ensemble_handle() {
    let atom = MmeAtom {
        omega: 1.0,
        p: 0.49,
        rate: 20.0,
    };
    let mut cfg = traj_config(11);
    cfg.t_final = 5.0;
    cfg.sample_interval = 0.5;
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { mme_ensemble_run(atom, UPPER, cfg, 200, &mut h) },
        MmeStatus::Ok
    );
    let mut n = 0;
    unsafe { mme_ensemble_len(h, &mut n) };
    assert_eq!(n, 11);
    let (mut t, mut m, mut se) = (
        vec![0.0; n],
        vec![MmeBloch::default(); n],
        vec![MmeBloch::default(); n],
    );
    assert_eq!(
        unsafe { mme_ensemble_copy(h, t.as_mut_ptr(), m.as_mut_ptr(), se.as_mut_ptr(), n) },
        MmeStatus::Ok
    );
    assert_eq!(m[0], UPPER);
    assert_eq!(se[0].w, 0.0);
    assert!(se[n - 1].w > 0.0);
    unsafe { mme_ensemble_free(h) };

    assert_eq!(
        unsafe { mme_ensemble_run(atom, UPPER, cfg, 0, &mut h) },
        MmeStatus::Configuration
    );
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/mme.h")
}

/// Directory holding the built `libmme_ffi.a` (the profile directory).
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok()
}

#[test]
fn header_compiles_as_c_and_cpp() {
    if !have_cc() {
        eprintln!("no C compiler; skipped");
        return;
    }
    for lang in ["c", "c++"] {
        let out = Command::new("cc")
            .args(["-x", lang, "-fsyntax-only", "-Wall", "-Werror"])
            .arg(header())
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{lang}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn c_program_links_and_runs() {
    let lib = profile_dir().join("libmme_ffi.a");
    if !have_cc() || !lib.exists() {
        eprintln!("no C compiler or static library; skipped");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "mme.h"

int main(void) {
    double g = 0.0;
    if (mme_gamma_of(70.86, 0.16, &g) != MME_STATUS_OK) return 1;
    if (mme_gamma_of(1.0, 2.0, &g) != MME_STATUS_INVALID_ARGUMENT) return 2;
    char msg[128];
    if (mme_last_error_message(msg, sizeof msg) == 0) return 3;

    MmeAtom atom = {1.0, 0.0, 100.0};
    MmeBloch up = {0.0, 0.0, 1.0};
    MmeTrajectoryConfig cfg = {MME_SCHEME_EVENT_DRIVEN, 1e-3, 10.0, 0.1, 5, 1};
    MmeTrajectory *t = NULL;
    if (mme_trajectory_run(atom, up, cfg, &t) != MME_STATUS_OK) return 4;
    size_t n = 0;
    mme_trajectory_sample_count(t, &n);
    mme_trajectory_free(t);
    printf("%.6f %zu %s\n", g, n, mme_version());
    return n == 101 ? 0 : 5;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "link: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "exit {:?}: {stdout}", run.status);
    assert!(stdout.starts_with("9.452295 101 "), "{stdout}");
}
