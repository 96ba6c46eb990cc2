//! The measurement master equation
//!
//! ```text
//! dρ/dt = −i[Ĥ, ρ] + R (Σᵢₖ Âᵢₖ ρ Âᵢₖ† − ρ)
//! ```
//!
//! for measurements occurring at random times with mean rate `R`, and a
//! fixed-step RK4 propagator for it.

use crate::error::{Error, Result};
use crate::measurement::KrausSet;
use crate::qops::{
    anticommutator, commutator, ComplexMatrix, DensityOperator, DensityTolerance, C64,
};

const MINUS_I: C64 = C64::new(0.0, -1.0);

/// Largest permitted `dt·R` and `dt·‖Ĥ‖` in [`propagate`].
pub const STEP_GUARD: f64 = 0.1;

/// Trace drift above which [`propagate`] renormalizes and records a warning.
pub const TRACE_RENORM_THRESHOLD: f64 = 1e-9;

/// Validation applied to every propagated sample.
pub const PROPAGATION_TOLERANCE: DensityTolerance = DensityTolerance {
    hermiticity: 1e-10,
    trace: 1e-9,
    eigenvalue_floor: -1e-8,
};

#[derive(Clone, Debug, PartialEq)]
pub struct MmeModel {
    hamiltonian: ComplexMatrix,
    kraus: KrausSet,
    rate: f64,
}

impl MmeModel {
    pub fn new(hamiltonian: ComplexMatrix, kraus: KrausSet, rate: f64) -> Result<Self> {
        if !hamiltonian.is_hermitian(1e-12) {
            return Err(Error::arg("Hamiltonian is not Hermitian"));
        }
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::arg(format!(
                "measurement rate must be finite and >= 0, got {rate}"
            )));
        }
        if hamiltonian.dim() != kraus.dim() {
            return Err(Error::Dimension {
                expected: hamiltonian.dim(),
                found: kraus.dim(),
            });
        }
        Ok(Self {
            hamiltonian,
            kraus,
            rate,
        })
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn kraus(&self) -> &KrausSet {
        &self.kraus
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Spectral norm of the Hamiltonian.
    pub fn hamiltonian_norm(&self) -> f64 {
        self.hamiltonian
            .hermitian_eigenvalues()
            .iter()
            .fold(0.0, |m: f64, e| m.max(e.abs()))
    }

    fn rhs(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let mut out = commutator(&self.hamiltonian, rho)?.scale(MINUS_I);
        if self.rate > 0.0 {
            let r = C64::new(self.rate, 0.0);
            for a in self.kraus.effects() {
                out.add_scaled(r, &a.sandwich(rho)?);
            }
            out.add_scaled(-r, rho);
        }
        Ok(out)
    }
}

/// `dρ/dt` of the measurement master equation at `rho`.
pub fn generator(m: &MmeModel, rho: &DensityOperator) -> Result<ComplexMatrix> {
    if rho.dim() != m.dim() {
        return Err(Error::Dimension {
            expected: m.dim(),
            found: rho.dim(),
        });
    }
    m.rhs(rho.matrix())
}

/// Continuous-monitoring form `−i[Ĥ, ρ] − (κ/2)[Ô, [Ô, ρ]]`.
pub fn double_commutator_generator(
    observable: &ComplexMatrix,
    kappa: f64,
    hamiltonian: &ComplexMatrix,
    rho: &DensityOperator,
) -> Result<ComplexMatrix> {
    if !observable.is_hermitian(1e-12) {
        return Err(Error::arg("monitored observable is not Hermitian"));
    }
    let r = rho.matrix();
    let mut out = commutator(hamiltonian, r)?.scale(MINUS_I);
    let inner = commutator(observable, r)?;
    out.add_scaled(
        C64::new(-0.5 * kappa, 0.0),
        &commutator(observable, &inner)?,
    );
    Ok(out)
}

/// Lindblad form `−i[Ĥ, ρ] + Σᵢ (LᵢρLᵢ† − ½{Lᵢ†Lᵢ, ρ})`.
pub fn lindblad_generator(
    hamiltonian: &ComplexMatrix,
    jumps: &[ComplexMatrix],
    rho: &DensityOperator,
) -> Result<ComplexMatrix> {
    let r = rho.matrix();
    let mut out = commutator(hamiltonian, r)?.scale(MINUS_I);
    for l in jumps {
        out = &out + &l.sandwich(r)?;
        out.add_scaled(
            C64::new(-0.5, 0.0),
            &anticommutator(&l.dagger().checked_mul(l)?, r)?,
        );
    }
    Ok(out)
}

/// Jump operators `Lᵢₖ = √R Âᵢₖ` putting the model in Lindblad form.
pub fn lindblad_jumps(m: &MmeModel) -> Vec<ComplexMatrix> {
    let s = m.rate.sqrt();
    m.kraus.effects().map(|a| a.scale_re(s)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagateOptions {
    pub t_final: f64,
    /// Largest integrator step.
    pub dt: f64,
    /// Output sampling period; independent of `dt`.
    pub sample_interval: f64,
}

#[derive(Clone, Debug)]
pub struct Propagation {
    pub times: Vec<f64>,
    pub states: Vec<DensityOperator>,
    pub warnings: Vec<String>,
}

impl Propagation {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DensityOperator)> {
        self.times.iter().copied().zip(&self.states)
    }
}

/// Sample times `0, s, 2s, …` up to `t_final`, with `t_final` appended when
/// it is not on the grid.
pub fn sample_grid(t_final: f64, sample_interval: f64) -> Vec<f64> {
    let slack = 1e-9;
    let count = (t_final / sample_interval + slack).floor() as usize;
    let mut times: Vec<f64> = (0..=count).map(|k| k as f64 * sample_interval).collect();
    if let Some(&last) = times.last() {
        if t_final - last > slack * sample_interval.max(1.0) {
            times.push(t_final);
        }
    }
    times
}

fn validate_options(m: &MmeModel, opts: &PropagateOptions) -> Result<()> {
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::config("dt", "must be positive"));
    }
    if !(opts.t_final >= 0.0 && opts.t_final.is_finite()) {
        return Err(Error::config("t_final", "must be finite and non-negative"));
    }
    if !(opts.sample_interval > 0.0 && opts.sample_interval.is_finite()) {
        return Err(Error::config("sample_interval", "must be positive"));
    }
    if opts.dt * m.rate() > STEP_GUARD {
        return Err(Error::config(
            "dt",
            format!("dt·R = {:.3e} exceeds {STEP_GUARD}", opts.dt * m.rate()),
        ));
    }
    let h = m.hamiltonian_norm();
    if opts.dt * h > STEP_GUARD {
        return Err(Error::config(
            "dt",
            format!("dt·‖H‖ = {:.3e} exceeds {STEP_GUARD}", opts.dt * h),
        ));
    }
    Ok(())
}

fn rk4_step(m: &MmeModel, rho: &ComplexMatrix, h: f64) -> Result<ComplexMatrix> {
    let half = C64::new(0.5 * h, 0.0);
    let k1 = m.rhs(rho)?;
    let mut y = rho.clone();
    y.add_scaled(half, &k1);
    let k2 = m.rhs(&y)?;
    let mut y = rho.clone();
    y.add_scaled(half, &k2);
    let k3 = m.rhs(&y)?;
    let mut y = rho.clone();
    y.add_scaled(C64::new(h, 0.0), &k3);
    let k4 = m.rhs(&y)?;

    let mut out = rho.clone();
    out.add_scaled(C64::new(h / 6.0, 0.0), &k1);
    out.add_scaled(C64::new(h / 3.0, 0.0), &k2);
    out.add_scaled(C64::new(h / 3.0, 0.0), &k3);
    out.add_scaled(C64::new(h / 6.0, 0.0), &k4);
    Ok(out)
}

/// Integrates the master equation with classical RK4.
///
/// Each sampling interval is split into the smallest number of equal steps
/// not exceeding `dt`. Every sample is re-validated against
/// [`PROPAGATION_TOLERANCE`].
pub fn propagate(
    m: &MmeModel,
    rho0: &DensityOperator,
    opts: &PropagateOptions,
) -> Result<Propagation> {
    if rho0.dim() != m.dim() {
        return Err(Error::Dimension {
            expected: m.dim(),
            found: rho0.dim(),
        });
    }
    validate_options(m, opts)?;

    let times = sample_grid(opts.t_final, opts.sample_interval);
    let mut states = Vec::with_capacity(times.len());
    let mut warnings = Vec::new();
    let mut rho = rho0.matrix().clone();
    states.push(rho0.clone());

    for pair in times.windows(2) {
        let (t0, t1) = (pair[0], pair[1]);
        let span = t1 - t0;
        let steps = ((span / opts.dt) - 1e-9).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            rho = rk4_step(m, &rho, h)?;
        }

        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_RENORM_THRESHOLD {
            warnings.push(format!(
                "t = {t1}: trace drift {:.3e}, renormalized",
                (tr.re - 1.0).abs()
            ));
            rho = rho.scale(tr.inv());
        }
        let sample = DensityOperator::with_tolerance(rho.clone(), PROPAGATION_TOLERANCE)
            .map_err(|e| Error::NumericalFailure(format!("t = {t1}: {e}")))?;
        states.push(sample);
    }

    Ok(Propagation {
        times,
        states,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::two_level_kraus;
    use crate::qops::{pauli, BlochVector};
    use crate::twolevel::{gamma_of, hamiltonian};

    fn model(omega: f64, p: f64, rate: f64) -> MmeModel {
        MmeModel::new(hamiltonian(omega), two_level_kraus(p).unwrap(), rate).unwrap()
    }

    #[test]
    fn zero_rate_is_pure_commutator() {
        let m = model(1.0, 0.2, 0.0);
        let rho = DensityOperator::from_bloch(BlochVector::new(0.1, 0.2, 0.3).unwrap());
        let g = generator(&m, &rho).unwrap();
        let expect = commutator(m.hamiltonian(), rho.matrix())
            .unwrap()
            .scale(MINUS_I);
        assert!(g.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn fully_mixed_state_is_stationary() {
        let m = model(1.0, 0.16, 70.86);
        let g = generator(&m, &DensityOperator::maximally_mixed(2).unwrap()).unwrap();
        assert!(g.max_abs() < 1e-14);
    }

    #[test]
    fn two_level_generator_matches_dephasing_form() {
        let (omega, p, rate) = (1.0, 0.36, 1.414);
        let m = model(omega, p, rate);
        let gamma = gamma_of(rate, p).unwrap();
        let (s1, s3) = (pauli(1).unwrap(), pauli(3).unwrap());
        let rho = DensityOperator::from_bloch(BlochVector::new(0.4, -0.3, 0.5).unwrap());
        let r = rho.matrix();
        let mut expect = commutator(&s1, r)
            .unwrap()
            .scale(C64::new(0.0, 0.5 * omega));
        expect.add_scaled(C64::new(gamma, 0.0), &(&(&(&s3 * r) * &s3) - r));
        assert!(generator(&m, &rho).unwrap().max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn double_commutator_special_cases() {
        let h = hamiltonian(1.0);
        let rho = DensityOperator::from_bloch(BlochVector::new(0.4, -0.3, 0.5).unwrap());
        let flow = commutator(&h, rho.matrix()).unwrap().scale(MINUS_I);
        let s3 = pauli(3).unwrap();
        let k0 = double_commutator_generator(&s3, 0.0, &h, &rho).unwrap();
        assert!(k0.max_abs_diff(&flow) < 1e-15);
        let id = double_commutator_generator(&ComplexMatrix::identity(2), 3.0, &h, &rho).unwrap();
        assert!(id.max_abs_diff(&flow) < 1e-15);
        let not_herm = ComplexMatrix::basis_outer(2, 0, 1).unwrap();
        assert!(matches!(
            double_commutator_generator(&not_herm, 1.0, &h, &rho),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn model_validation() {
        let k = two_level_kraus(0.1).unwrap();
        assert!(
            MmeModel::new(ComplexMatrix::basis_outer(2, 0, 1).unwrap(), k.clone(), 1.0).is_err()
        );
        assert!(MmeModel::new(hamiltonian(1.0), k.clone(), -1.0).is_err());
        assert!(matches!(
            MmeModel::new(ComplexMatrix::identity(3), k, 1.0),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn step_guard() {
        let m = model(1.0, 0.0, 100.0);
        let rho = DensityOperator::from_bloch(BlochVector::UPPER);
        let opts = PropagateOptions {
            t_final: 1.0,
            dt: 0.01,
            sample_interval: 0.1,
        };
        assert!(matches!(
            propagate(&m, &rho, &opts),
            Err(Error::Configuration { .. })
        ));
        let opts = PropagateOptions { dt: 0.0, ..opts };
        assert!(matches!(
            propagate(&m, &rho, &opts),
            Err(Error::Configuration { .. })
        ));
        let big_h = model(1.0, 0.0, 0.0);
        let opts = PropagateOptions {
            t_final: 1.0,
            dt: 0.5,
            sample_interval: 0.5,
        };
        assert!(matches!(
            propagate(&big_h, &rho, &opts),
            Err(Error::Configuration { .. })
        ));
    }

    #[test]
    fn undamped_rabi_flopping() {
        let m = model(1.0, 0.3, 0.0);
        let rho = DensityOperator::from_bloch(BlochVector::UPPER);
        let opts = PropagateOptions {
            t_final: 10.0,
            dt: 1e-3,
            sample_interval: 0.05,
        };
        let out = propagate(&m, &rho, &opts).unwrap();
        assert_eq!(out.len(), 201);
        for (t, s) in out.iter() {
            assert!((s.bloch().unwrap().w - t.cos()).abs() < 1e-8);
        }
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn sample_grid_appends_t_final() {
        assert_eq!(sample_grid(1.0, 0.5), vec![0.0, 0.5, 1.0]);
        let g = sample_grid(1.0, 0.3);
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(sample_grid(0.0, 0.1), vec![0.0]);
    }
}
