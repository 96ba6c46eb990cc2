//! Resonantly driven two-level atom under imperfect energy measurements.
//!
//! The master equation reduces to Bloch equations with a single dephasing
//! rate `γ = (R/2)(√(1−p) − √p)²`:
//!
//! ```text
//! du/dt = −2γu,   dv/dt = Ωw − 2γv,   dw/dt = −Ωv
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::{two_level_kraus, KrausSet};
use crate::mme::MmeModel;
use crate::qops::{pauli, BlochVector, ComplexMatrix};

/// Index of the result "atom found in `|1⟩`".
pub const OUTCOME_LOWER: usize = 0;
/// Index of the result "atom found in `|2⟩`".
pub const OUTCOME_UPPER: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

/// Drive and measurement parameters with the derived rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AtomParams {
    pub omega: f64,
    pub p: f64,
    pub rate: f64,
    pub gamma: f64,
    /// `√|Ω² − γ²|`: the reduced Rabi frequency when underdamped, the
    /// real decay exponent `κ′` when overdamped, zero when critical.
    pub omega_prime: f64,
    pub regime: Regime,
}

impl AtomParams {
    pub fn new(omega: f64, p: f64, rate: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::arg(format!(
                "Rabi frequency must be positive, got {omega}"
            )));
        }
        let gamma = gamma_of(rate, p)?;
        let (omega_prime, regime) = classify(omega, gamma);
        Ok(Self {
            omega,
            p,
            rate,
            gamma,
            omega_prime,
            regime,
        })
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        hamiltonian(self.omega)
    }

    pub fn kraus(&self) -> KrausSet {
        two_level_kraus(self.p).expect("p validated on construction")
    }

    pub fn model(&self) -> MmeModel {
        MmeModel::new(self.hamiltonian(), self.kraus(), self.rate)
            .expect("two-level model is valid")
    }
}

fn classify(omega: f64, gamma: f64) -> (f64, Regime) {
    let disc = omega * omega - gamma * gamma;
    let regime = if (gamma - omega).abs() <= 1e-12 * omega {
        Regime::Critical
    } else if gamma < omega {
        Regime::Underdamped
    } else {
        Regime::Overdamped
    };
    let omega_prime = if regime == Regime::Critical {
        0.0
    } else {
        disc.abs().sqrt()
    };
    (omega_prime, regime)
}

/// `Ĥ = −(Ω/2)σ̂₁`
pub fn hamiltonian(omega: f64) -> ComplexMatrix {
    pauli(1).expect("σ₁ exists").scale_re(-0.5 * omega)
}

fn check_rate_and_p(rate: f64, p: f64) -> Result<()> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::arg(format!(
            "measurement rate must be finite and >= 0, got {rate}"
        )));
    }
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::arg(format!(
            "error probability p = {p} outside [0, 1/2]"
        )));
    }
    Ok(())
}

/// `γ = (R/2)(√(1−p) − √p)²`
pub fn gamma_of(rate: f64, p: f64) -> Result<f64> {
    check_rate_and_p(rate, p)?;
    let d = (1.0 - p).sqrt() - p.sqrt();
    Ok(0.5 * rate * d * d)
}

/// Error probability `p ∈ [0, 1/2]` giving dephasing rate `gamma` at measurement rate `rate`.
pub fn error_probability_for_gamma(gamma: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::arg(format!(
            "measurement rate must be positive, got {rate}"
        )));
    }
    if !(0.0..=0.5 * rate).contains(&gamma) {
        return Err(Error::arg(format!(
            "γ = {gamma} unreachable at R = {rate} (need 0 <= γ <= R/2)"
        )));
    }
    // (√(1−p) − √p)² = 1 − 2√(p(1−p)) = 2γ/R
    let q = 0.5 * (1.0 - 2.0 * gamma / rate);
    let disc = (1.0 - 4.0 * q * q).max(0.0);
    Ok(0.5 * (1.0 - disc.sqrt()))
}

/// Time derivative of a Bloch vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochRate {
    pub du: f64,
    pub dv: f64,
    pub dw: f64,
}

pub fn bloch_derivatives(b: BlochVector, omega: f64, gamma: f64) -> BlochRate {
    BlochRate {
        du: -2.0 * gamma * b.u,
        dv: omega * b.w - 2.0 * gamma * b.v,
        dw: -omega * b.v,
    }
}

/// Closed-form solution of the Bloch equations.
///
/// With `C(t)`, `S(t)` equal to `cos Ω′t`, `sin(Ω′t)/Ω′` (underdamped),
/// `cosh κ′t`, `sinh(κ′t)/κ′` (overdamped) or `1`, `t` (critical):
///
/// ```text
/// u = u₀ e^{−2γt}
/// v = e^{−γt} [v₀ (C − γS) + w₀ Ω S]
/// w = e^{−γt} [w₀ (C + γS) − v₀ Ω S]
/// ```
pub fn analytic_bloch(b0: BlochVector, t: f64, omega: f64, gamma: f64) -> Result<BlochVector> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::arg(format!("time must be finite and >= 0, got {t}")));
    }
    let (_, regime) = classify(omega, gamma);
    // c = e^{−γt} C(t), s = e^{−γt} S(t)
    let (c, s) = match regime {
        Regime::Underdamped => {
            let wp = (omega * omega - gamma * gamma).sqrt();
            let decay = (-gamma * t).exp();
            (decay * (wp * t).cos(), decay * (wp * t).sin() / wp)
        }
        Regime::Critical => {
            let decay = (-gamma * t).exp();
            (decay, decay * t)
        }
        Regime::Overdamped => {
            let kp = (gamma * gamma - omega * omega).sqrt();
            // e^{(κ′−γ)t} with κ′ − γ = −Ω²/(γ + κ′), avoiding cosh overflow
            let slow = (-(omega * omega) / (gamma + kp) * t).exp();
            let fast = (-(gamma + kp) * t).exp();
            (0.5 * (slow + fast), 0.5 * (slow - fast) / kp)
        }
    };
    Ok(BlochVector {
        u: b0.u * (-2.0 * gamma * t).exp(),
        v: b0.v * (c - gamma * s) + b0.w * omega * s,
        w: b0.w * (c + gamma * s) - b0.v * omega * s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamiltonian_entries() {
        let h = hamiltonian(1.0);
        assert_eq!(h[(0, 0)].norm(), 0.0);
        assert_eq!(h[(1, 1)].norm(), 0.0);
        assert_eq!(h[(0, 1)].re, -0.5);
        assert_eq!(h[(1, 0)].re, -0.5);
        for &om in &[-2.0, 0.0, 0.3, 7.0] {
            assert!(hamiltonian(om).is_hermitian(0.0));
        }
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_of(100.0, 0.0).unwrap(), 50.0);
        for &r in &[0.0, 1.0, 258.8] {
            assert_eq!(gamma_of(r, 0.5).unwrap(), 0.0);
        }
        // direct evaluation: 35.43 · (√0.84 − 0.4)²
        let direct = 0.5 * 70.86 * (0.84f64.sqrt() - 0.4).powi(2);
        assert!((gamma_of(70.86, 0.16).unwrap() - direct).abs() < 1e-12);
        assert!((gamma_of(70.86, 0.16).unwrap() - 9.4523).abs() < 5e-4);
        assert!((gamma_of(20.0, 0.49).unwrap() - 0.002).abs() < 1e-6);
        assert!(gamma_of(-1.0, 0.1).is_err());
        assert!(gamma_of(1.0, 0.6).is_err());
    }

    #[test]
    fn gamma_monotone_in_p() {
        let mut last = f64::INFINITY;
        for k in 0..=50 {
            let g = gamma_of(10.0, k as f64 * 0.01).unwrap();
            assert!(g < last);
            last = g;
        }
    }

    #[test]
    fn gamma_inversion_roundtrip() {
        for &(r, p) in &[
            (20.0, 0.49),
            (1.414, 0.36),
            (70.86, 0.16),
            (100.0, 0.0),
            (3.0, 0.5),
        ] {
            let g = gamma_of(r, p).unwrap();
            let back = error_probability_for_gamma(g, r).unwrap();
            assert!((gamma_of(r, back).unwrap() - g).abs() < 1e-12 * r.max(1.0));
        }
        assert!(error_probability_for_gamma(10.0, 1.0).is_err());
    }

    #[test]
    fn params_regimes() {
        let a = AtomParams::new(1.0, 0.49, 20.0).unwrap();
        assert_eq!(a.regime, Regime::Underdamped);
        assert!((a.omega_prime - (1.0 - a.gamma * a.gamma).sqrt()).abs() < 1e-15);
        assert_eq!(
            AtomParams::new(1.0, 0.0, 100.0).unwrap().regime,
            Regime::Overdamped
        );
        assert_eq!(
            AtomParams::new(1.0, 0.0, 2.0).unwrap().regime,
            Regime::Critical
        );
        assert!(AtomParams::new(0.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        let z = bloch_derivatives(BlochVector::ORIGIN, 1.0, 0.3);
        assert_eq!((z.du, z.dv, z.dw), (0.0, 0.0, 0.0));
        let r = bloch_derivatives(BlochVector::UPPER, 1.3, 7.0);
        assert_eq!((r.du, r.dv, r.dw), (0.0, 1.3, 0.0));
    }

    #[test]
    fn analytic_initial_condition_and_undamped_case() {
        let b0 = BlochVector::new(0.2, -0.5, 0.6).unwrap();
        for &g in &[0.0, 0.1414, 1.0, 50.0] {
            assert!(analytic_bloch(b0, 0.0, 1.0, g).unwrap().max_abs_diff(&b0) < 1e-15);
        }
        for k in 0..100 {
            let t = 0.37 * k as f64;
            let b = analytic_bloch(BlochVector::UPPER, t, 1.0, 0.0).unwrap();
            assert!(b.u.abs() < 1e-15);
            assert!((b.v - t.sin()).abs() < 1e-12);
            assert!((b.w - t.cos()).abs() < 1e-12);
        }
        assert!(analytic_bloch(b0, -1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn overdamped_no_overflow() {
        let b = analytic_bloch(BlochVector::UPPER, 1e4, 1.0, 50.0).unwrap();
        assert!(b.w.is_finite() && b.w.abs() < 1e-40);
    }
}
