//! Generalized measurements: Kraus effects, POM elements, collapse and the
//! unknown-result channel.
//!
//! Outcome indices are zero-based. For the two-level family, index 0 is the
//! result "atom in `|1⟩`" and index 1 the result "atom in `|2⟩`".
//!
//! This module is deterministic; outcome sampling lives in [`crate::traj`].

use crate::error::{Error, Result};
use crate::qops::{ComplexMatrix, DensityOperator, DensityTolerance, StateVector, C64};

/// Allowed deviation of `Σ A†A` (or `Σ π`) from the identity.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Effect operators grouped by outcome. `π̂ᵢ = Σₖ Âᵢₖ†Âᵢₖ`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    dim: usize,
    outcomes: Vec<Vec<ComplexMatrix>>,
}

impl KrausSet {
    pub fn new(outcomes: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        let dim = outcomes
            .first()
            .and_then(|g| g.first())
            .map(ComplexMatrix::dim)
            .ok_or_else(|| Error::arg("a Kraus set needs at least one outcome with one effect"))?;
        for (i, group) in outcomes.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::arg(format!("outcome {i} has no effect operators")));
            }
            if let Some(bad) = group.iter().find(|a| a.dim() != dim) {
                return Err(Error::Dimension {
                    expected: dim,
                    found: bad.dim(),
                });
            }
        }
        let mut total = ComplexMatrix::zeros(dim);
        for a in outcomes.iter().flatten() {
            total = &total + &(&a.dagger() * a);
        }
        let deviation = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if deviation > COMPLETENESS_TOL {
            return Err(Error::Completeness { deviation });
        }
        Ok(Self { dim, outcomes })
    }

    /// One effect per outcome.
    pub fn from_effects(effects: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(effects.into_iter().map(|a| vec![a]).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[Vec<ComplexMatrix>] {
        &self.outcomes
    }

    pub fn effects(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.outcomes.iter().flatten()
    }

    fn check_state_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    fn group(&self, index: usize) -> Result<&[ComplexMatrix]> {
        self.outcomes.get(index).map(Vec::as_slice).ok_or_else(|| {
            Error::arg(format!(
                "outcome {index} out of range (have {})",
                self.len()
            ))
        })
    }
}

/// Probability operator measure: Hermitian, positive elements summing to `I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pom {
    elements: Vec<ComplexMatrix>,
}

impl Pom {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .map(ComplexMatrix::dim)
            .ok_or_else(|| Error::arg("a POM needs at least one element"))?;
        let mut total = ComplexMatrix::zeros(dim);
        for (i, e) in elements.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: e.dim(),
                });
            }
            if !e.is_hermitian(COMPLETENESS_TOL) {
                return Err(Error::Validation(format!(
                    "POM element {i} is not Hermitian"
                )));
            }
            let min_eig = e.hermitian_eigenvalues()[0];
            if min_eig < -COMPLETENESS_TOL {
                return Err(Error::Validation(format!(
                    "POM element {i} has negative eigenvalue {min_eig:.3e}"
                )));
            }
            total = &total + e;
        }
        let deviation = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if deviation > COMPLETENESS_TOL {
            return Err(Error::Completeness { deviation });
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementOutcome {
    pub index: usize,
    pub probability: f64,
}

pub fn pom_from_kraus(k: &KrausSet) -> Result<Pom> {
    let elements = k
        .outcomes()
        .iter()
        .map(|group| {
            group.iter().fold(ComplexMatrix::zeros(k.dim()), |acc, a| {
                &acc + &(&a.dagger() * a)
            })
        })
        .collect();
    Pom::new(elements)
}

fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// `P(i) = Tr(ρ π̂ᵢ)` for every outcome, in outcome order.
pub fn outcome_probabilities(
    k: &KrausSet,
    rho: &DensityOperator,
) -> Result<Vec<MeasurementOutcome>> {
    k.check_state_dim(rho.dim())?;
    k.outcomes()
        .iter()
        .enumerate()
        .map(|(index, group)| {
            let mut p = 0.0;
            for a in group {
                p += a.sandwich(rho.matrix())?.trace().re;
            }
            Ok(MeasurementOutcome {
                index,
                probability: clamp_probability(p),
            })
        })
        .collect()
}

/// `P(i) = Σₖ ‖Âᵢₖ|ψ⟩‖²` for a pure state.
pub fn pure_outcome_probabilities(k: &KrausSet, s: &StateVector) -> Result<Vec<f64>> {
    k.check_state_dim(s.dim())?;
    k.outcomes()
        .iter()
        .map(|group| {
            let mut p = 0.0;
            for a in group {
                p += a
                    .mul_vec(s.amplitudes())?
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>();
            }
            Ok(clamp_probability(p))
        })
        .collect()
}

/// Known-result update of a pure state: `Âᵢ|ψ⟩ / ⟨ψ|Âᵢ†Âᵢ|ψ⟩^{1/2}`.
pub fn collapse(k: &KrausSet, s: &StateVector, index: usize) -> Result<StateVector> {
    k.check_state_dim(s.dim())?;
    let group = k.group(index)?;
    let [effect] = group else {
        return Err(Error::UnsupportedForPureState {
            index,
            effects: group.len(),
        });
    };
    let unnormalized = effect.mul_vec(s.amplitudes())?;
    let probability: f64 = unnormalized.iter().map(|z| z.norm_sqr()).sum();
    if !(probability > 0.0) {
        return Err(Error::ImpossibleOutcome { index, probability });
    }
    let scale = probability.sqrt().recip();
    StateVector::normalized(unnormalized.into_iter().map(|z| z * scale).collect())
}

/// Known-result update of a density operator: `Σₖ ÂᵢₖρÂᵢₖ† / Tr(ρπ̂ᵢ)`.
pub fn collapse_density(
    k: &KrausSet,
    rho: &DensityOperator,
    index: usize,
) -> Result<DensityOperator> {
    k.check_state_dim(rho.dim())?;
    let group = k.group(index)?;
    let mut out = ComplexMatrix::zeros(k.dim());
    for a in group {
        out = &out + &a.sandwich(rho.matrix())?;
    }
    let probability = out.trace().re;
    if !(probability > 0.0) {
        return Err(Error::ImpossibleOutcome { index, probability });
    }
    finish_density(out.scale_re(probability.recip()))
}

/// Unknown-result channel `ρ ↦ Σᵢₖ ÂᵢₖρÂᵢₖ†`.
pub fn apply_channel(k: &KrausSet, rho: &DensityOperator) -> Result<DensityOperator> {
    k.check_state_dim(rho.dim())?;
    let mut out = ComplexMatrix::zeros(k.dim());
    for a in k.effects() {
        out = &out + &a.sandwich(rho.matrix())?;
    }
    finish_density(out)
}

/// Removes the round-off anti-Hermitian part and validates.
pub(crate) fn finish_density(m: ComplexMatrix) -> Result<DensityOperator> {
    let herm = (&m + &m.dagger()).scale_re(0.5);
    DensityOperator::with_tolerance(
        herm,
        DensityTolerance {
            hermiticity: 1e-12,
            trace: 1e-10,
            eigenvalue_floor: -1e-10,
        },
    )
}

fn check_error_probability(p: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::arg(format!(
            "error probability p = {p} outside [0, 1/2]"
        )));
    }
    Ok(())
}

fn diag2(lower: f64, upper: f64) -> ComplexMatrix {
    let z = C64::new(0.0, 0.0);
    ComplexMatrix::from_rows([[C64::new(lower, 0.0), z], [z, C64::new(upper, 0.0)]])
}

/// `π̂₁ = p|2⟩⟨2| + (1−p)|1⟩⟨1|`, `π̂₂ = p|1⟩⟨1| + (1−p)|2⟩⟨2|`.
pub fn two_level_pom(p: f64) -> Result<Pom> {
    check_error_probability(p)?;
    Pom::new(vec![diag2(1.0 - p, p), diag2(p, 1.0 - p)])
}

/// Hermitian effects `Â₁ = √p|2⟩⟨2| + √(1−p)|1⟩⟨1|`, `Â₂ = √p|1⟩⟨1| + √(1−p)|2⟩⟨2|`.
pub fn two_level_kraus(p: f64) -> Result<KrausSet> {
    check_error_probability(p)?;
    let (weak, strong) = (p.sqrt(), (1.0 - p).sqrt());
    KrausSet::from_effects(vec![diag2(strong, weak), diag2(weak, strong)])
}
