//! Small dense complex linear algebra for quantum states and operators.
//!
//! Basis ordering is `(|1⟩, |2⟩)` for two-level systems: index 0 is the
//! lower level `|1⟩`, index 1 the upper level `|2⟩`. `ħ = 1` throughout.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 64;

/// Allowed deviation of a state vector's norm from 1.
pub const NORM_TOL: f64 = 1e-12;

/// Allowed excess of `|b|` over 1 for a Bloch vector.
pub const BLOCH_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::arg(format!("dimension {dim} outside 1..={MAX_DIM}")));
    }
    Ok(())
}

fn ensure_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[C64]> = self.data.chunks(self.dim).collect();
        f.debug_struct("ComplexMatrix")
            .field("dim", &self.dim)
            .field("rows", &rows)
            .finish()
    }
}

impl ComplexMatrix {
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        ensure_same_dim(dim * dim, data.len())?;
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("matrix has non-finite entries".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(N, data).expect("literal matrix must be finite and within MAX_DIM")
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Result<Self> {
        check_dim(dim)?;
        let data = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(
            dim > 0 && dim <= MAX_DIM,
            "dimension {dim} outside 1..={MAX_DIM}"
        );
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.data[k * dim + k] = ONE;
        }
        m
    }

    pub fn diagonal(diag: &[C64]) -> Result<Self> {
        let dim = diag.len();
        Self::from_fn(dim, |i, j| if i == j { diag[i] } else { ZERO })
    }

    /// `|a⟩⟨b|` for basis states `a`, `b`.
    pub fn basis_outer(dim: usize, a: usize, b: usize) -> Result<Self> {
        if a >= dim || b >= dim {
            return Err(Error::arg(format!(
                "basis index out of range for dim {dim}"
            )));
        }
        Self::from_fn(dim, |i, j| if i == a && j == b { ONE } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Self { dim: n, data }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.data[k * self.dim + k]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: C64, other: &ComplexMatrix) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn checked_mul(&self, other: &ComplexMatrix) -> Result<Self> {
        ensure_same_dim(self.dim, other.dim)?;
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                for (out, b) in data[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *out += a * b;
                }
            }
        }
        Ok(Self { dim: n, data })
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        ensure_same_dim(self.dim, v.len())?;
        let n = self.dim;
        Ok((0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// `A ρ A†`
    pub fn sandwich(&self, rho: &ComplexMatrix) -> Result<Self> {
        self.checked_mul(rho)?.checked_mul(&self.dagger())
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm; an upper bound on the spectral norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `A − A†`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = self.data[i * n + j] - self.data[j * n + i].conj();
                err = err.max(d.norm());
            }
        }
        err
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Eigenvalues of the Hermitian part `(A + A†)/2`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let h = |i: usize, j: usize| 0.5 * (self.data[i * n + j] + self.data[j * n + i].conj());
        let mut eig = match n {
            1 => vec![h(0, 0).re],
            2 => {
                let mean = 0.5 * (h(0, 0).re + h(1, 1).re);
                let half_gap = 0.5 * (h(0, 0).re - h(1, 1).re);
                let r = half_gap.hypot(h(0, 1).norm());
                vec![mean - r, mean + r]
            }
            _ => {
                let m = DMatrix::from_fn(n, n, h);
                m.symmetric_eigenvalues().iter().copied().collect()
            }
        };
        eig.sort_by(f64::total_cmp);
        eig
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.dim && j < self.dim, "index out of range");
        &self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Panics on dimension mismatch; use [`ComplexMatrix::checked_mul`] for a fallible product.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_mul(rhs).expect("dimension mismatch")
    }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Accepts amplitudes whose norm is already 1 within [`NORM_TOL`].
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        check_dim(amps.len())?;
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("state has non-finite amplitudes".into()));
        }
        let norm = norm_of(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let norm = norm_of(&amps);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Validation(format!(
                "cannot normalize vector of norm {norm}"
            )));
        }
        Self::new(amps.into_iter().map(|z| z / norm).collect())
    }

    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        check_dim(dim)?;
        if k >= dim {
            return Err(Error::arg(format!(
                "basis index {k} out of range for dim {dim}"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[k] = ONE;
        Ok(Self { amps })
    }

    /// Two-level state `α|1⟩ + β|2⟩`.
    pub fn qubit(alpha: C64, beta: C64) -> Result<Self> {
        Self::new(vec![alpha, beta])
    }

    /// Pure two-level state with the given Bloch vector (`|b| = 1`).
    ///
    /// The phase is fixed so that the `|2⟩` amplitude is real and non-negative.
    pub fn from_bloch(b: BlochVector) -> Result<Self> {
        if (b.norm() - 1.0).abs() > BLOCH_TOL {
            return Err(Error::Validation(format!(
                "pure state needs |b| = 1, got {}",
                b.norm()
            )));
        }
        let beta = (0.5 * (1.0 + b.w)).max(0.0).sqrt();
        let alpha = if beta < 1e-8 {
            ONE
        } else {
            C64::new(b.u, b.v) / (2.0 * beta)
        };
        Self::normalized(vec![alpha, C64::new(beta, 0.0)])
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm_of(&self.amps)
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        ensure_same_dim(self.dim(), other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Bloch vector of a two-level pure state.
    pub fn bloch(&self) -> Result<BlochVector> {
        ensure_same_dim(2, self.dim())?;
        let (a, b) = (self.amps[0], self.amps[1]);
        let coherence = a * b.conj();
        Ok(BlochVector {
            u: 2.0 * coherence.re,
            v: 2.0 * coherence.im,
            w: b.norm_sqr() - a.norm_sqr(),
        })
    }
}

fn norm_of(amps: &[C64]) -> f64 {
    amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Tolerances used when validating a density operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityTolerance {
    pub hermiticity: f64,
    pub trace: f64,
    pub eigenvalue_floor: f64,
}

impl DensityTolerance {
    pub const STRICT: Self = Self {
        hermiticity: 1e-12,
        trace: 1e-12,
        eigenvalue_floor: -1e-10,
    };
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, DensityTolerance::STRICT)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: DensityTolerance) -> Result<Self> {
        let herm = matrix.hermiticity_error();
        if herm > tol.hermiticity {
            return Err(Error::Validation(format!(
                "density operator not Hermitian ({herm:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > tol.trace {
            return Err(Error::Validation(format!(
                "density operator trace {tr} is not 1"
            )));
        }
        let min_eig = matrix.hermitian_eigenvalues()[0];
        if min_eig < tol.eigenvalue_floor {
            return Err(Error::Validation(format!(
                "density operator has negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            matrix: ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64),
        })
    }

    pub fn from_state(s: &StateVector) -> Self {
        let a = s.amplitudes();
        let matrix = ComplexMatrix::from_fn(a.len(), |i, j| a[i] * a[j].conj())
            .expect("state dimension already validated");
        Self { matrix }
    }

    pub fn from_bloch(b: BlochVector) -> Self {
        let (u, v, w) = (b.u, b.v, b.w);
        let matrix = ComplexMatrix::from_rows([
            [C64::new(0.5 * (1.0 - w), 0.0), C64::new(0.5 * u, 0.5 * v)],
            [C64::new(0.5 * u, -0.5 * v), C64::new(0.5 * (1.0 + w), 0.0)],
        ]);
        Self { matrix }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn bloch(&self) -> Result<BlochVector> {
        ensure_same_dim(2, self.dim())?;
        let m = &self.matrix;
        let coherence = m[(0, 1)];
        Ok(BlochVector {
            u: 2.0 * coherence.re,
            v: 2.0 * coherence.im,
            w: (m[(1, 1)] - m[(0, 0)]).re,
        })
    }
}

/// `(u, v, w) = (⟨σ₁⟩, ⟨σ₂⟩, ⟨σ₃⟩)` of a two-level state.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BlochVector {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl BlochVector {
    pub const ORIGIN: Self = Self {
        u: 0.0,
        v: 0.0,
        w: 0.0,
    };
    pub const UPPER: Self = Self {
        u: 0.0,
        v: 0.0,
        w: 1.0,
    };
    pub const LOWER: Self = Self {
        u: 0.0,
        v: 0.0,
        w: -1.0,
    };

    pub fn new(u: f64, v: f64, w: f64) -> Result<Self> {
        let b = Self { u, v, w };
        if !(u.is_finite() && v.is_finite() && w.is_finite()) {
            return Err(Error::Validation(
                "Bloch vector has non-finite components".into(),
            ));
        }
        if b.norm() > 1.0 + BLOCH_TOL {
            return Err(Error::Validation(format!(
                "Bloch vector length {} exceeds 1",
                b.norm()
            )));
        }
        Ok(b)
    }

    pub fn norm(&self) -> f64 {
        (self.u * self.u + self.v * self.v + self.w * self.w).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }

    pub fn max_abs_diff(&self, other: &BlochVector) -> f64 {
        (self.u - other.u)
            .abs()
            .max((self.v - other.v).abs())
            .max((self.w - other.w).abs())
    }
}

/// Pauli operator `σ̂ₖ`, `k ∈ {1, 2, 3}`:
/// `σ̂₁ = |1⟩⟨2| + |2⟩⟨1|`, `σ̂₂ = i(|1⟩⟨2| − |2⟩⟨1|)`, `σ̂₃ = |2⟩⟨2| − |1⟩⟨1|`.
pub fn pauli(k: usize) -> Result<ComplexMatrix> {
    let z = ZERO;
    match k {
        1 => Ok(ComplexMatrix::from_rows([[z, ONE], [ONE, z]])),
        2 => Ok(ComplexMatrix::from_rows([[z, I], [-I, z]])),
        3 => Ok(ComplexMatrix::from_rows([[-ONE, z], [z, ONE]])),
        _ => Err(Error::arg(format!(
            "pauli index must be 1, 2 or 3, got {k}"
        ))),
    }
}

pub fn density_from_state(s: &StateVector) -> Result<DensityOperator> {
    // Re-check in case the caller built the state through a lossy path.
    if (s.norm() - 1.0).abs() > NORM_TOL {
        return Err(Error::Validation(format!(
            "state norm {} is not 1",
            s.norm()
        )));
    }
    Ok(DensityOperator::from_state(s))
}

pub fn bloch_from_density(rho: &DensityOperator) -> Result<BlochVector> {
    rho.bloch()
}

pub fn density_from_bloch(b: BlochVector) -> Result<DensityOperator> {
    let b = BlochVector::new(b.u, b.v, b.w)?;
    Ok(DensityOperator::from_bloch(b))
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(&a.checked_mul(b)? - &b.checked_mul(a)?)
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(&a.checked_mul(b)? + &b.checked_mul(a)?)
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.dagger()
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.trace()
}

/// `⟨ψ|Ô|ψ⟩`
pub fn expectation(op: &ComplexMatrix, s: &StateVector) -> Result<C64> {
    let applied = op.mul_vec(s.amplitudes())?;
    Ok(s.amplitudes()
        .iter()
        .zip(&applied)
        .map(|(a, b)| a.conj() * b)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sigma3_has_upper_level_eigenvalue_plus_one() {
        let s3 = pauli(3).unwrap();
        let upper = StateVector::basis(2, 1).unwrap();
        let out = s3.mul_vec(upper.amplitudes()).unwrap();
        assert_eq!(out, vec![c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn pauli_squares_to_identity() {
        for k in 1..=3 {
            let s = pauli(k).unwrap();
            assert_eq!(&s * &s, ComplexMatrix::identity(2));
        }
    }

    #[test]
    fn pauli_commutator_oracle() {
        // direct 2x2 multiplication: σ1σ2 = diag(-i, i), σ2σ1 = diag(i, -i)
        let s1s2 =
            ComplexMatrix::from_rows([[c(0.0, -1.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]]);
        let s2s1 =
            ComplexMatrix::from_rows([[c(0.0, 1.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -1.0)]]);
        let (s1, s2, s3) = (pauli(1).unwrap(), pauli(2).unwrap(), pauli(3).unwrap());
        assert_eq!(&s1 * &s2, s1s2);
        assert_eq!(&s2 * &s1, s2s1);
        let comm = commutator(&s1, &s2).unwrap();
        assert!(comm.max_abs_diff(&s3.scale(c(0.0, 2.0))) < 1e-15);
    }

    #[test]
    fn pauli_properties() {
        let id = ComplexMatrix::identity(2);
        for k in 1..=3 {
            let s = pauli(k).unwrap();
            assert!(s.is_hermitian(0.0));
            assert_eq!(s.trace(), c(0.0, 0.0));
            assert_eq!(&s * &s.dagger(), id);
            for l in (k + 1)..=3 {
                let t = pauli(l).unwrap();
                assert_eq!(anticommutator(&s, &t).unwrap().max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn pauli_rejects_bad_index() {
        assert!(matches!(pauli(0), Err(Error::Argument(_))));
        assert!(matches!(pauli(4), Err(Error::Argument(_))));
    }

    #[test]
    fn density_of_basis_and_superposition() {
        let upper = StateVector::basis(2, 1).unwrap();
        let rho = density_from_state(&upper).unwrap();
        assert_eq!(
            rho.matrix(),
            &ComplexMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap()
        );

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::qubit(c(h, 0.0), c(h, 0.0)).unwrap();
        let rho = density_from_state(&plus).unwrap();
        for z in rho.matrix().entries() {
            assert!((z - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn epsilon_state_inversion() {
        // |ψ⟩ = √(1−ε²)|2⟩ + ε|1⟩ ⇒ ⟨σ3⟩ = (1−ε²) − ε² = 0.98 at ε = 0.1
        let eps: f64 = 0.1;
        let s = StateVector::qubit(c(eps, 0.0), c((1.0 - eps * eps).sqrt(), 0.0)).unwrap();
        let rho = density_from_state(&s).unwrap();
        let w = (rho.matrix() * &pauli(3).unwrap()).trace();
        assert!((w.re - 0.98).abs() < 1e-14);
        assert!(w.im.abs() < 1e-15);
    }

    #[test]
    fn density_from_state_rejects_unnormalized() {
        let raw = StateVector {
            amps: vec![c(1.0, 0.0), c(1.0, 0.0)],
        };
        assert!(matches!(
            density_from_state(&raw),
            Err(Error::Validation(_))
        ));
        assert!(StateVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn bloch_conversions() {
        let mixed = DensityOperator::maximally_mixed(2).unwrap();
        assert_eq!(bloch_from_density(&mixed).unwrap(), BlochVector::ORIGIN);
        let upper = density_from_state(&StateVector::basis(2, 1).unwrap()).unwrap();
        assert_eq!(bloch_from_density(&upper).unwrap(), BlochVector::UPPER);

        let b = BlochVector::new(0.3, -0.2, 0.5).unwrap();
        let back = bloch_from_density(&density_from_bloch(b).unwrap()).unwrap();
        assert!(back.max_abs_diff(&b) < 1e-15);

        assert_eq!(density_from_bloch(BlochVector::ORIGIN).unwrap(), mixed);
        let lower = density_from_bloch(BlochVector::LOWER).unwrap();
        assert_eq!(
            lower.matrix(),
            &ComplexMatrix::basis_outer(2, 0, 0).unwrap()
        );
    }

    #[test]
    fn density_from_bloch_x_axis_is_projector() {
        let rho = density_from_bloch(BlochVector::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        let expected = &ComplexMatrix::identity(2) + &pauli(1).unwrap();
        assert!(rho.matrix().max_abs_diff(&expected.scale_re(0.5)) < 1e-15);
        let eig = rho.matrix().hermitian_eigenvalues();
        assert!(eig[0].abs() < 1e-15 && (eig[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_from_bloch_rejects_long_vector() {
        let long = BlochVector {
            u: 0.8,
            v: 0.0,
            w: 0.8,
        };
        assert!(matches!(
            density_from_bloch(long),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn bloch_from_density_needs_two_levels() {
        let rho = DensityOperator::maximally_mixed(3).unwrap();
        assert!(matches!(
            bloch_from_density(&rho),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn plumbing_ops() {
        let s3 = pauli(3).unwrap();
        assert_eq!(
            commutator(&s3, &ComplexMatrix::identity(2))
                .unwrap()
                .max_abs(),
            0.0
        );
        let lower = StateVector::basis(2, 0).unwrap();
        assert_eq!(expectation(&s3, &lower).unwrap(), c(-1.0, 0.0));
        assert_eq!(trace(&s3), c(0.0, 0.0));
        assert_eq!(dagger(&pauli(2).unwrap()), pauli(2).unwrap());
        let big = ComplexMatrix::identity(3);
        assert!(matches!(
            commutator(&s3, &big),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            expectation(&big, &lower),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn eigenvalues_general_dimension() {
        let m = ComplexMatrix::diagonal(&[c(0.5, 0.0), c(0.2, 0.0), c(0.3, 0.0)]).unwrap();
        let eig = m.hermitian_eigenvalues();
        assert!((eig[0] - 0.2).abs() < 1e-14 && (eig[2] - 0.5).abs() < 1e-14);
        assert!(DensityOperator::new(m).is_ok());
    }

    #[test]
    fn pure_state_from_bloch_roundtrip() {
        let b = BlochVector::new(0.6, 0.0, -0.8).unwrap();
        let s = StateVector::from_bloch(b).unwrap();
        assert!(s.bloch().unwrap().max_abs_diff(&b) < 1e-14);
        let s = StateVector::from_bloch(BlochVector::LOWER).unwrap();
        assert_eq!(s.bloch().unwrap(), BlochVector::LOWER);
    }

    #[test]
    fn matrix_rejects_bad_input() {
        assert!(ComplexMatrix::new(2, vec![c(0.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::new(1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::new(MAX_DIM + 1, vec![]).is_err());
    }
}
