//! Measurement master equation (MME) and quantum-trajectory simulation of a
//! resonantly driven two-level atom under randomly timed generalized
//! measurements.
//!
//! Module map:
//! - [`qops`]: dense complex matrices, states, Bloch vectors
//! - [`measurement`]: Kraus sets, POM elements, collapse and channels
//! - [`mme`]: the master-equation generator and an RK4 propagator
//! - [`twolevel`]: the driven atom, its Bloch equations and closed-form solution
//! - [`traj`]: stochastic pure-state trajectories and seeded ensembles
//! - [`analysis`]: ensemble statistics, jump/filament detection, measurement sequences
//! - [`cli`]: presets, run configuration and file outputs behind the `mme` binary
//!
//! ```
//! use mme_core::mme::{propagate, PropagateOptions};
//! use mme_core::traj::{run_trajectory, TrajectoryConfig};
//! use mme_core::twolevel::{analytic_bloch, AtomParams};
//! use mme_core::{BlochVector, DensityOperator, StateVector};
//!
//! # fn main() -> mme_core::Result<()> {
//! let atom = AtomParams::new(1.0, 0.16, 70.86)?;
//! let run = propagate(
//!     &atom.model(),
//!     &DensityOperator::from_bloch(BlochVector::UPPER),
//!     &PropagateOptions { t_final: 2.0, dt: 1e-3, sample_interval: 0.5 },
//! )?;
//! let exact = analytic_bloch(BlochVector::UPPER, 2.0, atom.omega, atom.gamma)?;
//! assert!(run.states[4].bloch()?.max_abs_diff(&exact) < 1e-6);
//!
//! let path = run_trajectory(
//!     &atom,
//!     &StateVector::from_bloch(BlochVector::UPPER)?,
//!     &TrajectoryConfig { t_final: 5.0, seed: 1, ..Default::default() },
//! )?;
//! assert_eq!(path.samples.len(), 501);
//! # Ok(())
//! # }
//! ```

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod measurement;
pub mod mme;
pub mod qops;
pub mod traj;
pub mod twolevel;

pub use error::{Error, Result};
pub use qops::{BlochVector, ComplexMatrix, DensityOperator, StateVector, C64};
