#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Numerical laboratory for screw dislocations in planar domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] - domain descriptors, boundary projections and the regime
//!   sets used to state the collision results.
//! * [`harmonic`] - boundary-integral Laplace solvers (Dirichlet, and a mixed
//!   problem on a domain with a circular hole) plus area quadrature.
//! * [`greens`] - the regular part `k` of the Dirichlet Green's function, the
//!   Robin function `h(x) = k(x, x)` and the full Green's function.
//! * [`energy`] - renormalized energy of a dislocation system and the
//!   Peach-Koehler forces.
//! * [`dynamics`] - gradient-flow integration with boundary and dipole
//!   collision events, and the collision-time bounds.
//! * [`confinement`] - core-radius regularized energies under a prescribed
//!   tangential boundary strain, their limit functional and its minimizers.

mod error;
pub mod confinement;
pub mod dynamics;
pub mod energy;
pub mod geometry;
pub mod greens;
pub mod harmonic;
mod vec2;

pub use error::{Error, Result};
pub use vec2::Vec2;

pub use geometry::{BoundaryPoint, Curve, Domain};
pub use greens::{KernelEvaluation, KernelSource};
pub use confinement::{BoundaryDatum, ConfinementResult, DatumSpec};
pub use dynamics::{Event, EventKind, IntegrateOptions, Trajectory};
pub use energy::{DislocationSystem, ForceReport};
