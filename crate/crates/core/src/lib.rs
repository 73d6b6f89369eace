//! Mass-conserving, energy-stable finite element schemes for the porous
//! medium equation `ρ_t = Δ(ρ^m)`, `m > 1`.
//!
//! Two discretisations share one mesh/assembly layer:
//!
//! * [`logdensity`]: P1 elements in the log-density variable `u = log ρ`,
//!   semi-implicit in time, with a Newton solve of a strictly convex
//!   functional per step. Positive by construction; compactly supported
//!   data is handled by activating degrees of freedom as the front moves.
//! * [`mixed`]: RT0-P0 mixed elements for density, potential and velocity
//!   with an upwind flux and a lumped velocity mass matrix; velocity and
//!   potential are condensed so each step is a density-only Newton solve.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. File formats, drivers and the command line live in the
//! `pme-harness` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod geometry;
pub mod logdensity;
mod math;
pub mod mesh;
pub mod mixed;
pub mod problems;
pub mod quadrature;
pub mod sparse;

pub use error::{PmeError, Result};
pub use geometry::EdgeGeometry;
pub use mesh::{CellKind, Mesh, MeshKind};
