//! Simulation and exact computation for degenerate random environments on
//! Z^2 and their dual oriented site percolation on the triangular lattice.
//!
//! The crate has three layers:
//!
//! * environments: a counter-based uniform field, finite-support models,
//!   window realization, and snapshot persistence ([`field`], [`env`],
//!   [`snapshot`]);
//! * lattice machinery: forward/backward/bi-connected clusters, hole-filled
//!   closures and their blocking functions, deterministic path
//!   constructions, band traces, and the triangular-lattice percolation
//!   estimators ([`cluster`], [`closure`], [`walks`], [`bands`], [`otsp`],
//!   [`coupling`]);
//! * exact band-renewal algebra over Q with root extraction for the
//!   critical-probability lower bounds ([`algebra`], [`analysis`]).

#![forbid(unsafe_code)]

pub mod algebra;
pub mod analysis;
pub mod bands;
pub mod closure;
pub mod cluster;
pub mod coupling;
pub mod env;
pub mod export;
pub mod field;
pub mod geom;
pub mod otsp;
pub mod snapshot;
pub mod stats;
pub mod walks;

mod siteset;

#[doc(hidden)]
pub mod testutil;

pub use env::{
    check_theta_plus_one, realize_general, realize_named, realize_two_valued, Direction, EnvSet,
    EnvironmentModel, EnvironmentWindow, LazyEnvironment, LocalEnvironment, ModelDescriptor,
    Provenance, TwoValuedModel,
};
pub use field::UniformField;
pub use geom::{Region, Site};
pub use siteset::SiteSet;
