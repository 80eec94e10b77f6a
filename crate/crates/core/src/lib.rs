//! Anytime 0-1 integer linear programming solver built on self-organizing
//! algebraic circuits.
//!
//! A binary ILP instance is normalized to a canonical all-`<=` form
//! ([`model`]), every row becomes an algebraic gate in a circuit
//! ([`circuit`]), and the circuit's continuous dynamics are integrated from
//! random initial conditions until the digital readout of the voltages
//! satisfies the original constraints ([`dynamics`]). The objective is driven
//! down by an extra inequality gate whose bound tightens after every
//! improving feasible solution ([`solver`]). Independent feasibility
//! checking, optimality gaps and a brute-force oracle live in [`verify`].
//!
//! The crate is `no_std` (with `alloc`): anything that needs wall clocks,
//! threads or files is layered on top by the `soac-cli` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod circuit;
pub mod dynamics;
pub mod model;
pub mod solver;
pub mod verify;

pub use circuit::{AlgebraicGate, GateKind, Soac};
pub use dynamics::{DynamicsParams, SoacState};
pub use model::{Assignment, IlpModel, LinearConstraint, NormalizedModel, Relation};
pub use solver::{Budget, ReplicaResult, SolveReport, SolverConfig, Termination};
