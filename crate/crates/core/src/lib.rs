//! Classical simulation of a structure-based quantum search over the lattice
//! of assumption subsets.
//!
//! A search problem is `n` assumptions, a solution size `L` and a list of
//! nogoods. One trial starts with all amplitude in the empty set and then,
//! for `J` steps, flips the phase of nogoods (and, optionally, of goods that
//! are too small) before mixing with the fixed operator `U = W D W`. The
//! simulator reports the exact probability of measuring a solution after
//! every step and the expected cost `J / P_soln`.
//!
//! Modules, bottom-up:
//!
//! * [`lattice`]: set encoding, exact binomials and Krawtchouk sums.
//! * [`transform`]: the mixing operator on full state vectors.
//! * [`oracle`]: nogood closure, solutions and phase policies.
//! * [`engine`]: the search iteration and cost accounting.
//! * [`reduced`]: size-indexed simulators for the two extreme problems.
//! * [`problems`]: random CSP ensembles and problem encoders.
//! * [`experiments`]: ensemble sweeps producing CSV tables.

pub mod engine;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod oracle;
pub mod problems;
pub mod reduced;
pub mod transform;

pub use engine::{optimal_steps, run_trial, RunRecord, SimulationLimits};
pub use error::{Error, Result};
pub use lattice::{AssumptionSet, KrawtchoukTable};
pub use oracle::{ConsistencyMap, PhasePolicy, ProblemInstance};
pub use transform::{DiagonalSigns, StateVector};
