//! Multiobjective complex systems over discretized feasible sets.
//!
//! A complex system is an all-in-one multiobjective problem decomposed into
//! subsystems by a bipartite graph of variable, subsystem, and linking nodes.
//! This crate models such systems, generalizes Pareto efficiency to scoped
//! *superiority*, and provides the algorithmic toolbox built on top of it:
//!
//! * [`model`] — problem definition, its JSON file format, the decomposition
//!   graph, grid discretization, and scoped validity filtering,
//! * [`transform`] — rewriting linking constraints into local ones and global
//!   variables into equality-linked local copies (standard form),
//! * [`dominance`] — system dominance, superior sets, ε-superior sets, and
//!   classical efficiency of the all-in-one objective,
//! * [`bounds`] — subsystem-level and system-level ideal points and sets,
//! * [`structure`] — block-diagonal independence and weighted-sum
//!   scalarization for additively separable systems,
//! * [`hierarchical`] — staged solution algorithms, including ε-relaxation
//!   and adaptive ε bisection,
//! * [`compromise`] — l1-median compromise solutions over reference sets.
//!
//! All feasible sets are finite grids, so every set-valued statement in the
//! API is checkable by exhaustive enumeration. Operations are pure functions
//! over immutable inputs and produce canonically ordered point sets, which
//! makes results byte-reproducible across runs and thread counts.

pub mod bounds;
pub mod compromise;
pub mod dominance;
mod error;
pub mod fixtures;
pub mod hierarchical;
pub mod model;
mod parallel;
pub mod point;
pub mod structure;
mod tol;
pub mod transform;

pub use error::{Error, Result};
pub use point::{Point, PointSet};
pub use tol::Tolerance;
