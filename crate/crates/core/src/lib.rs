//! Degree-constrained uniform sampling over joins and subgraph occurrences.

pub mod directed;
pub mod enumerate;
pub mod error;
pub mod gen;
pub mod graph;
pub mod index;
pub mod io;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod race;
pub mod rational;
pub mod sampler;
pub mod undirected;

pub use error::{Error, Result};
pub use model::{AttrSet, ConstraintSet, DegreeConstraint, JoinQuery, Relation, Tuple, Value};
pub use rational::Rational;
