//! Linear programs behind the output-size bounds.

pub mod bounds;
pub mod simplex;

pub use bounds::{
    agm_bound, construct_h_star, modular_bound, polymat_acyclic, polymatroid_lp_full, BoundReport, LogValue,
    SetFunction,
};
